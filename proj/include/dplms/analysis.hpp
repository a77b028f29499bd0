#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "dplms/filters.hpp"
#include "dplms/network.hpp"
#include "dplms/signal.hpp"

namespace dplms {

/// Network mean square deviation of one realization:
/// (1/N) sum_n |W_o - W_n|^2.
double msd(const Vector& true_weights, std::span<const Vector> node_weights);
double msd(const Vector& true_weights, std::span<const NodeFilterState> states);

/// Per-iteration ensemble MSD. `linear[k]` is the value after iteration k + 1;
/// the zero-weight starting point is kept separately. A diverged ensemble is
/// recorded as +infinity from the first non-finite iteration onward.
struct MsdCurve {
    std::vector<double> linear;
    double initial = 0.0;

    std::size_t iterations() const noexcept { return linear.size(); }
    std::vector<double> db() const;
    /// Mean of the last `tail` linear values, in dB.
    double steady_state_db(std::size_t tail) const;
};

double to_db(double linear);

/// Writes `iteration,msd_linear,msd_db` with a header row; iterations are
/// numbered from 1.
void write_msd_csv(std::ostream& out, const MsdCurve& curve);

/// Inputs of the mean weight-error recursion E[W~(i)] = B E[W~(i-1)].
struct MeanRecursionModel {
    Eigen::MatrixXd combination;   // A, N x N, entry (l, n)
    Eigen::MatrixXd adaptation;    // C, N x N, entry (l, n)
    std::vector<double> alphas;    // alpha_l snapshot
    std::vector<Matrix> covariances;  // R_xx,l, each M x M
    double mu = 0.0;

    std::size_t node_count() const noexcept { return alphas.size(); }
    std::size_t filter_length() const;
};

/// Block n of E[S R] / mu: sum_l alpha_l c_{l,n} R_l.
Matrix weighted_covariance_block(const MeanRecursionModel& model, std::size_t node);

/// B = (A kron I_M)^T (I - E[S R]), MN x MN.
Matrix mean_error_matrix(const MeanRecursionModel& model);

enum class BoundVariant {
    per_node,          // max over n of rho(sum_l alpha_l c_{l,n} R_l)
    literal_diagonal,  // rho(sum_l alpha_l c_{l,l} R_l)
};

/// mu_max = 2 / rho. Throws std::invalid_argument for non-symmetric or
/// non-positive-definite covariances.
double stability_bound(std::span<const double> alphas, const Eigen::MatrixXd& adaptation,
                       std::span<const Matrix> covariances, BoundVariant variant = BoundVariant::per_node);

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Spectral radius by power iteration on B^2 (robust to +/- dominant pairs).
/// Relative tolerance 1e-10, at most 10^4 iterations.
double spectral_radius(const Matrix& matrix, double tolerance = 1e-10, int max_iterations = 10000);

}  // namespace dplms
