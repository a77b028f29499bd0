#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dplms/network.hpp"
#include "dplms/signal.hpp"

namespace dplms {

/// Lower clamp applied to every posterior variance update.
inline constexpr double kVarianceFloor = 1e-12;

/// Sign used for the process-noise term in the predictive variance.
/// `plus` inflates the prior by sigma_p^2 everywhere; `paper_minus` keeps the
/// alpha numerator at sigma^2 + sigma_p^2 but uses sigma^2 - sigma_p^2 in the
/// alpha denominator and the variance recursion.
enum class VarianceSign { plus, paper_minus };

std::string_view to_string(VarianceSign sign);
VarianceSign variance_sign_from_string(std::string_view name);

/// Filters run by the simulator.
enum class Algorithm { dplms, dlms, dse_lms };

std::string_view to_string(Algorithm algorithm);
Algorithm algorithm_from_string(std::string_view name);

/// Per-iteration operation tallies.
struct OpCount {
    std::uint64_t multiplications = 0;
    std::uint64_t additions = 0;
    std::uint64_t absolutes = 0;
    std::uint64_t signs = 0;
    /// Set when the counts are strict lower bounds (Table entries marked ">").
    bool lower_bound = false;

    OpCount& operator+=(const OpCount& other);
    friend bool operator==(const OpCount&, const OpCount&) = default;
};

/// Closed-form per-iteration costs for the published comparison set
/// ("DSE-LMS", "DRVSSLMS", "DLLAD", "DPLMS"), summed over the adaptation and
/// combination recursions. Divisions are not tallied there.
OpCount op_counts(std::string_view algorithm, std::size_t filter_length, std::size_t node_count);

/// Closed-form cost of one network iteration of this library's kernels on
/// `combination`'s support. Divisions count as multiplications.
OpCount implemented_op_counts(Algorithm algorithm, std::size_t filter_length, const CombinationMatrix& combination,
                              VarianceSign sign = VarianceSign::plus);

/// Known per-node hyperparameters of the PLMS recursion.
struct PlmsParams {
    double process_noise_variance = 0.0;      // sigma_p,n^2
    double observation_noise_variance = 0.0;  // sigma_eps,n^2
    VarianceSign variance_sign = VarianceSign::plus;
    /// When set, alpha is held at this value and the variance is not updated.
    std::optional<double> frozen_alpha;
};

struct NodeFilterState {
    Vector weights;
    Vector intermediate;
    double posterior_variance = 1.0;
    double last_alpha = 0.0;
    PlmsParams params;

    NodeFilterState(std::size_t filter_length, double initial_variance, PlmsParams params = {});
};

/// alpha = (s + sp) / ((s +/- sp) |x|^2 + se). Throws std::domain_error when
/// the denominator is not positive.
double plms_alpha(double prior_variance, double process_noise_variance, double observation_noise_variance,
                  const Vector& x, VarianceSign sign = VarianceSign::plus);

/// sigma^2 = [1 - alpha |x|^2 / L] (s +/- sp), clamped at kVarianceFloor.
double plms_variance_update(double prior_variance, double process_noise_variance, double alpha, const Vector& x,
                            std::size_t length, VarianceSign sign = VarianceSign::plus);

/// Standalone PLMS: W' = W + tau alpha e x with e = d - x^T W.
NodeFilterState plms_step(const NodeFilterState& state, const Vector& x, double d, double tau);

/// phi = W + mu alpha e x; updates the node's variance and last_alpha.
Vector dplms_adapt(NodeFilterState& state, const Vector& x, double d, double mu, OpCount* counter = nullptr);

/// phi = W + mu e x.
Vector dlms_adapt(const NodeFilterState& state, const Vector& x, double d, double mu, OpCount* counter = nullptr);

/// phi = W + mu sign(e) x, sign(0) = 0.
Vector dse_lms_adapt(const NodeFilterState& state, const Vector& x, double d, double mu,
                     OpCount* counter = nullptr);

/// W_n = sum over the support of column n of a_{l,n} phi_l.
Vector diffusion_combine(std::span<const Vector> intermediates, const CombinationMatrix& combination,
                         std::size_t node, OpCount* counter = nullptr);

struct NodeSample {
    Vector x;
    double d = 0.0;
};

/// One synchronous adapt-then-combine iteration: every node adapts from its
/// own previous weights, then every node combines the completed intermediates.
void run_network_iteration(std::span<NodeFilterState> states, Algorithm algorithm,
                           const CombinationMatrix& combination, std::span<const NodeSample> data, double mu,
                           OpCount* counter = nullptr);

}  // namespace dplms
