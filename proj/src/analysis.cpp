#include "dplms/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace dplms {

double msd(const Vector& true_weights, std::span<const Vector> node_weights) {
    if (node_weights.empty()) throw std::invalid_argument("msd needs at least one node");
    double sum = 0.0;
    for (const auto& w : node_weights) {
        if (w.size() != true_weights.size()) throw std::invalid_argument("weight length does not match system");
        sum += (true_weights - w).squaredNorm();
    }
    return sum / static_cast<double>(node_weights.size());
}

double msd(const Vector& true_weights, std::span<const NodeFilterState> states) {
    std::vector<Vector> weights;
    weights.reserve(states.size());
    for (const auto& s : states) weights.push_back(s.weights);
    return msd(true_weights, std::span<const Vector>(weights));
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

std::vector<double> MsdCurve::db() const {
    std::vector<double> out(linear.size());
    std::transform(linear.begin(), linear.end(), out.begin(), to_db);
    return out;
}

double MsdCurve::steady_state_db(std::size_t tail) const {
    if (tail == 0 || tail > linear.size()) throw std::invalid_argument("tail window out of range");
    double sum = 0.0;
    for (auto it = linear.end() - static_cast<std::ptrdiff_t>(tail); it != linear.end(); ++it) sum += *it;
    return to_db(sum / static_cast<double>(tail));
}

void write_msd_csv(std::ostream& out, const MsdCurve& curve) {
    out << "iteration,msd_linear,msd_db\n";
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    for (std::size_t k = 0; k < curve.linear.size(); ++k) {
        const double v = curve.linear[k];
        out << (k + 1) << ',' << v << ',' << to_db(v) << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

std::size_t MeanRecursionModel::filter_length() const {
    if (covariances.empty()) throw std::invalid_argument("model has no covariances");
    return static_cast<std::size_t>(covariances.front().rows());
}

namespace {

void validate(const MeanRecursionModel& model) {
    const auto n = static_cast<Eigen::Index>(model.node_count());
    if (n == 0) throw std::invalid_argument("model has no nodes");
    if (model.combination.rows() != n || model.combination.cols() != n || model.adaptation.rows() != n ||
        model.adaptation.cols() != n || static_cast<Eigen::Index>(model.covariances.size()) != n)
        throw std::invalid_argument("inconsistent node count in mean recursion model");
    const auto m = static_cast<Eigen::Index>(model.filter_length());
    for (const auto& r : model.covariances) {
        if (r.rows() != m || r.cols() != m) throw std::invalid_argument("covariance blocks must all be M x M");
    }
}

}  // namespace

Matrix weighted_covariance_block(const MeanRecursionModel& model, std::size_t node) {
    validate(model);
    const auto m = static_cast<Eigen::Index>(model.filter_length());
    Matrix block = Matrix::Zero(m, m);
    for (std::size_t l = 0; l < model.node_count(); ++l) {
        const double c = model.adaptation(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(node));
        if (c != 0.0) block += model.alphas[l] * c * model.covariances[l];
    }
    return block;
}

Matrix mean_error_matrix(const MeanRecursionModel& model) {
    validate(model);
    const auto n = static_cast<Eigen::Index>(model.node_count());
    const auto m = static_cast<Eigen::Index>(model.filter_length());

    // Block-diagonal I - E[S R].
    std::vector<Matrix> contraction(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        contraction[static_cast<std::size_t>(k)] =
            Matrix::Identity(m, m) - model.mu * weighted_covariance_block(model, static_cast<std::size_t>(k));
    }

    // Block (n, l) of (A kron I)^T is a_{l,n} I, so block (n, l) of B is
    // a_{l,n} (I - E[S R])_l.
    Matrix b = Matrix::Zero(n * m, n * m);
    for (Eigen::Index row = 0; row < n; ++row) {
        for (Eigen::Index col = 0; col < n; ++col) {
            const double a = model.combination(col, row);
            if (a != 0.0) b.block(row * m, col * m, m, m) = a * contraction[static_cast<std::size_t>(col)];
        }
    }
    return b;
}

double stability_bound(std::span<const double> alphas, const Eigen::MatrixXd& adaptation,
                       std::span<const Matrix> covariances, BoundVariant variant) {
    const auto n = alphas.size();
    if (n == 0 || covariances.size() != n || static_cast<std::size_t>(adaptation.rows()) != n ||
        static_cast<std::size_t>(adaptation.cols()) != n)
        throw std::invalid_argument("inconsistent inputs to stability bound");
    const auto m = covariances.front().rows();
    for (const auto& r : covariances) {
        if (r.rows() != m || r.cols() != m) throw std::invalid_argument("covariance blocks must all be M x M");
        if (!r.isApprox(r.transpose(), 1e-12)) throw std::invalid_argument("covariance is not symmetric");
        Eigen::LLT<Matrix> llt(r);
        if (llt.info() != Eigen::Success) throw std::invalid_argument("covariance is not positive definite");
    }

    const auto largest_eigenvalue = [](const Matrix& block) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(block, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().maxCoeff();
    };

    double rho = 0.0;
    if (variant == BoundVariant::literal_diagonal) {
        Matrix block = Matrix::Zero(m, m);
        for (std::size_t l = 0; l < n; ++l) {
            const auto li = static_cast<Eigen::Index>(l);
            block += alphas[l] * adaptation(li, li) * covariances[l];
        }
        rho = largest_eigenvalue(block);
    } else {
        for (std::size_t node = 0; node < n; ++node) {
            Matrix block = Matrix::Zero(m, m);
            for (std::size_t l = 0; l < n; ++l)
                block += alphas[l] * adaptation(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(node)) *
                         covariances[l];
            rho = std::max(rho, largest_eigenvalue(block));
        }
    }
    if (!(rho > 0.0)) throw std::invalid_argument("weighted covariance has no positive eigenvalue");
    return 2.0 / rho;
}

double spectral_radius(const Matrix& matrix, double tolerance, int max_iterations) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0) throw std::invalid_argument("matrix must be square");
    if (!matrix.allFinite()) throw std::invalid_argument("matrix has non-finite entries");

    const auto n = matrix.rows();
    Rng rng(0x5eed);
    std::uniform_real_distribution<double> unit(0.5, 1.5);
    Vector v(n);
    for (auto& c : v) c = unit(rng);
    v.normalize();

    double previous = -1.0;
    for (int k = 0; k < max_iterations; ++k) {
        Vector w = matrix * (matrix * v);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        const double estimate = std::sqrt(norm);
        v = w / norm;
        if (std::abs(estimate - previous) <= tolerance * std::max(estimate, std::numeric_limits<double>::min()))
            return estimate;
        previous = estimate;
    }
    throw ConvergenceError("power iteration did not converge");
}

}  // namespace dplms
