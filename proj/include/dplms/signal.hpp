#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dplms/random.hpp"

namespace dplms {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Unknown parameter vector W_o with optional random-walk drift.
struct UnknownSystem {
    Vector weights;
    double process_noise_std = 0.0;
};

/// Draws W_o i.i.d. standard normal and scales it to unit Euclidean norm.
UnknownSystem gen_unknown_system(std::size_t length, Rng& rng, double process_noise_std = 0.0);
UnknownSystem gen_unknown_system(std::size_t length, std::uint64_t seed, double process_noise_std = 0.0);

/// W_o(i) = W_o(i-1) + p(i), p(i) ~ N(0, sigma_p^2 I).
UnknownSystem random_walk_step(const UnknownSystem& system, Rng& rng);

enum class RegressorKind { white, diagonal, correlated };

/// Per-node input statistics. All variances strictly positive.
class RegressorProfile {
public:
    /// x ~ N(0, variance * I).
    static RegressorProfile white(double variance, std::size_t length);
    /// Independent coordinates with the given variances.
    static RegressorProfile diagonal(std::vector<double> variances);
    /// Tapped delay line fed by a stationary AR(1) process with unit-lag
    /// correlation `rho` in [0, 1) and marginal variance `variance`.
    static RegressorProfile correlated(double variance, double rho, std::size_t length);

    RegressorKind kind() const noexcept { return kind_; }
    std::size_t length() const noexcept { return variances_.size(); }
    /// Per-coordinate marginal variances (all equal for white/correlated).
    const std::vector<double>& variances() const noexcept { return variances_; }
    double correlation() const noexcept { return rho_; }

    /// R_xx = E[x x^T] for this profile.
    Matrix covariance() const;

private:
    RegressorProfile(RegressorKind kind, std::vector<double> variances, double rho);

    RegressorKind kind_;
    std::vector<double> variances_;
    double rho_ = 0.0;
};

/// Stateful per-node regressor source. Correlated profiles keep one delay
/// line per node; white and diagonal profiles are memoryless.
class RegressorGenerator {
public:
    explicit RegressorGenerator(std::vector<RegressorProfile> profiles);

    std::size_t node_count() const noexcept { return profiles_.size(); }
    const RegressorProfile& profile(std::size_t node) const { return profiles_.at(node); }

    Vector next(std::size_t node, Rng& rng);

private:
    std::vector<RegressorProfile> profiles_;
    std::vector<Vector> delay_lines_;
    std::vector<char> primed_;
};

/// Bernoulli-Gaussian impulse component v = f * g with P(g = 1) = probability
/// and f ~ N(0, variance).
struct ImpulseNoise {
    double probability = 0.0;
    double variance = 0.0;
};

/// Per-node measurement noise: Gaussian background plus optional impulses.
class NoiseModel {
public:
    NoiseModel(std::vector<double> gaussian_variances, std::optional<ImpulseNoise> impulsive = std::nullopt);

    std::size_t node_count() const noexcept { return gaussian_variances_.size(); }
    double gaussian_variance(std::size_t node) const { return gaussian_variances_.at(node); }
    const std::optional<ImpulseNoise>& impulsive() const noexcept { return impulsive_; }

    /// Total noise variance at `node`: sigma_eps^2 + Pr * sigma_f^2.
    double total_variance(std::size_t node) const;

private:
    std::vector<double> gaussian_variances_;
    std::optional<ImpulseNoise> impulsive_;
};

/// Draws eps(i) + f(i) g(i). Always consumes the same number of variates so
/// that realizations stay aligned across impulse settings.
double sample_noise(const NoiseModel& model, std::size_t node, Rng& rng);

/// d = x^T W_o + noise.
double measure(const UnknownSystem& system, const Vector& x, double noise_sample);

}  // namespace dplms
