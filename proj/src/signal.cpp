#include "dplms/signal.hpp"

#include <cmath>
#include <stdexcept>

namespace dplms {

namespace {

double standard_normal(Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

void require_positive_variance(double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("regressor variances must be positive");
}

}  // namespace

UnknownSystem gen_unknown_system(std::size_t length, Rng& rng, double process_noise_std) {
    if (length == 0) throw std::invalid_argument("system length must be >= 1");
    if (!(process_noise_std >= 0.0)) throw std::invalid_argument("process noise std must be >= 0");
    Vector w(static_cast<Eigen::Index>(length));
    // Redraw the (measure-zero) all-zero vector so normalization is defined.
    do {
        for (auto& c : w) c = standard_normal(rng);
    } while (w.squaredNorm() == 0.0);
    w /= w.norm();
    return {std::move(w), process_noise_std};
}

UnknownSystem gen_unknown_system(std::size_t length, std::uint64_t seed, double process_noise_std) {
    Rng rng(seed);
    return gen_unknown_system(length, rng, process_noise_std);
}

UnknownSystem random_walk_step(const UnknownSystem& system, Rng& rng) {
    UnknownSystem next = system;
    if (system.process_noise_std == 0.0) return next;
    for (auto& c : next.weights) c += system.process_noise_std * standard_normal(rng);
    return next;
}

RegressorProfile::RegressorProfile(RegressorKind kind, std::vector<double> variances, double rho)
    : kind_(kind), variances_(std::move(variances)), rho_(rho) {
    if (variances_.empty()) throw std::invalid_argument("regressor length must be >= 1");
    for (double v : variances_) require_positive_variance(v);
    if (!(rho_ >= 0.0 && rho_ < 1.0)) throw std::invalid_argument("correlation must lie in [0, 1)");
}

RegressorProfile RegressorProfile::white(double variance, std::size_t length) {
    return {RegressorKind::white, std::vector<double>(length, variance), 0.0};
}

RegressorProfile RegressorProfile::diagonal(std::vector<double> variances) {
    return {RegressorKind::diagonal, std::move(variances), 0.0};
}

RegressorProfile RegressorProfile::correlated(double variance, double rho, std::size_t length) {
    return {RegressorKind::correlated, std::vector<double>(length, variance), rho};
}

Matrix RegressorProfile::covariance() const {
    const auto m = static_cast<Eigen::Index>(length());
    Matrix r = Matrix::Zero(m, m);
    if (kind_ == RegressorKind::correlated) {
        const double var = variances_.front();
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index k = 0; k < m; ++k)
                r(j, k) = var * std::pow(rho_, static_cast<double>(std::abs(j - k)));
    } else {
        for (Eigen::Index j = 0; j < m; ++j) r(j, j) = variances_[static_cast<std::size_t>(j)];
    }
    return r;
}

RegressorGenerator::RegressorGenerator(std::vector<RegressorProfile> profiles)
    : profiles_(std::move(profiles)), delay_lines_(profiles_.size()), primed_(profiles_.size(), 0) {
    if (profiles_.empty()) throw std::invalid_argument("regressor generator needs at least one node");
    for (const auto& p : profiles_) {
        if (p.length() != profiles_.front().length())
            throw std::invalid_argument("all nodes must share the regressor length");
    }
}

Vector RegressorGenerator::next(std::size_t node, Rng& rng) {
    const auto& profile = profiles_.at(node);
    const auto m = static_cast<Eigen::Index>(profile.length());
    const auto& var = profile.variances();

    if (profile.kind() != RegressorKind::correlated) {
        Vector x(m);
        for (Eigen::Index j = 0; j < m; ++j) x[j] = std::sqrt(var[static_cast<std::size_t>(j)]) * standard_normal(rng);
        return x;
    }

    // x(i) = rho x(i-1) + sqrt(1 - rho^2) sigma n(i); newest sample at index 0.
    const double sigma = std::sqrt(var.front());
    const double rho = profile.correlation();
    const double innovation = std::sqrt(1.0 - rho * rho) * sigma;
    auto& line = delay_lines_[node];
    if (!primed_[node]) {
        line.resize(m);
        line[m - 1] = sigma * standard_normal(rng);
        for (Eigen::Index j = m - 2; j >= 0; --j) line[j] = rho * line[j + 1] + innovation * standard_normal(rng);
        primed_[node] = 1;
        return line;
    }
    for (Eigen::Index j = m - 1; j > 0; --j) line[j] = line[j - 1];
    line[0] = rho * line[1 < m ? 1 : 0] + innovation * standard_normal(rng);
    return line;
}

NoiseModel::NoiseModel(std::vector<double> gaussian_variances, std::optional<ImpulseNoise> impulsive)
    : gaussian_variances_(std::move(gaussian_variances)), impulsive_(impulsive) {
    if (gaussian_variances_.empty()) throw std::invalid_argument("noise model needs at least one node");
    for (double v : gaussian_variances_) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("gaussian noise variance must be >= 0");
    }
    if (impulsive_) {
        if (!(impulsive_->probability >= 0.0 && impulsive_->probability <= 1.0))
            throw std::invalid_argument("impulse probability must lie in [0, 1]");
        if (!(impulsive_->variance > 0.0) || !std::isfinite(impulsive_->variance))
            throw std::invalid_argument("impulse variance must be positive");
    }
}

double NoiseModel::total_variance(std::size_t node) const {
    double v = gaussian_variance(node);
    if (impulsive_) v += impulsive_->probability * impulsive_->variance;
    return v;
}

double sample_noise(const NoiseModel& model, std::size_t node, Rng& rng) {
    double value = std::sqrt(model.gaussian_variance(node)) * standard_normal(rng);
    if (const auto& imp = model.impulsive()) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const bool fires = unit(rng) < imp->probability;
        const double amplitude = std::sqrt(imp->variance) * standard_normal(rng);
        if (fires) value += amplitude;
    }
    return value;
}

double measure(const UnknownSystem& system, const Vector& x, double noise_sample) {
    if (x.size() != system.weights.size()) throw std::invalid_argument("regressor length does not match system");
    return x.dot(system.weights) + noise_sample;
}

}  // namespace dplms
