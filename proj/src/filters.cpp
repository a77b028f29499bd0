#include "dplms/filters.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dplms {

namespace {

void require_same_length(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("regressor length does not match filter length");
}

// The counted kernels below tally every scalar multiply, divide (as a
// multiply), add and subtract. implemented_op_counts() mirrors them exactly.

double counted_dot(const Vector& a, const Vector& b, OpCount* counter) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) acc += a[j] * b[j];
    if (counter) {
        counter->multiplications += static_cast<std::uint64_t>(a.size());
        counter->additions += static_cast<std::uint64_t>(a.size() - 1);
    }
    return acc;
}

double counted_error(const NodeFilterState& state, const Vector& x, double d, OpCount* counter) {
    require_same_length(state.weights, x);
    const double e = d - counted_dot(x, state.weights, counter);
    if (counter) counter->additions += 1;
    return e;
}

// phi = W + step * x
Vector counted_axpy(const Vector& w, double step, const Vector& x, OpCount* counter) {
    Vector phi(w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) phi[j] = w[j] + step * x[j];
    if (counter) {
        counter->multiplications += static_cast<std::uint64_t>(w.size());
        counter->additions += static_cast<std::uint64_t>(w.size());
    }
    return phi;
}

struct PlmsUpdate {
    double alpha;
    double variance;
};

// One PLMS variance/step-size update from the regressor energy |x|^2.
PlmsUpdate plms_update(double prior, double process, double observation, double energy, std::size_t length,
                       VarianceSign sign) {
    const double inflated = prior + process;
    const double predictive = sign == VarianceSign::plus ? inflated : prior - process;
    const double denominator = predictive * energy + observation;
    if (!(denominator > 0.0)) throw std::domain_error("PLMS step-size denominator is not positive");
    const double alpha = inflated / denominator;
    const double shrink = 1.0 - alpha * energy / static_cast<double>(length);
    const double updated = shrink * predictive;
    return {alpha, updated > kVarianceFloor ? updated : kVarianceFloor};
}

}  // namespace

std::string_view to_string(VarianceSign sign) {
    return sign == VarianceSign::plus ? "plus" : "paper_minus";
}

VarianceSign variance_sign_from_string(std::string_view name) {
    if (name == "plus") return VarianceSign::plus;
    if (name == "paper_minus") return VarianceSign::paper_minus;
    throw std::invalid_argument("unknown variance sign '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::dplms: return "DPLMS";
        case Algorithm::dlms: return "DLMS";
        case Algorithm::dse_lms: return "DSE-LMS";
    }
    return "?";
}

Algorithm algorithm_from_string(std::string_view name) {
    if (name == "DPLMS") return Algorithm::dplms;
    if (name == "DLMS") return Algorithm::dlms;
    if (name == "DSE-LMS") return Algorithm::dse_lms;
    throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

OpCount& OpCount::operator+=(const OpCount& other) {
    multiplications += other.multiplications;
    additions += other.additions;
    absolutes += other.absolutes;
    signs += other.signs;
    lower_bound = lower_bound || other.lower_bound;
    return *this;
}

OpCount op_counts(std::string_view algorithm, std::size_t filter_length, std::size_t node_count) {
    if (filter_length < 1 || node_count < 1) throw std::invalid_argument("M and N must be >= 1");
    const std::uint64_t m = filter_length;
    const std::uint64_t n = node_count;

    const OpCount combine{n * m, (n - 1) * m, 0, 0, false};
    OpCount total;
    if (algorithm == "DSE-LMS") {
        total = {(2 * m + 1) * n + m, (3 * m - 1) * n, 0, n, false};
    } else if (algorithm == "DRVSSLMS") {
        // Two adaptation rows, both listed as strict lower bounds.
        total = {2 * ((3 * m + 1) * n + m), 2 * (3 * m - 1) * n, 0, n, true};
    } else if (algorithm == "DLLAD") {
        total = {2 * m * n + m, (3 * m - 1) * n, n, 0, false};
    } else if (algorithm == "DPLMS") {
        total = {2 * m * n + m, (3 * m - 1) * n, 0, 0, false};
    } else {
        throw std::invalid_argument("unknown algorithm '" + std::string(algorithm) + "'");
    }
    total += combine;
    return total;
}

OpCount implemented_op_counts(Algorithm algorithm, std::size_t filter_length, const CombinationMatrix& combination,
                              VarianceSign sign) {
    if (filter_length < 1) throw std::invalid_argument("M must be >= 1");
    const std::uint64_t m = filter_length;
    const std::uint64_t n = combination.size();

    // Error e = d - x^T W: M multiplies, M additions.
    OpCount per_node{m, m, 0, 0, false};
    switch (algorithm) {
        case Algorithm::dlms:
            per_node += {m + 1, m, 0, 0, false};  // mu * e, then axpy
            break;
        case Algorithm::dse_lms:
            per_node += {m + 1, m, 0, 1, false};  // sign(e), mu * sign, axpy
            break;
        case Algorithm::dplms:
            // |x|^2; alpha and variance (4 mul, 1 div, 3 adds); mu * alpha * e;
            // axpy. The minus variant forms s - sp separately.
            per_node += {m, m - 1, 0, 0, false};
            per_node += {5, 3, 0, 0, false};
            per_node += {2, 0, 0, 0, false};
            per_node += {m, m, 0, 0, false};
            if (sign == VarianceSign::paper_minus) per_node.additions += 1;
            break;
    }

    OpCount total;
    for (std::uint64_t k = 0; k < n; ++k) total += per_node;
    for (std::size_t node = 0; node < n; ++node) {
        const std::uint64_t terms = combination.support(node).size();
        total.multiplications += terms * m;
        total.additions += (terms - 1) * m;
    }
    return total;
}

NodeFilterState::NodeFilterState(std::size_t filter_length, double initial_variance, PlmsParams p)
    : weights(Vector::Zero(static_cast<Eigen::Index>(filter_length))),
      intermediate(Vector::Zero(static_cast<Eigen::Index>(filter_length))),
      posterior_variance(initial_variance),
      params(p) {
    if (filter_length == 0) throw std::invalid_argument("filter length must be >= 1");
    if (!(initial_variance > 0.0)) throw std::invalid_argument("initial posterior variance must be positive");
    if (!(p.process_noise_variance >= 0.0) || !(p.observation_noise_variance >= 0.0))
        throw std::invalid_argument("noise variances must be >= 0");
}

double plms_alpha(double prior_variance, double process_noise_variance, double observation_noise_variance,
                  const Vector& x, VarianceSign sign) {
    const auto length = static_cast<std::size_t>(x.size() > 0 ? x.size() : 1);
    return plms_update(prior_variance, process_noise_variance, observation_noise_variance, x.squaredNorm(), length,
                       sign)
        .alpha;
}

double plms_variance_update(double prior_variance, double process_noise_variance, double alpha, const Vector& x,
                            std::size_t length, VarianceSign sign) {
    if (length == 0) throw std::invalid_argument("length must be >= 1");
    const double energy = x.squaredNorm();
    const double predictive =
        sign == VarianceSign::plus ? prior_variance + process_noise_variance : prior_variance - process_noise_variance;
    const double updated = (1.0 - alpha * energy / static_cast<double>(length)) * predictive;
    return updated > kVarianceFloor ? updated : kVarianceFloor;
}

NodeFilterState plms_step(const NodeFilterState& state, const Vector& x, double d, double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
    NodeFilterState next = state;
    next.weights = dplms_adapt(next, x, d, tau);
    next.intermediate = next.weights;
    return next;
}

Vector dplms_adapt(NodeFilterState& state, const Vector& x, double d, double mu, OpCount* counter) {
    if (!(mu >= 0.0)) throw std::invalid_argument("step size must be >= 0");
    const double e = counted_error(state, x, d, counter);
    const auto& p = state.params;

    double alpha = 0.0;
    if (p.frozen_alpha) {
        alpha = *p.frozen_alpha;
    } else {
        const double energy = counted_dot(x, x, counter);
        const double prior = state.posterior_variance;
        const auto update = plms_update(prior, p.process_noise_variance, p.observation_noise_variance, energy,
                                        static_cast<std::size_t>(x.size()), p.variance_sign);
        alpha = update.alpha;
        state.posterior_variance = update.variance;
        if (counter) {
            counter->multiplications += 5;
            counter->additions += 3;
            if (p.variance_sign == VarianceSign::paper_minus) counter->additions += 1;
        }
    }
    state.last_alpha = alpha;

    const double step = mu * alpha * e;
    if (counter) counter->multiplications += 2;
    return counted_axpy(state.weights, step, x, counter);
}

Vector dlms_adapt(const NodeFilterState& state, const Vector& x, double d, double mu, OpCount* counter) {
    if (!(mu >= 0.0)) throw std::invalid_argument("step size must be >= 0");
    const double e = counted_error(state, x, d, counter);
    const double step = mu * e;
    if (counter) counter->multiplications += 1;
    return counted_axpy(state.weights, step, x, counter);
}

Vector dse_lms_adapt(const NodeFilterState& state, const Vector& x, double d, double mu, OpCount* counter) {
    if (!(mu >= 0.0)) throw std::invalid_argument("step size must be >= 0");
    const double e = counted_error(state, x, d, counter);
    const double s = static_cast<double>((e > 0.0) - (e < 0.0));
    const double step = mu * s;
    if (counter) {
        counter->signs += 1;
        counter->multiplications += 1;
    }
    return counted_axpy(state.weights, step, x, counter);
}

Vector diffusion_combine(std::span<const Vector> intermediates, const CombinationMatrix& combination,
                         std::size_t node, OpCount* counter) {
    if (intermediates.size() != combination.size())
        throw std::invalid_argument("intermediate count does not match combination matrix");
    const auto& support = combination.support(node);
    const auto& first = intermediates[support.front()];
    Vector w = combination(support.front(), node) * first;
    for (std::size_t k = 1; k < support.size(); ++k) {
        const auto l = support[k];
        require_same_length(first, intermediates[l]);
        const double a = combination(l, node);
        for (Eigen::Index j = 0; j < w.size(); ++j) w[j] += a * intermediates[l][j];
    }
    if (counter) {
        counter->multiplications += support.size() * static_cast<std::uint64_t>(w.size());
        counter->additions += (support.size() - 1) * static_cast<std::uint64_t>(w.size());
    }
    return w;
}

void run_network_iteration(std::span<NodeFilterState> states, Algorithm algorithm,
                           const CombinationMatrix& combination, std::span<const NodeSample> data, double mu,
                           OpCount* counter) {
    const auto n = states.size();
    if (data.size() != n || combination.size() != n)
        throw std::invalid_argument("states, data and combination matrix disagree on node count");

    std::vector<Vector> phi(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto& s = states[k];
        switch (algorithm) {
            case Algorithm::dplms: phi[k] = dplms_adapt(s, data[k].x, data[k].d, mu, counter); break;
            case Algorithm::dlms: phi[k] = dlms_adapt(s, data[k].x, data[k].d, mu, counter); break;
            case Algorithm::dse_lms: phi[k] = dse_lms_adapt(s, data[k].x, data[k].d, mu, counter); break;
        }
    }
    // Barrier: combination reads only completed intermediates.
    for (std::size_t k = 0; k < n; ++k) states[k].weights = diffusion_combine(phi, combination, k, counter);
    for (std::size_t k = 0; k < n; ++k) states[k].intermediate = std::move(phi[k]);
}

}  // namespace dplms
