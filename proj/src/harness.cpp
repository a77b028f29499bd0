#include "dplms/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <Eigen/Eigenvalues>

#include "dplms/random.hpp"

#ifndef DPLMS_VERSION
#define DPLMS_VERSION "unknown"
#endif

namespace dplms {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> draw_range(Rng& rng, std::size_t count, double low, double high) {
    std::uniform_real_distribution<double> dist(low, high);
    std::vector<double> out(count);
    for (auto& v : out) v = low == high ? low : dist(rng);
    return out;
}

std::vector<NodeFilterState> initial_states(const ExperimentConfig& config, const NoiseModel& noise) {
    std::vector<NodeFilterState> states;
    states.reserve(config.topology.nodes);
    for (std::size_t n = 0; n < config.topology.nodes; ++n) {
        PlmsParams params;
        params.process_noise_variance = config.process_noise_std * config.process_noise_std;
        params.observation_noise_variance = noise.gaussian_variance(n);
        params.variance_sign = config.variance_sign;
        states.emplace_back(config.filter_length, config.initial_variance, params);
    }
    return states;
}

/// Draws one iteration of network data and advances the system.
class DataStream {
public:
    DataStream(const ExperimentConfig& config, const ScenarioProfiles& profiles, std::uint64_t seed)
        : rng_(seed),
          system_(gen_unknown_system(config.filter_length, rng_, config.process_noise_std)),
          regressors_(profiles.regressors),
          noise_(profiles.noise),
          samples_(config.topology.nodes) {}

    const UnknownSystem& system() const noexcept { return system_; }

    std::span<const NodeSample> next() {
        system_ = random_walk_step(system_, rng_);
        for (std::size_t n = 0; n < samples_.size(); ++n) {
            samples_[n].x = regressors_.next(n, rng_);
            samples_[n].d = measure(system_, samples_[n].x, sample_noise(noise_, n, rng_));
        }
        return samples_;
    }

private:
    Rng rng_;
    UnknownSystem system_;
    RegressorGenerator regressors_;
    const NoiseModel& noise_;
    std::vector<NodeSample> samples_;
};

struct SingleRun {
    std::vector<std::vector<double>> msd;  // [algorithm][iteration]
    double initial = 0.0;
};

SingleRun simulate_run(const ExperimentConfig& config, const ScenarioProfiles& profiles,
                       const CombinationMatrix& combination, std::size_t run, std::uint64_t seed,
                       const DataRecorder& recorder) {
    DataStream stream(config, profiles, seed);
    const auto algorithms = config.algorithms.size();

    std::vector<std::vector<NodeFilterState>> states(algorithms, initial_states(config, profiles.noise));
    std::vector<char> diverged(algorithms, 0);

    SingleRun out;
    out.msd.assign(algorithms, std::vector<double>(config.iterations, 0.0));
    out.initial = stream.system().weights.squaredNorm();

    for (std::size_t i = 0; i < config.iterations; ++i) {
        const auto data = stream.next();
        const auto& truth = stream.system().weights;
        for (std::size_t a = 0; a < algorithms; ++a) {
            const auto& spec = config.algorithms[a];
            if (!diverged[a]) {
                if (recorder) recorder(run, i, spec.algorithm, data);
                run_network_iteration(states[a], spec.algorithm, combination, data, spec.mu);
                const double value = msd(truth, std::span<const NodeFilterState>(states[a]));
                if (std::isfinite(value)) {
                    out.msd[a][i] = value;
                    continue;
                }
                diverged[a] = 1;
            }
            out.msd[a][i] = kInf;
        }
    }
    return out;
}

}  // namespace

ScenarioProfiles build_profiles(const ExperimentConfig& config) {
    const auto nodes = config.topology.nodes;
    const auto m = config.filter_length;
    const auto& spec = config.regressor;
    Rng rng(derive_seed(config.seed, Stream::profiles));

    std::vector<RegressorProfile> regressors;
    regressors.reserve(nodes);
    if (spec.kind == RegressorKind::diagonal) {
        for (std::size_t n = 0; n < nodes; ++n) {
            auto variances = spec.diagonal_variances ? (*spec.diagonal_variances)[n]
                                                     : draw_range(rng, m, spec.range_low, spec.range_high);
            regressors.push_back(RegressorProfile::diagonal(std::move(variances)));
        }
    } else {
        const auto variances = spec.variances ? *spec.variances : draw_range(rng, nodes, spec.range_low, spec.range_high);
        for (std::size_t n = 0; n < nodes; ++n) {
            regressors.push_back(spec.kind == RegressorKind::white
                                     ? RegressorProfile::white(variances[n], m)
                                     : RegressorProfile::correlated(variances[n], spec.correlation, m));
        }
    }

    auto gaussian = config.noise.gaussian_variance;
    if (gaussian.size() == 1) gaussian.assign(nodes, gaussian.front());
    return {std::move(regressors), NoiseModel(std::move(gaussian), config.noise.impulse)};
}

NetworkTopology build_topology(const ExperimentConfig& config, std::size_t run_index) {
    const auto& spec = config.topology;
    const auto seed = derive_seed(config.seed, Stream::topology, spec.regenerate_per_run ? run_index : 0);
    return spec.kind == TopologyKind::random ? gen_random_topology(spec.nodes, spec.probability, seed)
                                             : gen_geometric_topology(spec.nodes, spec.radius, seed);
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const auto runs = config.monte_carlo_runs;
    const auto algorithms = config.algorithms.size();
    if (runs == 0 || config.iterations == 0 || algorithms == 0)
        throw ConfigError("", "runs, iterations and algorithms must all be non-empty");

    const auto profiles = build_profiles(config);
    const auto shared_topology = build_topology(config);

    RunResult result;
    result.master_seed = config.seed;
    result.config_hash = config.source_hash;
    result.topology = shared_topology.to_json();
    result.run_seeds.resize(runs);
    for (std::size_t r = 0; r < runs; ++r) result.run_seeds[r] = derive_seed(config.seed, Stream::run, r);

    std::vector<SingleRun> per_run(runs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&] {
        for (;;) {
            const auto r = next.fetch_add(1);
            if (r >= runs) return;
            try {
                const auto topology = config.topology.regenerate_per_run ? build_topology(config, r) : shared_topology;
                const auto combination = uniform_combination(topology);
                per_run[r] = simulate_run(config, profiles, combination, r, result.run_seeds[r], options.recorder);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(runs);
                return;
            }
        }
    };

    std::size_t workers = options.workers ? options.workers : config.workers;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, runs);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    // Reduction in run-index order keeps the sums independent of scheduling.
    const double scale = 1.0 / static_cast<double>(runs);
    for (std::size_t a = 0; a < algorithms; ++a) {
        AlgorithmCurve entry{config.algorithms[a].algorithm, config.algorithms[a].mu, {}};
        entry.curve.linear.assign(config.iterations, 0.0);
        for (std::size_t r = 0; r < runs; ++r) {
            entry.curve.initial += per_run[r].initial;
            const auto& trace = per_run[r].msd[a];
            for (std::size_t i = 0; i < config.iterations; ++i) entry.curve.linear[i] += trace[i];
        }
        entry.curve.initial *= scale;
        for (auto& v : entry.curve.linear) v *= scale;
        result.curves.push_back(std::move(entry));
    }

    result.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::string csv_file_name(Algorithm algorithm) {
    std::string name(to_string(algorithm));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) {
        return c == '-' ? '_' : static_cast<char>(std::tolower(c));
    });
    return "msd_" + name + ".csv";
}

std::string version_string() { return DPLMS_VERSION; }

std::vector<std::filesystem::path> emit_csv(const RunResult& result, const ExperimentConfig& config,
                                            const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    std::vector<std::filesystem::path> written;

    nlohmann::json manifest;
    manifest["version"] = version_string();
    manifest["config_hash"] = result.config_hash;
    manifest["config"] = config.source;
    manifest["master_seed"] = result.master_seed;
    manifest["run_seeds"] = result.run_seeds;
    manifest["iterations"] = config.iterations;
    manifest["monte_carlo_runs"] = config.monte_carlo_runs;
    manifest["wall_clock_seconds"] = result.wall_clock_seconds;
    manifest["topology"] = result.topology;
    auto curves = nlohmann::json::array();

    for (const auto& entry : result.curves) {
        const auto path = directory / csv_file_name(entry.algorithm);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        write_msd_csv(out, entry.curve);
        out.close();
        if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
        written.push_back(path);

        nlohmann::json c;
        c["algorithm"] = std::string(to_string(entry.algorithm));
        c["mu"] = entry.mu;
        c["csv"] = path.filename().string();
        c["initial_msd"] = entry.curve.initial;
        const double last = entry.curve.linear.back();
        c["final_msd_db"] = std::isfinite(last) ? nlohmann::json(to_db(last)) : nlohmann::json("inf");
        curves.push_back(std::move(c));
    }
    manifest["curves"] = std::move(curves);

    const auto manifest_path = directory / "manifest.json";
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + manifest_path.string() + "'");
    out << manifest.dump(2) << '\n';
    out.close();
    if (!out) throw std::runtime_error("failed writing '" + manifest_path.string() + "'");
    written.push_back(manifest_path);
    return written;
}

BoundReport evaluate_bound(const ExperimentConfig& config) {
    const auto profiles = build_profiles(config);
    const auto topology = build_topology(config);
    const auto combination = uniform_combination(topology);
    const auto nodes = config.topology.nodes;

    BoundReport report;
    double mu = 1.0;
    for (const auto& spec : config.algorithms) {
        if (spec.algorithm == Algorithm::dplms) {
            report.has_dplms = true;
            mu = spec.mu;
            break;
        }
    }

    DataStream stream(config, profiles, derive_seed(config.seed, Stream::pilot));
    auto states = initial_states(config, profiles.noise);
    const auto pilot = config.bound.pilot_iterations;
    const auto warmup = pilot / 2;
    report.alphas.assign(nodes, 0.0);
    for (std::size_t i = 0; i < pilot; ++i) {
        run_network_iteration(states, Algorithm::dplms, combination, stream.next(), mu);
        if (i >= warmup) {
            for (std::size_t n = 0; n < nodes; ++n) report.alphas[n] += states[n].last_alpha;
        }
    }
    for (auto& a : report.alphas) a /= static_cast<double>(pilot - warmup);

    std::vector<Matrix> covariances;
    for (const auto& p : profiles.regressors) covariances.push_back(p.covariance());
    const Eigen::MatrixXd adaptation =
        config.bound.adaptation_weights == AdaptationWeights::uniform
            ? combination.matrix()
            : Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(nodes));

    report.mu_max_per_node = stability_bound(report.alphas, adaptation, covariances, BoundVariant::per_node);
    report.mu_max_literal = stability_bound(report.alphas, adaptation, covariances, BoundVariant::literal_diagonal);

    if (report.has_dplms) {
        MeanRecursionModel model{combination.matrix(), adaptation, report.alphas, covariances, mu};
        try {
            report.spectral_radius_at_mu = spectral_radius(mean_error_matrix(model));
        } catch (const ConvergenceError&) {
            // Clustered eigenvalues near 1 stall the power iteration.
            const Matrix b = mean_error_matrix(model);
            report.spectral_radius_at_mu = Eigen::EigenSolver<Matrix>(b, false).eigenvalues().cwiseAbs().maxCoeff();
            report.spectral_radius_dense = true;
        }
    }
    return report;
}

}  // namespace dplms
