#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dplms/analysis.hpp"
#include "dplms/config.hpp"
#include "dplms/filters.hpp"
#include "dplms/network.hpp"
#include "dplms/signal.hpp"

namespace dplms {

/// Per-node statistics fixed for a whole experiment.
struct ScenarioProfiles {
    std::vector<RegressorProfile> regressors;
    NoiseModel noise;
};

/// Regressor and noise profiles for every node. Range-drawn variances come
/// from the master seed, so they are shared by all Monte Carlo runs.
ScenarioProfiles build_profiles(const ExperimentConfig& config);

/// Topology for run `run_index`; the same graph for every run unless the
/// config asks for per-run regeneration.
NetworkTopology build_topology(const ExperimentConfig& config, std::size_t run_index = 0);

struct AlgorithmCurve {
    Algorithm algorithm;
    double mu = 0.0;
    MsdCurve curve;
};

struct RunResult {
    std::vector<AlgorithmCurve> curves;  // config order
    std::vector<std::uint64_t> run_seeds;
    std::uint64_t master_seed = 0;
    double wall_clock_seconds = 0.0;
    std::string config_hash;
    nlohmann::json topology;  // the shared topology, or run 0's when regenerated
};

/// Observer invoked every time an algorithm consumes one iteration of data.
using DataRecorder = std::function<void(std::size_t run, std::size_t iteration, Algorithm algorithm,
                                        std::span<const NodeSample> data)>;

struct RunOptions {
    std::size_t workers = 0;  // 0: config value, then hardware concurrency
    DataRecorder recorder;    // called from worker threads; must be thread-safe
};

/// Monte Carlo ensemble: every run draws a fresh system and data stream, and
/// all configured algorithms consume the identical realization.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Writes one `msd_<algorithm>.csv` per algorithm plus `manifest.json` into
/// `directory`; returns the paths written.
std::vector<std::filesystem::path> emit_csv(const RunResult& result, const ExperimentConfig& config,
                                            const std::filesystem::path& directory);

std::string csv_file_name(Algorithm algorithm);

/// Build version, `git describe` style.
std::string version_string();

struct BoundReport {
    std::vector<double> alphas;  // per-node pilot average
    double mu_max_per_node = 0.0;
    double mu_max_literal = 0.0;
    double spectral_radius_at_mu = 0.0;  // rho(B) at the first DPLMS mu
    bool spectral_radius_dense = false;  // power iteration stalled; value from a dense eigensolver
    bool has_dplms = false;
};

/// Runs a DPLMS pilot over `bound.pilot_iterations`, averages alpha_n over the
/// second half, and evaluates the mean-stability bound with it.
BoundReport evaluate_bound(const ExperimentConfig& config);

}  // namespace dplms
