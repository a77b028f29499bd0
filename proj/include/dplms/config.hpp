#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dplms/analysis.hpp"
#include "dplms/filters.hpp"
#include "dplms/signal.hpp"

namespace dplms {

/// Invalid experiment configuration. `what()` starts with the offending field
/// path, e.g. "topology.probability: must lie in [0, 1]".
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

enum class TopologyKind { random, geometric };

struct TopologySpec {
    TopologyKind kind = TopologyKind::random;
    std::size_t nodes = 20;
    double probability = 0.2;  // random
    double radius = 0.3;       // geometric
    bool regenerate_per_run = false;
};

/// Regressor statistics for all nodes. Explicit variances win over the range;
/// otherwise every per-node (white/correlated) or per-coordinate (diagonal)
/// variance is drawn uniformly from `variance_range` under the master seed.
struct RegressorSpec {
    RegressorKind kind = RegressorKind::white;
    std::optional<std::vector<double>> variances;                // white, correlated
    std::optional<std::vector<std::vector<double>>> diagonal_variances;  // diagonal
    double range_low = 0.5;
    double range_high = 1.5;
    double correlation = 0.0;
};

struct NoiseSpec {
    std::vector<double> gaussian_variance{0.01};  // one value, or one per node
    std::optional<ImpulseNoise> impulse;
};

struct AlgorithmSpec {
    Algorithm algorithm = Algorithm::dplms;
    double mu = 0.6;
};

enum class AdaptationWeights { uniform, identity };

struct BoundSpec {
    std::size_t pilot_iterations = 500;
    AdaptationWeights adaptation_weights = AdaptationWeights::uniform;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::size_t filter_length = 16;
    std::size_t iterations = 4000;
    std::size_t monte_carlo_runs = 60;
    std::size_t workers = 0;  // 0: hardware concurrency
    TopologySpec topology;
    RegressorSpec regressor;
    NoiseSpec noise;
    double process_noise_std = 0.0;
    double initial_variance = 1.0;
    VarianceSign variance_sign = VarianceSign::plus;
    std::vector<AlgorithmSpec> algorithms;
    BoundSpec bound;
    std::string output_dir = "results";

    /// Parsed document, echoed into the manifest.
    nlohmann::json source;
    /// SHA-256 of the exact bytes the config was parsed from.
    std::string source_hash;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(const std::string& bytes);

}  // namespace dplms
