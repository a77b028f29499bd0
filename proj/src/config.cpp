#include "dplms/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

namespace dplms {

namespace {

using nlohmann::json;

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

std::string index_path(const std::string& parent, std::size_t i) {
    return parent + "[" + std::to_string(i) + "]";
}

void require_object(const json& node, const std::string& path) {
    if (!node.is_object()) throw ConfigError(path, "must be an object");
}

void reject_unknown_keys(const json& node, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : node.items()) {
        if (!keys.contains(key)) throw ConfigError(join(path, key), "unknown field");
    }
}

double get_number(const json& node, const std::string& path) {
    if (!node.is_number()) throw ConfigError(path, "must be a number");
    const double v = node.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

std::uint64_t get_unsigned(const json& node, const std::string& path) {
    if (!node.is_number_unsigned() && !(node.is_number_integer() && node.get<std::int64_t>() >= 0))
        throw ConfigError(path, "must be a nonnegative integer");
    return node.get<std::uint64_t>();
}

std::size_t get_positive(const json& node, const std::string& path) {
    const auto v = get_unsigned(node, path);
    if (v == 0) throw ConfigError(path, "must be >= 1");
    return static_cast<std::size_t>(v);
}

std::string get_string(const json& node, const std::string& path) {
    if (!node.is_string()) throw ConfigError(path, "must be a string");
    return node.get<std::string>();
}

std::vector<double> get_number_array(const json& node, const std::string& path) {
    if (!node.is_array()) throw ConfigError(path, "must be an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(get_number(node[i], index_path(path, i)));
    return out;
}

TopologySpec parse_topology(const json& node, const std::string& path) {
    require_object(node, path);
    reject_unknown_keys(node, path, {"kind", "nodes", "probability", "radius", "regenerate_per_run"});
    TopologySpec spec;
    if (!node.contains("kind")) throw ConfigError(join(path, "kind"), "is required");
    const auto kind = get_string(node["kind"], join(path, "kind"));
    if (kind == "random") {
        spec.kind = TopologyKind::random;
    } else if (kind == "geometric") {
        spec.kind = TopologyKind::geometric;
    } else {
        throw ConfigError(join(path, "kind"), "must be \"random\" or \"geometric\"");
    }
    if (node.contains("nodes")) {
        spec.nodes = get_positive(node["nodes"], join(path, "nodes"));
        if (spec.nodes < 2) throw ConfigError(join(path, "nodes"), "must be >= 2");
    }
    if (node.contains("probability")) {
        spec.probability = get_number(node["probability"], join(path, "probability"));
        if (spec.probability < 0.0 || spec.probability > 1.0)
            throw ConfigError(join(path, "probability"), "must lie in [0, 1]");
    }
    if (node.contains("radius")) {
        spec.radius = get_number(node["radius"], join(path, "radius"));
        if (!(spec.radius > 0.0)) throw ConfigError(join(path, "radius"), "must be > 0");
    }
    if (node.contains("regenerate_per_run")) {
        if (!node["regenerate_per_run"].is_boolean())
            throw ConfigError(join(path, "regenerate_per_run"), "must be a boolean");
        spec.regenerate_per_run = node["regenerate_per_run"].get<bool>();
    }
    return spec;
}

RegressorSpec parse_regressor(const json& node, const std::string& path, std::size_t nodes, std::size_t length) {
    require_object(node, path);
    reject_unknown_keys(node, path, {"kind", "variances", "variance_range", "correlation"});
    RegressorSpec spec;
    if (node.contains("kind")) {
        const auto kind = get_string(node["kind"], join(path, "kind"));
        if (kind == "white") {
            spec.kind = RegressorKind::white;
        } else if (kind == "diagonal") {
            spec.kind = RegressorKind::diagonal;
        } else if (kind == "correlated") {
            spec.kind = RegressorKind::correlated;
        } else {
            throw ConfigError(join(path, "kind"), "must be \"white\", \"diagonal\" or \"correlated\"");
        }
    }
    if (node.contains("variance_range")) {
        const auto p = join(path, "variance_range");
        const auto range = get_number_array(node["variance_range"], p);
        if (range.size() != 2) throw ConfigError(p, "must be [low, high]");
        if (!(range[0] > 0.0) || range[1] < range[0]) throw ConfigError(p, "must satisfy 0 < low <= high");
        spec.range_low = range[0];
        spec.range_high = range[1];
    }
    if (node.contains("variances")) {
        const auto p = join(path, "variances");
        const auto& v = node["variances"];
        if (!v.is_array() || v.size() != nodes) throw ConfigError(p, "must have one entry per node");
        if (spec.kind == RegressorKind::diagonal) {
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < v.size(); ++i) {
                auto row = get_number_array(v[i], index_path(p, i));
                if (row.size() != length) throw ConfigError(index_path(p, i), "must have filter_length entries");
                for (std::size_t j = 0; j < row.size(); ++j) {
                    if (!(row[j] > 0.0)) throw ConfigError(index_path(index_path(p, i), j), "must be > 0");
                }
                rows.push_back(std::move(row));
            }
            spec.diagonal_variances = std::move(rows);
        } else {
            auto values = get_number_array(v, p);
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (!(values[i] > 0.0)) throw ConfigError(index_path(p, i), "must be > 0");
            }
            spec.variances = std::move(values);
        }
    }
    if (node.contains("correlation")) {
        const auto p = join(path, "correlation");
        if (spec.kind != RegressorKind::correlated) throw ConfigError(p, "only valid for kind \"correlated\"");
        spec.correlation = get_number(node["correlation"], p);
        if (spec.correlation < 0.0 || spec.correlation >= 1.0) throw ConfigError(p, "must lie in [0, 1)");
    }
    return spec;
}

NoiseSpec parse_noise(const json& node, const std::string& path, std::size_t nodes) {
    require_object(node, path);
    reject_unknown_keys(node, path, {"gaussian_variance", "impulse"});
    NoiseSpec spec;
    if (node.contains("gaussian_variance")) {
        const auto p = join(path, "gaussian_variance");
        const auto& v = node["gaussian_variance"];
        if (v.is_array()) {
            spec.gaussian_variance = get_number_array(v, p);
            if (spec.gaussian_variance.size() != nodes) throw ConfigError(p, "must have one entry per node");
        } else {
            spec.gaussian_variance = {get_number(v, p)};
        }
        for (double g : spec.gaussian_variance) {
            if (g < 0.0) throw ConfigError(p, "must be >= 0");
        }
    }
    if (node.contains("impulse") && !node["impulse"].is_null()) {
        const auto p = join(path, "impulse");
        const auto& imp = node["impulse"];
        require_object(imp, p);
        reject_unknown_keys(imp, p, {"probability", "variance"});
        if (!imp.contains("probability")) throw ConfigError(join(p, "probability"), "is required");
        if (!imp.contains("variance")) throw ConfigError(join(p, "variance"), "is required");
        ImpulseNoise noise;
        noise.probability = get_number(imp["probability"], join(p, "probability"));
        noise.variance = get_number(imp["variance"], join(p, "variance"));
        if (noise.probability < 0.0 || noise.probability > 1.0)
            throw ConfigError(join(p, "probability"), "must lie in [0, 1]");
        if (!(noise.variance > 0.0)) throw ConfigError(join(p, "variance"), "must be > 0");
        spec.impulse = noise;
    }
    return spec;
}

std::vector<AlgorithmSpec> parse_algorithms(const json& node, const std::string& path) {
    if (!node.is_array() || node.empty()) throw ConfigError(path, "must be a non-empty array");
    std::vector<AlgorithmSpec> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < node.size(); ++i) {
        const auto p = index_path(path, i);
        const auto& entry = node[i];
        require_object(entry, p);
        reject_unknown_keys(entry, p, {"name", "mu"});
        if (!entry.contains("name")) throw ConfigError(join(p, "name"), "is required");
        if (!entry.contains("mu")) throw ConfigError(join(p, "mu"), "is required");
        const auto name = get_string(entry["name"], join(p, "name"));
        AlgorithmSpec spec;
        try {
            spec.algorithm = algorithm_from_string(name);
        } catch (const std::invalid_argument&) {
            throw ConfigError(join(p, "name"), "must be one of DPLMS, DLMS, DSE-LMS");
        }
        if (!seen.insert(name).second) throw ConfigError(join(p, "name"), "listed twice");
        spec.mu = get_number(entry["mu"], join(p, "mu"));
        if (!(spec.mu > 0.0)) throw ConfigError(join(p, "mu"), "must be > 0");
        out.push_back(spec);
    }
    return out;
}

BoundSpec parse_bound(const json& node, const std::string& path) {
    require_object(node, path);
    reject_unknown_keys(node, path, {"pilot_iterations", "adaptation_weights"});
    BoundSpec spec;
    if (node.contains("pilot_iterations"))
        spec.pilot_iterations = get_positive(node["pilot_iterations"], join(path, "pilot_iterations"));
    if (node.contains("adaptation_weights")) {
        const auto p = join(path, "adaptation_weights");
        const auto v = get_string(node["adaptation_weights"], p);
        if (v == "uniform") {
            spec.adaptation_weights = AdaptationWeights::uniform;
        } else if (v == "identity") {
            spec.adaptation_weights = AdaptationWeights::identity;
        } else {
            throw ConfigError(p, "must be \"uniform\" or \"identity\"");
        }
    }
    return spec;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    require_object(doc, "<root>");
    reject_unknown_keys(doc, "",
                        {"$schema", "description", "seed", "filter_length", "iterations", "monte_carlo_runs",
                         "workers", "topology", "regressor", "noise", "system", "plms", "algorithms", "bound",
                         "output_dir"});

    ExperimentConfig cfg;
    if (doc.contains("seed")) cfg.seed = get_unsigned(doc["seed"], "seed");
    if (doc.contains("filter_length")) cfg.filter_length = get_positive(doc["filter_length"], "filter_length");
    if (doc.contains("iterations")) cfg.iterations = get_positive(doc["iterations"], "iterations");
    if (doc.contains("monte_carlo_runs"))
        cfg.monte_carlo_runs = get_positive(doc["monte_carlo_runs"], "monte_carlo_runs");
    if (doc.contains("workers")) cfg.workers = static_cast<std::size_t>(get_unsigned(doc["workers"], "workers"));

    if (!doc.contains("topology")) throw ConfigError("topology", "is required");
    cfg.topology = parse_topology(doc["topology"], "topology");

    if (doc.contains("regressor"))
        cfg.regressor = parse_regressor(doc["regressor"], "regressor", cfg.topology.nodes, cfg.filter_length);
    if (doc.contains("noise")) cfg.noise = parse_noise(doc["noise"], "noise", cfg.topology.nodes);

    if (doc.contains("system")) {
        const auto& sys = doc["system"];
        require_object(sys, "system");
        reject_unknown_keys(sys, "system", {"process_noise_std"});
        if (sys.contains("process_noise_std")) {
            cfg.process_noise_std = get_number(sys["process_noise_std"], "system.process_noise_std");
            if (cfg.process_noise_std < 0.0) throw ConfigError("system.process_noise_std", "must be >= 0");
        }
    }

    if (doc.contains("plms")) {
        const auto& plms = doc["plms"];
        require_object(plms, "plms");
        reject_unknown_keys(plms, "plms", {"initial_variance", "variance_sign"});
        if (plms.contains("initial_variance")) {
            cfg.initial_variance = get_number(plms["initial_variance"], "plms.initial_variance");
            if (!(cfg.initial_variance > 0.0)) throw ConfigError("plms.initial_variance", "must be > 0");
        }
        if (plms.contains("variance_sign")) {
            try {
                cfg.variance_sign = variance_sign_from_string(get_string(plms["variance_sign"], "plms.variance_sign"));
            } catch (const std::invalid_argument&) {
                throw ConfigError("plms.variance_sign", "must be \"plus\" or \"paper_minus\"");
            }
        }
    }

    if (!doc.contains("algorithms")) throw ConfigError("algorithms", "is required");
    cfg.algorithms = parse_algorithms(doc["algorithms"], "algorithms");

    if (doc.contains("bound")) cfg.bound = parse_bound(doc["bound"], "bound");
    if (doc.contains("output_dir")) cfg.output_dir = get_string(doc["output_dir"], "output_dir");

    cfg.source = std::move(doc);
    cfg.source_hash = sha256_hex(text);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "': path not found");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream hex;
    hex << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < length; ++i) hex << std::setw(2) << static_cast<int>(digest[i]);
    return hex.str();
}

}  // namespace dplms
