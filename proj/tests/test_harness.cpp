#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "dplms/harness.hpp"

using namespace dplms;

namespace {

ExperimentConfig small_config(const std::string& extra = "") {
    return parse_config(R"({
        "seed": 7, "filter_length": 4, "iterations": 300, "monte_carlo_runs": 4,
        "topology": {"kind": "random", "nodes": 6, "probability": 0.5},
        "noise": {"gaussian_variance": 0.01, "impulse": {"probability": 0.1, "variance": 0.2}},
        "algorithms": [{"name": "DPLMS", "mu": 0.6}, {"name": "DLMS", "mu": 0.05}, {"name": "DSE-LMS", "mu": 0.01}])" +
                        extra + "}");
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config errors name the offending field") {
    const std::string algs = R"("algorithms": [{"name": "DPLMS", "mu": 0.6}])";
    CHECK(config_error(R"({"topology": {"kind": "random", "probability": 1.5}, )" + algs + "}")
              .starts_with("topology.probability:"));
    CHECK(config_error(R"({"topology": {"kind": "ring"}, )" + algs + "}").starts_with("topology.kind:"));
    CHECK(config_error(R"({"topology": {"kind": "random"}, "bogus": 1, )" + algs + "}").starts_with("bogus:"));
    CHECK(config_error(R"({"topology": {"kind": "random"}, "algorithms": [{"name": "X", "mu": 1}]})")
              .starts_with("algorithms[0].name:"));
    CHECK(config_error(R"({"topology": {"kind": "random"}, "algorithms": [{"name": "DLMS", "mu": -1}]})")
              .starts_with("algorithms[0].mu:"));
    CHECK(config_error(R"({"topology": {"kind": "random", "nodes": 3}, "noise": {"gaussian_variance": [0.1, 0.2]}, )" +
                       algs + "}")
              .starts_with("noise.gaussian_variance:"));
    CHECK(config_error(R"({"topology": {"kind": "random"}, "iterations": 0, )" + algs + "}").starts_with("iterations:"));
    CHECK(config_error("{not json").find("malformed JSON") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/dplms.json"), ConfigError);
}

TEST_CASE("sha256 of known inputs") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("a single iteration gives a finite one-point curve") {
    auto config = small_config();
    config.iterations = 1;
    config.monte_carlo_runs = 2;
    const auto result = run_experiment(config);
    REQUIRE(result.curves.size() == 3);
    for (const auto& entry : result.curves) {
        CHECK(entry.curve.iterations() == 1);
        CHECK(std::isfinite(entry.curve.linear[0]));
        CHECK(entry.curve.initial == doctest::Approx(1.0));
    }
}

TEST_CASE("noise-free DPLMS identifies the system") {
    auto config = parse_config(R"({
        "seed": 3, "filter_length": 8, "iterations": 500, "monte_carlo_runs": 3,
        "topology": {"kind": "random", "nodes": 10, "probability": 0.3},
        "noise": {"gaussian_variance": 0.0},
        "algorithms": [{"name": "DPLMS", "mu": 0.6}]})");
    const auto result = run_experiment(config);
    CHECK(result.curves[0].curve.linear.back() < 1e-4);
}

TEST_CASE("all algorithms consume identical data") {
    auto config = small_config();
    config.iterations = 40;
    std::mutex lock;
    std::map<std::tuple<std::size_t, std::size_t, Algorithm>, std::vector<NodeSample>> seen;
    RunOptions options;
    options.workers = 3;
    options.recorder = [&](std::size_t run, std::size_t iteration, Algorithm alg, std::span<const NodeSample> data) {
        std::lock_guard guard(lock);
        seen[{run, iteration, alg}] = std::vector<NodeSample>(data.begin(), data.end());
    };
    run_experiment(config, options);
    CHECK(seen.size() == 4 * 40 * 3);
    for (std::size_t run = 0; run < 4; ++run) {
        for (std::size_t i = 0; i < 40; ++i) {
            const auto& ref = seen[{run, i, Algorithm::dplms}];
            for (Algorithm alg : {Algorithm::dlms, Algorithm::dse_lms}) {
                const auto& other = seen[{run, i, alg}];
                REQUIRE(other.size() == ref.size());
                for (std::size_t n = 0; n < ref.size(); ++n) {
                    CHECK(other[n].x == ref[n].x);
                    CHECK(other[n].d == ref[n].d);
                }
            }
        }
    }
}

TEST_CASE("results do not depend on the worker count") {
    const auto config = small_config();
    RunOptions one;
    one.workers = 1;
    RunOptions many;
    many.workers = 4;
    const auto a = run_experiment(config, one);
    const auto b = run_experiment(config, many);
    CHECK(a.run_seeds == b.run_seeds);
    for (std::size_t k = 0; k < a.curves.size(); ++k) CHECK(a.curves[k].curve.linear == b.curves[k].curve.linear);
    auto other = config;
    other.seed = 8;
    CHECK(run_experiment(other, one).curves[0].curve.linear != a.curves[0].curve.linear);
}

TEST_CASE("a diverging filter is recorded as +inf without stopping the others") {
    auto config = small_config();
    config.algorithms = {{Algorithm::dplms, 0.6}, {Algorithm::dlms, 5.0}};
    config.iterations = 400;
    const auto result = run_experiment(config);
    CHECK(std::isinf(result.curves[1].curve.linear.back()));
    CHECK(std::isfinite(result.curves[0].curve.linear.back()));
}

TEST_CASE("emitted files: CSV rows and manifest") {
    const auto config = small_config();
    const auto result = run_experiment(config);
    const auto dir = std::filesystem::temp_directory_path() / "dplms_harness_test";
    std::filesystem::remove_all(dir);
    const auto written = emit_csv(result, config, dir);
    CHECK(written.size() == 4);
    std::ifstream csv(dir / "msd_dplms.csv");
    std::string line;
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == static_cast<int>(config.iterations) + 1);

    std::ifstream mf(dir / "manifest.json");
    const auto manifest = nlohmann::json::parse(mf);
    CHECK(manifest["config_hash"] == config.source_hash);
    CHECK(manifest["master_seed"] == 7);
    CHECK(manifest["run_seeds"].size() == 4);
    CHECK(manifest["curves"].size() == 3);
    CHECK(manifest["curves"][2]["csv"] == "msd_dse_lms.csv");
    CHECK(manifest.contains("version"));
    CHECK(manifest.contains("wall_clock_seconds"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("profiles and topology are fixed by the master seed") {
    auto config = small_config(R"(, "regressor": {"kind": "diagonal", "variance_range": [0.5, 1.5]})");
    const auto a = build_profiles(config);
    const auto b = build_profiles(config);
    for (std::size_t n = 0; n < 6; ++n) {
        CHECK(a.regressors[n].variances() == b.regressors[n].variances());
        for (double v : a.regressors[n].variances()) CHECK((v >= 0.5 && v <= 1.5));
    }
    CHECK(build_topology(config, 0).edges() == build_topology(config, 3).edges());
    config.topology.regenerate_per_run = true;
    CHECK(build_topology(config, 0).edges() != build_topology(config, 3).edges());
}

TEST_CASE("bound report") {
    const auto config = small_config();
    const auto report = evaluate_bound(config);
    CHECK(report.has_dplms);
    CHECK(report.alphas.size() == 6);
    for (double a : report.alphas) CHECK(a > 0.0);
    CHECK(report.mu_max_per_node > 0.0);
    CHECK(report.spectral_radius_at_mu < 1.0);
}

}
