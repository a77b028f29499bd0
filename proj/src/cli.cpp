#include "dplms/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>

#include <CLI11.hpp>

#include "dplms/config.hpp"
#include "dplms/harness.hpp"

namespace dplms {

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::string> output;
};

ExperimentConfig load_with_overrides(const std::string& path, const Overrides& o) {
    auto config = load_config(path);
    if (o.seed) config.seed = *o.seed;
    if (o.workers) config.workers = *o.workers;
    if (o.output) config.output_dir = *o.output;
    return config;
}

int command_run(const std::string& path, const Overrides& o, std::ostream& out) {
    const auto config = load_with_overrides(path, o);
    const auto result = run_experiment(config);
    const auto written = emit_csv(result, config, config.output_dir);
    out << "runs " << config.monte_carlo_runs << ", iterations " << config.iterations << ", seed " << config.seed
        << ", " << std::fixed << std::setprecision(2) << result.wall_clock_seconds << " s\n";
    out << std::defaultfloat << std::setprecision(6);
    for (const auto& entry : result.curves) {
        const auto tail = std::min<std::size_t>(200, entry.curve.iterations());
        out << std::left << std::setw(8) << to_string(entry.algorithm) << " mu=" << entry.mu
            << " steady-state MSD " << entry.curve.steady_state_db(tail) << " dB\n";
    }
    for (const auto& p : written) out << "wrote " << p.string() << '\n';
    return kExitOk;
}

int command_topology(const std::string& path, const Overrides& o, std::ostream& out) {
    const auto config = load_with_overrides(path, o);
    const auto doc = build_topology(config).to_json();
    if (o.output) {
        std::ofstream file(*o.output, std::ios::binary | std::ios::trunc);
        if (!file) throw std::runtime_error("cannot write '" + *o.output + "'");
        file << doc.dump(2) << '\n';
    } else {
        out << doc.dump(2) << '\n';
    }
    return kExitOk;
}

int command_bound(const std::string& path, const Overrides& o, std::ostream& out) {
    const auto config = load_with_overrides(path, o);
    const auto report = evaluate_bound(config);
    out << std::setprecision(10);
    out << "pilot iterations " << config.bound.pilot_iterations << '\n';
    out << "alpha:";
    for (double a : report.alphas) out << ' ' << a;
    out << '\n';
    out << "mu_max " << report.mu_max_per_node << '\n';
    out << "mu_max_literal " << report.mu_max_literal << '\n';
    if (report.has_dplms) {
        out << "rho(B) at DPLMS mu " << report.spectral_radius_at_mu;
        if (report.spectral_radius_dense) out << " (power iteration stalled; dense eigensolver)";
        out << '\n';
    }
    return kExitOk;
}

int command_complexity(const std::string& algorithm, std::size_t m, std::size_t n, std::ostream& out) {
    const auto counts = op_counts(algorithm, m, n);
    const char* bound = counts.lower_bound ? "> " : "";
    out << algorithm << " M=" << m << " N=" << n << '\n';
    out << "multiplications " << bound << counts.multiplications << '\n';
    out << "additions " << bound << counts.additions << '\n';
    out << "absolutes " << counts.absolutes << '\n';
    out << "signs " << counts.signs << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Diffusion PLMS simulator"};
    app.name("dplms");
    app.require_subcommand(1);

    Overrides overrides;
    std::string config_path;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    std::string output;

    const auto add_common = [&](CLI::App* sub, bool with_workers) {
        sub->add_option("config", config_path, "Experiment config (JSON)")->required();
        sub->add_option("--seed", seed, "Override the master seed");
        sub->add_option("--output,-o", output, "Output directory (run) or file (topology)");
        if (with_workers) sub->add_option("--workers,-j", workers, "Worker threads (0: all cores)");
    };

    auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment and write MSD CSVs");
    add_common(run, true);
    auto* topology = app.add_subcommand("topology", "Emit the experiment topology as JSON");
    add_common(topology, false);
    auto* bound = app.add_subcommand("bound", "Mean-stability step-size bound from a DPLMS pilot run");
    add_common(bound, false);

    auto* complexity = app.add_subcommand("complexity", "Per-iteration operation counts");
    std::string algorithm;
    std::size_t m = 0;
    std::size_t n = 0;
    complexity->add_option("--alg", algorithm, "DSE-LMS, DRVSSLMS, DLLAD or DPLMS")->required();
    complexity->add_option("-M", m, "Filter length")->required()->check(CLI::PositiveNumber);
    complexity->add_option("-N", n, "Node count")->required()->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "dplms: " << e.what() << "\n\n" << app.help();
        return kExitConfigError;
    }

    for (auto* sub : {run, topology, bound}) {
        if (sub->count("--seed")) overrides.seed = seed;
        if (sub->count("--output")) overrides.output = output;
    }
    if (run->count("--workers")) overrides.workers = workers;

    try {
        if (*run) return command_run(config_path, overrides, out);
        if (*topology) return command_topology(config_path, overrides, out);
        if (*bound) return command_bound(config_path, overrides, out);
        if (*complexity) return command_complexity(algorithm, m, n, out);
    } catch (const ConfigError& e) {
        err << "dplms: config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        err << "dplms: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "dplms: " << e.what() << '\n';
        return kExitRuntimeError;
    }
    err << app.help();
    return kExitConfigError;
}

}  // namespace dplms
