// rotors: command line driver for single runs, sweeps, exact-oracle checks and presets.

#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rotors/harness/config.hpp"
#include "rotors/harness/io.hpp"
#include "rotors/harness/presets.hpp"
#include "rotors/harness/run.hpp"
#include "rotors/harness/sweep.hpp"

using namespace rotors;
using namespace rotors::harness;
using nlohmann::ordered_json;

namespace {

int fail(const std::string& kind, const std::string& message, const std::string& key = {}) {
    ordered_json e{{"kind", kind}, {"message", message}};
    if (!key.empty()) e["key"] = key;
    std::cerr << ordered_json{{"error", e}}.dump() << "\n";
    return kind == "config" || kind == "usage" ? 2 : 1;
}

void print(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_simulate(const std::string& path, const std::string& out_dir) {
    ExperimentConfig cfg = parse_config(read_file(path), path);
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    const RunResult r = run(cfg);
    ordered_json j{{"directory", r.directory.string()}, {"samples", r.trajectory.samples.size()}};
    j["analysis"] = analysis_json(cfg, r);
    print(j);
    return 0;
}

void print_dcr(const std::vector<SummaryRow>& rows) {
    std::set<std::pair<double, int>> pairs;
    std::map<std::pair<double, int>, std::set<double>> drifts;
    for (const auto& r : rows) {
        pairs.insert({r.beta, r.n});
        drifts[{r.beta, r.n}].insert(r.drift);
    }
    for (const auto& [beta, n] : pairs) {
        if (drifts[{beta, n}].size() < 2) continue;
        try {
            const auto e = estimate_dcr(rows, beta, n);
            std::cout << "d_cr beta=" << fmt(beta) << " N=" << n << ": " << to_string(e.status);
            if (e.status == DcrEstimate::Status::undetermined) {
                std::cout << " offending d =";
                for (double d : e.offending) std::cout << " " << fmt(d);
            } else {
                std::cout << " [" << fmt(e.lower) << ", " << fmt(e.upper) << "]";
            }
            std::cout << "\n";
        } catch (const std::exception& ex) {
            std::cout << "d_cr beta=" << fmt(beta) << " N=" << n << ": " << ex.what() << "\n";
        }
    }
}

int cmd_sweep(const std::string& path, const std::string& out_dir, int workers) {
    SweepGrid grid = parse_sweep(read_file(path), path);
    if (!out_dir.empty()) grid.base.output.directory = out_dir;
    const auto rows = run_sweep_to_disk(grid, workers);
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.status != "ok";
    std::cout << summary_csv(rows);
    print_dcr(rows);
    std::cout << rows.size() << " cells, " << failed << " failed; summary in "
              << (fs::path(grid.base.output.directory) / "summary.csv").string() << "\n";
    return 0;
}

int cmd_oracle(const std::string& path, const std::string& out_dir) {
    ExperimentConfig cfg = parse_config(read_file(path), path);
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    const OracleResult o = run_oracle(cfg);
    ordered_json j{{"directory", cfg.output.directory},
                   {"states", o.states},
                   {"converged", o.stationary.converged},
                   {"iterations", o.stationary.iterations},
                   {"residual", o.stationary.residual},
                   {"rotation_deviation", o.rotation_deviation}};
    j["gibbs_tv"] = o.gibbs_tv ? ordered_json(*o.gibbs_tv) : ordered_json(nullptr);
    print(j);
    return 0;
}

int cmd_preset(const std::string& name, const std::string& emit, bool list) {
    if (list || name.empty()) {
        for (const auto& p : available_presets()) std::cout << p.name << "  " << p.summary << "\n";
        return 0;
    }
    const Preset p = preset(name);
    const std::string text = std::visit([](const auto& v) { return to_toml(v); }, p);
    if (emit.empty()) {
        std::cout << text;
    } else {
        write_file(emit, text);
        std::cout << (std::holds_alternative<SweepGrid>(p) ? "sweep" : "simulate") << " config written to " << emit
                  << "\n";
    }
    return 0;
}

int cmd_report(const std::string& dir) {
    const fs::path d(dir);
    if (fs::exists(d / "summary.csv")) {
        const auto rows = parse_summary_csv(read_file(d / "summary.csv"));
        std::cout << summary_csv(rows);
        print_dcr(rows);
        return 0;
    }
    if (fs::exists(d / "manifest.json")) {
        verify_manifest(d);
        ordered_json j{{"directory", d.string()}};
        const auto manifest = nlohmann::ordered_json::parse(read_file(d / "manifest.json"));
        j["version"] = manifest.at("version");
        if (fs::exists(d / "analysis.json")) j["analysis"] = nlohmann::ordered_json::parse(read_file(d / "analysis.json"));
        if (fs::exists(d / "oracle.json")) j["oracle"] = nlohmann::ordered_json::parse(read_file(d / "oracle.json"));
        print(j);
        return 0;
    }
    return fail("io", "no summary.csv or manifest.json in " + dir);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven planar-rotator lattice simulations"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    std::string config_path, out_dir, name, emit, dir;
    int workers = 0;
    bool list = false;

    auto* sim = app.add_subcommand("simulate", "run one trajectory");
    sim->add_option("--config", config_path, "TOML config")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out_dir, "override output.directory");

    auto* sweep = app.add_subcommand("sweep", "run a parameter grid");
    sweep->add_option("--config", config_path, "TOML config with a [sweep] section")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out_dir, "override output.directory");
    sweep->add_option("--workers", workers, "worker threads (default: ROTORS_MAX_WORKERS or cores)");

    auto* oracle = app.add_subcommand("oracle", "exact stationary distribution of a tiny clock system");
    oracle->add_option("--config", config_path, "TOML config")->required()->check(CLI::ExistingFile);
    oracle->add_option("--out", out_dir, "override output.directory");

    auto* pre = app.add_subcommand("preset", "print or write a named preset config");
    pre->add_option("--name", name, "preset name");
    pre->add_option("--emit", emit, "write the config here instead of stdout");
    pre->add_flag("--list", list, "list presets");

    auto* report = app.add_subcommand("report", "reprint a run or sweep summary");
    report->add_option("--dir", dir, "run or sweep directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    try {
        if (*sim) return cmd_simulate(config_path, out_dir);
        if (*sweep) return cmd_sweep(config_path, out_dir, workers);
        if (*oracle) return cmd_oracle(config_path, out_dir);
        if (*pre) return cmd_preset(name, emit, list);
        if (*report) return cmd_report(dir);
    } catch (const ConfigError& e) {
        return fail("config", e.what(), e.key());
    } catch (const std::length_error& e) {
        return fail("limit", e.what());
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
    return fail("usage", "no command");
}
