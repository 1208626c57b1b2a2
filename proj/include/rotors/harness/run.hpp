#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotors/clock_dynamics.hpp"
#include "rotors/exact_oracle.hpp"
#include "rotors/harness/config.hpp"
#include "rotors/harness/io.hpp"
#include "rotors/observables.hpp"
#include "rotors/xy_dynamics.hpp"

#ifndef ROTORS_VERSION
#define ROTORS_VERSION "0.0.0"
#endif

namespace rotors::harness {

inline std::string version_string() { return std::string("rotors ") + ROTORS_VERSION; }

struct RunResult {
    fs::path directory;
    Trajectory trajectory;  // times in output units
    double time_unit = 1.0;  // simulation time per output time unit
    std::optional<RotationVerdict> verdict;
    std::string verdict_note;
    WindowMeans means;
    std::vector<CorrelationPoint> correlation;
    std::optional<DecayFit> decay;
    std::vector<complex> layers;
    double wall_seconds = 0.0;
};

namespace detail {

inline SpinState snapshot_state(const Trajectory& traj, std::size_t i) {
    if (traj.kind == SpinKind::clock) {
        SpinState s = SpinState::clock(traj.sites, traj.clock_size);
        const auto idx = traj.state_indices(i);
        for (std::size_t x = 0; x < traj.sites; ++x) s.set_index(x, idx[x]);
        return s;
    }
    SpinState s = SpinState::xy(traj.sites);
    const auto a = traj.state_angles(i);
    s.assign_angles(std::vector<double>(a.begin(), a.end()));
    return s;
}

inline nlohmann::ordered_json verdict_json(const RotationVerdict& v) {
    return {{"rotating", v.rotating},       {"omega", v.omega},
            {"omega_stderr", v.omega_stderr}, {"m_floor", v.m_floor},
            {"phase_residual", v.phase_residual}, {"phase_intercept", v.phase_intercept},
            {"undersampled", v.undersampled}};
}

}  // namespace detail

/// Runs the trajectory described by `config` without touching the disk.
inline RunResult simulate(const ExperimentConfig& config) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    const Lattice lattice = config.make_lattice();
    const SpinKind kind = config.is_clock() ? SpinKind::clock : SpinKind::xy;
    const SpinState initial = init_state(lattice, kind, config.model.n, config.init_spec());
    const bool keep_states = config.dynamics.record_full_states || config.output.wants("correlation") ||
                             config.output.wants("states");

    RunResult r;
    if (config.is_clock()) {
        const auto [params, unit] = config.clock_params();
        r.time_unit = unit;
        CounterRng rng(config.rng.seed, config.rng.stream);
        r.trajectory = simulate_clock(initial, lattice, params,
                                      {config.dynamics.t_end * unit, config.dynamics.sample_every * unit, keep_states},
                                      rng);
        if (unit != 1.0) {
            // back to output units: sample k sits at k * sample_every
            for (std::size_t i = 0; i < r.trajectory.samples.size(); ++i) {
                r.trajectory.samples[i].t = static_cast<double>(i + 1) * config.dynamics.sample_every;
            }
            r.trajectory.final_time /= unit;
        }
    } else {
        r.trajectory = simulate_xy(initial, lattice, config.xy_params(), config.dynamics.t_end,
                                   config.dynamics.sample_every, NoiseStream(config.rng.seed, config.rng.stream),
                                   keep_states);
    }

    const TimeWindow window = config.window();
    std::size_t in_window = 0;
    for (const auto& s : r.trajectory.samples) in_window += window.contains(s.t);
    if (in_window >= 10) {
        r.verdict = detect_rotation(r.trajectory, window, config.thresholds());
    } else {
        r.verdict_note = std::to_string(in_window) + " samples in the analysis window, need 10";
    }
    r.means = window_means(r.trajectory, window);

    if (config.output.wants("correlation")) {
        std::vector<SpinState> ensemble;
        for (std::size_t i = 0; i < r.trajectory.samples.size(); ++i) {
            if (window.contains(r.trajectory.samples[i].t)) ensemble.push_back(detail::snapshot_state(r.trajectory, i));
        }
        if (ensemble.empty()) ensemble.push_back(*r.trajectory.final_state);
        const int axis = config.analysis.axis;
        const int max_r = config.analysis.max_r < 0 ? lattice.dims()[axis] / 2 : config.analysis.max_r;
        r.correlation = correlation_curve(ensemble, lattice, max_r, axis);
        const double r_max = config.analysis.decay_r_max < 0 ? max_r : config.analysis.decay_r_max;
        r.decay = classify_decay(r.correlation, config.analysis.decay_r_min, r_max);
    }
    if (config.output.wants("layers")) r.layers = layer_profile(*r.trajectory.final_state, lattice);

    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return r;
}

inline nlohmann::ordered_json analysis_json(const ExperimentConfig& config, const RunResult& r) {
    using J = nlohmann::ordered_json;
    const TimeWindow w = config.window();
    J a;
    a["window"] = {w.t_start, w.t_end};
    a["samples_in_window"] = r.means.count;
    a["mean_abs_m"] = r.means.abs_m;
    a["mean_m"] = {r.means.m.real(), r.means.m.imag()};
    a["mean_energy_per_site"] = r.means.energy_per_site;
    if (r.verdict) {
        a["rotation"] = detail::verdict_json(*r.verdict);
    } else {
        a["rotation"] = nullptr;
        a["rotation_note"] = r.verdict_note;
    }
    if (r.decay) {
        a["decay"] = {{"kind", to_string(r.decay->kind)},
                      {"rate", r.decay->rate},
                      {"exponent", r.decay->exponent},
                      {"r2_exponential", r.decay->r2_exponential},
                      {"r2_algebraic", r.decay->r2_algebraic}};
    }
    return a;
}

/// Runs `config` and writes series, requested extras, analysis.json and
/// manifest.json into config.output.directory.
inline RunResult run(const ExperimentConfig& config) {
    RunResult r = simulate(config);
    r.directory = config.output.directory;
    fs::create_directories(r.directory);
    ArtifactWriter w{r.directory};
    w.write("series.csv", series_csv(r.trajectory));
    if (config.output.wants("correlation")) w.write("correlation.csv", correlation_csv(r.correlation));
    if (config.output.wants("layers")) w.write("layers.csv", layers_csv(r.layers));
    if (config.output.wants("states")) w.write("states.bin", encode_snapshots(r.trajectory, config.make_lattice()));
    w.write("analysis.json", analysis_json(config, r).dump(2) + "\n");

    nlohmann::ordered_json m;
    m["version"] = version_string();
    m["seed"] = config.rng.seed;
    m["stream"] = config.rng.stream;
    m["time_unit"] = r.time_unit;
    m["wall_seconds"] = r.wall_seconds;
    m["config"] = to_json(config);
    m["files"] = w.files;
    write_file(r.directory / "manifest.json", m.dump(2) + "\n");
    write_file(r.directory / "config.toml", to_toml(config));
    return r;
}

// ---------------------------------------------------------------------------
// Oracle runs

struct OracleResult {
    std::size_t states = 0;
    StationaryDistribution stationary;
    std::optional<double> gibbs_tv;  // only without drift
    double rotation_deviation = 0.0;
    double max_row_sum = 0.0;
};

/// Exact stationary analysis of a clock config; writes pi.csv and oracle.json
/// (plus generator.csv when requested).
inline OracleResult run_oracle(const ExperimentConfig& config, bool write = true) {
    config.validate();
    if (!config.is_clock()) throw ConfigError("model.kind", "the exact oracle needs a clock model");
    const Lattice lattice = config.make_lattice();
    const auto params = config.clock_params().first;
    const auto q = build_generator(lattice, params);
    OracleResult o;
    o.states = q.dimension;
    o.max_row_sum = q.max_row_sum();
    o.stationary = stationary_distribution(q);
    const bool reversible = params.p_plus == params.p_minus;
    std::vector<double> gibbs;
    if (reversible) {
        gibbs = gibbs_distribution(lattice, params);
        o.gibbs_tv = total_variation(o.stationary.pi, gibbs);
    }
    o.rotation_deviation = check_rotation_invariance(o.stationary.pi, params.n, lattice.size());
    if (!write) return o;

    const fs::path dir = config.output.directory;
    fs::create_directories(dir);
    ArtifactWriter w{dir};
    std::string pi_csv = "code,pi" + std::string(reversible ? ",gibbs" : "") + "\n";
    for (std::size_t i = 0; i < q.dimension; ++i) {
        pi_csv += std::to_string(i) + "," + fmt(o.stationary.pi[i]);
        if (reversible) pi_csv += "," + fmt(gibbs[i]);
        pi_csv += "\n";
    }
    w.write("pi.csv", pi_csv);
    if (config.output.wants("generator")) {
        std::string g = "row,column,rate\n";
        for (std::size_t i = 0; i < q.dimension; ++i) {
            g += std::to_string(i) + "," + std::to_string(i) + "," + fmt(q.diagonal[i]) + "\n";
            for (std::size_t e = q.row_start[i]; e < q.row_start[i + 1]; ++e) {
                g += std::to_string(i) + "," + std::to_string(q.column[e]) + "," + fmt(q.rate[e]) + "\n";
            }
        }
        w.write("generator.csv", g);
    }
    nlohmann::ordered_json summary{{"states", o.states},
                                   {"encoding", "code = sum_x k_x * N^x, site x = x1 + L1*(x2 + L2*x3)"},
                                   {"converged", o.stationary.converged},
                                   {"iterations", o.stationary.iterations},
                                   {"residual", o.stationary.residual},
                                   {"max_row_sum", o.max_row_sum},
                                   {"rotation_deviation", o.rotation_deviation}};
    summary["gibbs_tv"] = o.gibbs_tv ? nlohmann::ordered_json(*o.gibbs_tv) : nlohmann::ordered_json(nullptr);
    w.write("oracle.json", summary.dump(2) + "\n");
    nlohmann::ordered_json m{{"version", version_string()}, {"config", to_json(config)}, {"files", w.files}};
    write_file(dir / "manifest.json", m.dump(2) + "\n");
    return o;
}

}  // namespace rotors::harness
