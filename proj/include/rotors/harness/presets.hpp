#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rotors/harness/config.hpp"

namespace rotors::harness {

using Preset = std::variant<ExperimentConfig, SweepGrid>;

struct PresetInfo {
    const char* name;
    const char* summary;
};

inline const std::vector<PresetInfo>& available_presets() {
    static const std::vector<PresetInfo> list = {
        {"theorem-t1-magnetization", "clock N=6 on 10^3, beta=2, d=0; one run per coherent start k=0..5"},
        {"rotating-xy", "xy on 12^3, beta=3, d=0.5, coherent start, Heun dt=0.005 to t=60"},
        {"dobrushin-interface", "clock N=6 on 16x8x8 with clamped opposite faces, beta=2, d=2; layer profile"},
        {"dcr-scan", "clock N=6 on 6^3, beta=2; sweep over d with 3 replicas per drift"},
        {"intermediate-decay", "clock N=6 on 16^3, beta=0.6, d=0.5; correlation curve and decay fit"},
        {"diffusive-limit", "single free clock spin with diffusive rates, beta=1, d=1; sweep over N, times rescaled"},
    };
    return list;
}

namespace detail {

inline ExperimentConfig clock_base(std::string_view name, std::uint64_t seed) {
    ExperimentConfig c;
    c.model.kind = "clock";
    c.model.n = 6;
    c.rng.seed = seed;
    c.output.directory = "runs/" + std::string(name);
    return c;
}

}  // namespace detail

inline Preset preset(std::string_view name) {
    if (name == "theorem-t1-magnetization") {
        SweepGrid g;
        g.base = detail::clock_base(name, 101);
        g.base.lattice.dims = {10, 10, 10};
        g.base.dynamics.beta = 2.0;
        g.base.dynamics.drift = 0.0;
        g.base.dynamics.t_end = 30.0;
        g.base.dynamics.sample_every = 0.1;
        g.base.analysis.window_start = 5.0;
        g.k = std::vector<int>{0, 1, 2, 3, 4, 5};
        return g;
    }
    if (name == "rotating-xy") {
        ExperimentConfig c;
        c.model.kind = "xy";
        c.lattice.dims = {12, 12, 12};
        c.dynamics.beta = 3.0;
        c.dynamics.drift = 0.5;
        c.dynamics.scheme = "heun";
        c.dynamics.dt = 0.005;
        c.dynamics.t_end = 60.0;
        c.dynamics.sample_every = 0.1;
        c.init.kind = "coherent";
        c.init.angle = 0.0;
        c.rng.seed = 202;
        c.analysis.window_start = 10.0;
        c.output.directory = "runs/rotating-xy";
        return c;
    }
    if (name == "dobrushin-interface") {
        ExperimentConfig c = detail::clock_base(name, 303);
        c.lattice.dims = {16, 8, 8};
        c.lattice.boundary = "interface";
        c.lattice.k = 0;
        c.init.kind = "interface";
        c.init.k = 0;
        c.dynamics.beta = 2.0;
        c.dynamics.drift = 2.0;
        c.dynamics.t_end = 20.0;
        c.dynamics.sample_every = 0.1;
        c.analysis.window_start = 5.0;
        c.output.observables = {"series", "layers"};
        return c;
    }
    if (name == "dcr-scan") {
        SweepGrid g;
        g.base = detail::clock_base(name, 404);
        g.base.lattice.dims = {6, 6, 6};
        g.base.dynamics.beta = 2.0;
        g.base.dynamics.t_end = 30.0;
        g.base.dynamics.sample_every = 0.1;
        g.base.analysis.window_start = 10.0;
        g.drift = std::vector<double>{0.0, 0.5, 1.0, 2.0, 3.0, 4.0};
        g.replicas = 3;
        return g;
    }
    if (name == "intermediate-decay") {
        ExperimentConfig c = detail::clock_base(name, 505);
        c.lattice.dims = {16, 16, 16};
        c.dynamics.beta = 0.6;
        c.dynamics.drift = 0.5;
        c.dynamics.t_end = 40.0;
        c.dynamics.sample_every = 0.5;
        c.analysis.window_start = 10.0;
        c.analysis.decay_r_min = 1.0;
        c.output.observables = {"series", "correlation"};
        return c;
    }
    if (name == "diffusive-limit") {
        SweepGrid g;
        g.base = detail::clock_base(name, 606);
        g.base.lattice.dims = {1, 1, 1};
        g.base.lattice.boundary = "open";
        g.base.dynamics.clock_rates = "diffusive";
        g.base.dynamics.beta = 1.0;
        g.base.dynamics.drift = 1.0;
        g.base.dynamics.t_end = 1.0;
        g.base.dynamics.sample_every = 0.01;
        g.n = std::vector<int>{8, 16, 32, 64};
        g.replicas = 16;
        return g;
    }
    std::string names;
    for (const auto& p : available_presets()) names += names.empty() ? p.name : std::string(", ") + p.name;
    throw ConfigError("preset", "unknown preset '" + std::string(name) + "'; available: " + names);
}

}  // namespace rotors::harness
