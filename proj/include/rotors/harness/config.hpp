#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>
#include <json.hpp>

#include "rotors/clock_dynamics.hpp"
#include "rotors/lattice.hpp"
#include "rotors/observables.hpp"
#include "rotors/spin_state.hpp"
#include "rotors/xy_dynamics.hpp"

namespace rotors::harness {

/// Bad configuration; key() is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct LatticeSection {
    std::array<int, 3> dims{8, 8, 8};
    std::string boundary = "periodic";  // periodic | coherent | interface | open
    double zeta = 0.0;                  // coherent boundary angle
    int k = 0;                          // interface boundary orientation
    bool operator==(const LatticeSection&) const = default;
};

struct ModelSection {
    std::string kind = "xy";  // clock | xy
    int n = 6;
    std::string interaction = "cosine";  // cosine | very-nonlinear
    double p = 1.0;
    bool operator==(const ModelSection&) const = default;
};

struct DynamicsSection {
    double beta = 1.0;
    double drift = 0.0;
    std::string clock_rates = "symmetric-log";  // symmetric-log | diffusive
    std::string scheme = "heun";                // heun | euler-maruyama
    double dt = 0.005;
    double t_end = 10.0;
    double sample_every = 0.1;
    bool record_full_states = false;
    bool operator==(const DynamicsSection&) const = default;
};

struct InitSection {
    std::string kind = "coherent";  // coherent | random | interface
    int k = 0;
    double angle = 0.0;
    bool operator==(const InitSection&) const = default;
};

struct RngSection {
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    bool operator==(const RngSection&) const = default;
};

struct OutputSection {
    std::string directory = "runs/out";
    std::vector<std::string> observables{"series"};  // series correlation layers states generator
    bool operator==(const OutputSection&) const = default;

    bool wants(std::string_view name) const {
        for (const auto& o : observables) {
            if (o == name) return true;
        }
        return false;
    }
};

struct AnalysisSection {
    double window_start = 0.0;
    double window_end = -1.0;  // < 0 means t_end
    double m_min = RotationThresholds{}.m_min;
    double omega_min = RotationThresholds{}.omega_min;
    double omega_stderrs = RotationThresholds{}.omega_stderrs;
    double residual_max = RotationThresholds{}.residual_max;
    int axis = 0;
    int max_r = -1;  // < 0 means half the extent
    double decay_r_min = 1.0;
    double decay_r_max = -1.0;  // < 0 means max_r
    bool operator==(const AnalysisSection&) const = default;
};

struct ExperimentConfig {
    LatticeSection lattice;
    ModelSection model;
    DynamicsSection dynamics;
    InitSection init;
    RngSection rng;
    OutputSection output;
    AnalysisSection analysis;
    bool operator==(const ExperimentConfig&) const = default;

    bool is_clock() const { return model.kind == "clock"; }
    bool diffusive() const { return is_clock() && dynamics.clock_rates == "diffusive"; }

    TimeWindow window() const {
        return {analysis.window_start, analysis.window_end < 0 ? dynamics.t_end : analysis.window_end};
    }

    RotationThresholds thresholds() const {
        return {analysis.m_min, analysis.omega_min, analysis.omega_stderrs, analysis.residual_max};
    }

    Interaction make_interaction() const {
        return model.interaction == "cosine" ? Interaction::cosine() : Interaction::very_nonlinear(model.p);
    }

    Lattice make_lattice() const {
        const Dims d{lattice.dims[0], lattice.dims[1], lattice.dims[2]};
        if (lattice.boundary == "coherent") return Lattice(d, boundary::Coherent{lattice.zeta});
        if (lattice.boundary == "interface") return Lattice(d, boundary::InterfaceClamped{lattice.k, model.n});
        if (lattice.boundary == "open") return Lattice(d, boundary::Open{});
        return Lattice(d, boundary::Periodic{});
    }

    /// Clock parameters and the clock-time length of one output time unit.
    std::pair<ClockParams, double> clock_params() const {
        if (diffusive()) {
            const auto pre = diffusive_preset(dynamics.beta, dynamics.drift, model.n, make_interaction());
            return {pre.params, pre.time_scale};
        }
        return {ClockParams::from_drift(dynamics.beta, model.n, dynamics.drift, make_interaction()), 1.0};
    }

    XYParams xy_params() const {
        return {dynamics.beta, dynamics.drift, make_interaction(), dynamics.dt,
                dynamics.scheme == "heun" ? Scheme::stochastic_heun : Scheme::euler_maruyama};
    }

    InitSpec init_spec() const {
        if (init.kind == "random") return init::UniformRandom{derive_seed(rng.seed, rng.stream, 0x696e6974)};
        if (init.kind == "interface") return init::Interface{init.k};
        if (is_clock()) return init::CoherentIndex{init.k};
        return init::CoherentAngle{init.angle};
    }

    void validate() const;
};

namespace detail {

inline void require(bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

inline void one_of(const std::string& v, std::initializer_list<const char*> allowed, const char* key) {
    std::string list;
    for (const char* a : allowed) {
        if (v == a) return;
        list += list.empty() ? a : std::string(", ") + a;
    }
    throw ConfigError(key, "'" + v + "' is not one of " + list);
}

inline bool is_multiple(double a, double b) {
    const double q = a / b;
    return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q);
}

}  // namespace detail

inline void ExperimentConfig::validate() const {
    using detail::require;
    for (int i = 0; i < 3; ++i) require(lattice.dims[i] >= 1, "lattice.dims", "extents must be >= 1");
    detail::one_of(lattice.boundary, {"periodic", "coherent", "interface", "open"}, "lattice.boundary");
    require(std::isfinite(lattice.zeta), "lattice.zeta", "must be finite");

    detail::one_of(model.kind, {"clock", "xy"}, "model.kind");
    require(model.n >= 2, "model.N", "must be >= 2");
    detail::one_of(model.interaction, {"cosine", "very-nonlinear"}, "model.interaction");
    require(model.p >= 1.0, "model.p", "must be >= 1");
    if (lattice.boundary == "interface") {
        require(is_clock(), "lattice.boundary", "interface boundary needs a clock model");
        require(model.n % 2 == 0, "model.N", "interface boundary needs even N");
        require(lattice.dims[0] % 2 == 0, "lattice.dims", "interface boundary needs an even first extent");
    }

    require(dynamics.beta >= 0.0 && std::isfinite(dynamics.beta), "dynamics.beta", "must be finite and >= 0");
    require(std::isfinite(dynamics.drift), "dynamics.drift", "must be finite");
    require(!is_clock() || dynamics.drift >= 0.0, "dynamics.drift", "clock drift must be >= 0");
    detail::one_of(dynamics.clock_rates, {"symmetric-log", "diffusive"}, "dynamics.clock_rates");
    detail::one_of(dynamics.scheme, {"heun", "euler-maruyama"}, "dynamics.scheme");
    require(dynamics.t_end > 0.0 && std::isfinite(dynamics.t_end), "dynamics.t_end", "must be > 0");
    require(dynamics.sample_every > 0.0 && dynamics.sample_every <= dynamics.t_end, "dynamics.sample_every",
            "must be in (0, t_end]");
    if (!is_clock()) {
        require(dynamics.beta > 0.0, "dynamics.beta", "xy dynamics needs beta > 0");
        require(dynamics.dt > 0.0 && dynamics.dt <= dynamics.sample_every, "dynamics.dt",
                "must be in (0, sample_every]");
        require(detail::is_multiple(dynamics.sample_every, dynamics.dt), "dynamics.sample_every",
                "must be a multiple of dynamics.dt");
        require(detail::is_multiple(dynamics.t_end, dynamics.dt), "dynamics.t_end",
                "must be a multiple of dynamics.dt");
    }
    if (diffusive()) {
        require(dynamics.beta > 0.0, "dynamics.beta", "diffusive rates need beta > 0");
        require(std::numbers::pi * dynamics.beta * dynamics.drift < model.n, "dynamics.drift",
                "diffusive rates need pi * beta * drift < N");
    }

    detail::one_of(init.kind, {"coherent", "random", "interface"}, "init.kind");
    require(std::isfinite(init.angle), "init.angle", "must be finite");
    if (init.kind == "interface") {
        require(is_clock() && model.n % 2 == 0, "init.kind", "interface init needs a clock model with even N");
    }
    require(!(init.kind == "coherent" && !is_clock() && init.k != 0), "init.k",
            "xy coherent init takes init.angle, not init.k");

    for (const auto& o : output.observables) {
        detail::one_of(o, {"series", "correlation", "layers", "states", "generator"}, "output.observables");
    }
    require(!output.directory.empty(), "output.directory", "must not be empty");

    const TimeWindow w = window();
    require(w.t_start >= 0.0 && w.t_start < w.t_end, "analysis.window_start", "must be in [0, window end)");
    require(w.t_end <= dynamics.t_end + 1e-9, "analysis.window_end", "must not exceed dynamics.t_end");
    require(analysis.m_min >= 0.0 && analysis.m_min <= 1.0, "analysis.m_min", "must be in [0, 1]");
    require(analysis.omega_min >= 0.0, "analysis.omega_min", "must be >= 0");
    require(analysis.omega_stderrs >= 0.0, "analysis.omega_stderrs", "must be >= 0");
    require(analysis.residual_max > 0.0, "analysis.residual_max", "must be > 0");
    require(analysis.axis >= 0 && analysis.axis <= 2, "analysis.axis", "must be 0, 1 or 2");
    require(analysis.max_r <= lattice.dims[analysis.axis] / 2, "analysis.max_r",
            "exceeds half the extent along analysis.axis");
}

// ---------------------------------------------------------------------------
// TOML

namespace detail {

/// Reads typed keys from one section and reports the ones nobody asked for.
class SectionReader {
public:
    SectionReader(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

    std::string path(std::string_view key) const { return name_ + "." + std::string(key); }

    void read(std::string_view key, double& out) {
        if (const auto* node = take(key)) {
            if (auto v = node->value_exact<double>()) {
                out = *v;
            } else if (auto i = node->value_exact<std::int64_t>()) {
                out = static_cast<double>(*i);
            } else {
                throw ConfigError(path(key), "expected a number");
            }
        }
    }

    void read(std::string_view key, int& out) {
        if (const auto* node = take(key)) {
            auto i = node->value_exact<std::int64_t>();
            if (!i || *i < std::numeric_limits<int>::min() || *i > std::numeric_limits<int>::max()) {
                throw ConfigError(path(key), "expected an integer");
            }
            out = static_cast<int>(*i);
        }
    }

    void read(std::string_view key, std::uint64_t& out) {
        if (const auto* node = take(key)) {
            if (auto i = node->value_exact<std::int64_t>(); i && *i >= 0) {
                out = static_cast<std::uint64_t>(*i);
            } else if (auto s = node->value_exact<std::string>()) {
                // full 64-bit range as a decimal string
                std::size_t used = 0;
                try {
                    out = std::stoull(*s, &used, 0);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used == 0 || used != s->size()) throw ConfigError(path(key), "expected an unsigned integer");
            } else {
                throw ConfigError(path(key), "expected a non-negative integer");
            }
        }
    }

    void read(std::string_view key, bool& out) {
        if (const auto* node = take(key)) {
            auto b = node->value_exact<bool>();
            if (!b) throw ConfigError(path(key), "expected true or false");
            out = *b;
        }
    }

    void read(std::string_view key, std::string& out) {
        if (const auto* node = take(key)) {
            auto s = node->value_exact<std::string>();
            if (!s) throw ConfigError(path(key), "expected a string");
            out = *s;
        }
    }

    void read(std::string_view key, std::vector<std::string>& out) {
        if (const auto* node = take(key)) {
            const auto* arr = node->as_array();
            if (!arr) throw ConfigError(path(key), "expected an array of strings");
            out.clear();
            for (const auto& el : *arr) {
                auto s = el.value_exact<std::string>();
                if (!s) throw ConfigError(path(key), "expected an array of strings");
                out.push_back(*s);
            }
        }
    }

    template <class T>
    void read_list(std::string_view key, std::optional<std::vector<T>>& out) {
        if (const auto* node = take(key)) {
            const auto* arr = node->as_array();
            if (!arr) throw ConfigError(path(key), "expected an array");
            std::vector<T> values;
            for (const auto& el : *arr) {
                if constexpr (std::is_same_v<T, double>) {
                    if (auto v = el.value_exact<double>()) {
                        values.push_back(*v);
                    } else if (auto i = el.value_exact<std::int64_t>()) {
                        values.push_back(static_cast<double>(*i));
                    } else {
                        throw ConfigError(path(key), "expected an array of numbers");
                    }
                } else {
                    auto i = el.value_exact<std::int64_t>();
                    if (!i) throw ConfigError(path(key), "expected an array of integers");
                    values.push_back(static_cast<T>(*i));
                }
            }
            out = std::move(values);
        }
    }

    void read_dims(std::string_view key, std::array<int, 3>& out) {
        if (const auto* node = take(key)) {
            const auto* arr = node->as_array();
            if (!arr || arr->size() != 3) throw ConfigError(path(key), "expected three integers");
            for (std::size_t i = 0; i < 3; ++i) {
                auto v = (*arr)[i].value_exact<std::int64_t>();
                if (!v) throw ConfigError(path(key), "expected three integers");
                out[i] = static_cast<int>(*v);
            }
        }
    }

    void finish() const {
        if (!table_) return;
        for (const auto& [k, v] : *table_) {
            if (!seen_.count(std::string(k.str()))) throw ConfigError(path(k.str()), "unknown key");
        }
    }

private:
    const toml::node* take(std::string_view key) {
        seen_.insert(std::string(key));
        return table_ ? table_->get(key) : nullptr;
    }

    const toml::table* table_;
    std::string name_;
    std::set<std::string> seen_;
};

inline const toml::table* section(const toml::table& root, const char* name) {
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) throw ConfigError(name, "expected a table");
    return n->as_table();
}

inline void read_sections(const toml::table& root, ExperimentConfig& c) {
    {
        SectionReader r(section(root, "lattice"), "lattice");
        r.read_dims("dims", c.lattice.dims);
        r.read("boundary", c.lattice.boundary);
        r.read("zeta", c.lattice.zeta);
        r.read("k", c.lattice.k);
        r.finish();
    }
    {
        SectionReader r(section(root, "model"), "model");
        r.read("kind", c.model.kind);
        r.read("N", c.model.n);
        r.read("interaction", c.model.interaction);
        r.read("p", c.model.p);
        r.finish();
    }
    {
        SectionReader r(section(root, "dynamics"), "dynamics");
        r.read("beta", c.dynamics.beta);
        r.read("drift", c.dynamics.drift);
        r.read("clock_rates", c.dynamics.clock_rates);
        r.read("scheme", c.dynamics.scheme);
        r.read("dt", c.dynamics.dt);
        r.read("t_end", c.dynamics.t_end);
        r.read("sample_every", c.dynamics.sample_every);
        r.read("record_full_states", c.dynamics.record_full_states);
        r.finish();
    }
    {
        SectionReader r(section(root, "init"), "init");
        r.read("kind", c.init.kind);
        r.read("k", c.init.k);
        r.read("angle", c.init.angle);
        r.finish();
    }
    {
        SectionReader r(section(root, "rng"), "rng");
        r.read("seed", c.rng.seed);
        r.read("stream", c.rng.stream);
        r.finish();
    }
    {
        SectionReader r(section(root, "output"), "output");
        r.read("directory", c.output.directory);
        r.read("observables", c.output.observables);
        r.finish();
    }
    {
        SectionReader r(section(root, "analysis"), "analysis");
        r.read("window_start", c.analysis.window_start);
        r.read("window_end", c.analysis.window_end);
        r.read("m_min", c.analysis.m_min);
        r.read("omega_min", c.analysis.omega_min);
        r.read("omega_stderrs", c.analysis.omega_stderrs);
        r.read("residual_max", c.analysis.residual_max);
        r.read("axis", c.analysis.axis);
        r.read("max_r", c.analysis.max_r);
        r.read("decay_r_min", c.analysis.decay_r_min);
        r.read("decay_r_max", c.analysis.decay_r_max);
        r.finish();
    }
}

inline toml::table parse_toml(std::string_view text, std::string_view source) {
    try {
        return toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << e.description() << " (line " << e.source().begin.line << ")";
        throw ConfigError("", "TOML syntax: " + msg.str());
    }
}

inline std::int64_t seed_value(std::uint64_t s) { return static_cast<std::int64_t>(s); }

}  // namespace detail

inline ExperimentConfig parse_config(std::string_view text, std::string_view source = "config") {
    const toml::table root = detail::parse_toml(text, source);
    for (const auto& [k, v] : root) {
        static const std::set<std::string_view> known = {"lattice", "model", "dynamics", "init",
                                                          "rng", "output", "analysis"};
        if (!known.count(k.str())) throw ConfigError(std::string(k.str()), "unknown section");
    }
    ExperimentConfig c;
    detail::read_sections(root, c);
    c.validate();
    return c;
}

inline toml::table to_toml_table(const ExperimentConfig& c) {
    auto strings = [](const std::vector<std::string>& v) {
        toml::array a;
        for (const auto& s : v) a.push_back(s);
        return a;
    };
    // seeds above 2^63 go out as strings so they survive the signed TOML integer
    auto seed_node = [](std::uint64_t s, toml::table& t, const char* key) {
        if (s > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
            t.insert(key, std::to_string(s));
        } else {
            t.insert(key, static_cast<std::int64_t>(s));
        }
    };
    toml::table rng;
    seed_node(c.rng.seed, rng, "seed");
    seed_node(c.rng.stream, rng, "stream");
    return toml::table{
        {"lattice", toml::table{{"dims", toml::array{c.lattice.dims[0], c.lattice.dims[1], c.lattice.dims[2]}},
                                {"boundary", c.lattice.boundary},
                                {"zeta", c.lattice.zeta},
                                {"k", c.lattice.k}}},
        {"model", toml::table{{"kind", c.model.kind},
                              {"N", c.model.n},
                              {"interaction", c.model.interaction},
                              {"p", c.model.p}}},
        {"dynamics", toml::table{{"beta", c.dynamics.beta},
                                 {"drift", c.dynamics.drift},
                                 {"clock_rates", c.dynamics.clock_rates},
                                 {"scheme", c.dynamics.scheme},
                                 {"dt", c.dynamics.dt},
                                 {"t_end", c.dynamics.t_end},
                                 {"sample_every", c.dynamics.sample_every},
                                 {"record_full_states", c.dynamics.record_full_states}}},
        {"init", toml::table{{"kind", c.init.kind}, {"k", c.init.k}, {"angle", c.init.angle}}},
        {"rng", rng},
        {"output", toml::table{{"directory", c.output.directory}, {"observables", strings(c.output.observables)}}},
        {"analysis", toml::table{{"window_start", c.analysis.window_start},
                                 {"window_end", c.analysis.window_end},
                                 {"m_min", c.analysis.m_min},
                                 {"omega_min", c.analysis.omega_min},
                                 {"omega_stderrs", c.analysis.omega_stderrs},
                                 {"residual_max", c.analysis.residual_max},
                                 {"axis", c.analysis.axis},
                                 {"max_r", c.analysis.max_r},
                                 {"decay_r_min", c.analysis.decay_r_min},
                                 {"decay_r_max", c.analysis.decay_r_max}}},
    };
}

inline std::string to_toml(const ExperimentConfig& c) {
    std::ostringstream out;
    out << to_toml_table(c) << "\n";
    return out.str();
}

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    using J = nlohmann::ordered_json;
    return J{
        {"lattice", {{"dims", c.lattice.dims}, {"boundary", c.lattice.boundary}, {"zeta", c.lattice.zeta},
                     {"k", c.lattice.k}}},
        {"model", {{"kind", c.model.kind}, {"N", c.model.n}, {"interaction", c.model.interaction},
                   {"p", c.model.p}}},
        {"dynamics", {{"beta", c.dynamics.beta}, {"drift", c.dynamics.drift},
                      {"clock_rates", c.dynamics.clock_rates}, {"scheme", c.dynamics.scheme},
                      {"dt", c.dynamics.dt}, {"t_end", c.dynamics.t_end},
                      {"sample_every", c.dynamics.sample_every},
                      {"record_full_states", c.dynamics.record_full_states}}},
        {"init", {{"kind", c.init.kind}, {"k", c.init.k}, {"angle", c.init.angle}}},
        {"rng", {{"seed", c.rng.seed}, {"stream", c.rng.stream}}},
        {"output", {{"directory", c.output.directory}, {"observables", c.output.observables}}},
        {"analysis", {{"window_start", c.analysis.window_start}, {"window_end", c.analysis.window_end},
                      {"m_min", c.analysis.m_min}, {"omega_min", c.analysis.omega_min},
                      {"omega_stderrs", c.analysis.omega_stderrs}, {"residual_max", c.analysis.residual_max},
                      {"axis", c.analysis.axis}, {"max_r", c.analysis.max_r},
                      {"decay_r_min", c.analysis.decay_r_min}, {"decay_r_max", c.analysis.decay_r_max}}},
    };
}

// ---------------------------------------------------------------------------
// Sweeps

/// Cartesian product over the listed parameters; an absent list keeps the base
/// value, an empty list yields no cells.
struct SweepGrid {
    ExperimentConfig base;
    std::optional<std::vector<double>> beta;
    std::optional<std::vector<double>> drift;
    std::optional<std::vector<int>> n;
    std::optional<std::vector<int>> l;
    std::optional<std::vector<int>> k;
    int replicas = 1;
    bool operator==(const SweepGrid&) const = default;
};

inline SweepGrid parse_sweep(std::string_view text, std::string_view source = "sweep") {
    toml::table root = detail::parse_toml(text, source);
    SweepGrid g;
    const toml::table* sweep = detail::section(root, "sweep");
    if (!sweep) throw ConfigError("sweep", "missing [sweep] section");
    detail::SectionReader r(sweep, "sweep");
    r.read_list("beta", g.beta);
    r.read_list("drift", g.drift);
    r.read_list("N", g.n);
    r.read_list("L", g.l);
    r.read_list("k", g.k);
    r.read("replicas", g.replicas);
    r.finish();
    detail::require(g.replicas >= 1, "sweep.replicas", "must be >= 1");
    root.erase("sweep");
    for (const auto& [k, v] : root) {
        static const std::set<std::string_view> known = {"lattice", "model", "dynamics", "init",
                                                          "rng", "output", "analysis"};
        if (!known.count(k.str())) throw ConfigError(std::string(k.str()), "unknown section");
    }
    detail::read_sections(root, g.base);
    // cells are validated one by one; the base only has to be well-formed where no list overrides it
    return g;
}

inline std::string to_toml(const SweepGrid& g) {
    toml::table t = to_toml_table(g.base);
    toml::table s;
    auto put = [&](const char* key, const auto& list) {
        if (!list) return;
        toml::array a;
        for (auto v : *list) a.push_back(v);
        s.insert(key, std::move(a));
    };
    put("beta", g.beta);
    put("drift", g.drift);
    put("N", g.n);
    put("L", g.l);
    put("k", g.k);
    s.insert("replicas", g.replicas);
    t.insert("sweep", std::move(s));
    std::ostringstream out;
    out << t << "\n";
    return out.str();
}

}  // namespace rotors::harness
