#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rotors/harness/config.hpp"
#include "rotors/harness/io.hpp"
#include "rotors/harness/run.hpp"
#include "rotors/rng.hpp"

namespace rotors::harness {

struct SweepCell {
    double beta = 0.0;
    double drift = 0.0;
    int n = 0;
    int l = 0;
    int k = 0;
    int replica = 0;
    std::string label;
    ExperimentConfig config;
};

/// Seeds depend only on the cell's own parameter values and replica index, so
/// adding or removing cells never changes another cell's stream.
inline std::uint64_t cell_key(double beta, double drift, int n, int l, int k) {
    return fnv1a("beta=" + fmt(beta) + ";drift=" + fmt(drift) + ";N=" + std::to_string(n) +
                 ";L=" + std::to_string(l) + ";k=" + std::to_string(k));
}

inline std::string cell_label(double beta, double drift, int n, int l, int k) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "beta%g_d%g_N%d_L%d_k%d", beta, drift, n, l, k);
    return buf;
}

inline std::vector<SweepCell> expand(const SweepGrid& g) {
    const ExperimentConfig& b = g.base;
    const auto betas = g.beta.value_or(std::vector<double>{b.dynamics.beta});
    const auto drifts = g.drift.value_or(std::vector<double>{b.dynamics.drift});
    const auto ns = g.n.value_or(std::vector<int>{b.model.n});
    const auto ls = g.l.value_or(std::vector<int>{b.lattice.dims[0]});
    const auto ks = g.k.value_or(std::vector<int>{b.is_clock() ? b.init.k : 0});
    std::vector<SweepCell> cells;
    for (double beta : betas) {
        for (double drift : drifts) {
            for (int n : ns) {
                for (int l : ls) {
                    for (int k : ks) {
                        for (int rep = 0; rep < g.replicas; ++rep) {
                            SweepCell c{beta, drift, n, l, k, rep, cell_label(beta, drift, n, l, k), b};
                            ExperimentConfig& cfg = c.config;
                            cfg.dynamics.beta = beta;
                            cfg.dynamics.drift = drift;
                            cfg.model.n = n;
                            if (g.l) cfg.lattice.dims = {l, l, l};
                            if (g.k) {
                                if (cfg.is_clock()) {
                                    cfg.init.k = k;
                                } else {
                                    cfg.init.angle = two_pi * k / n;
                                }
                                if (cfg.lattice.boundary == "interface") cfg.lattice.k = k;
                            }
                            cfg.rng.seed = derive_seed(b.rng.seed, cell_key(beta, drift, n, l, k),
                                                       static_cast<std::uint64_t>(rep));
                            cfg.output.directory =
                                (fs::path(b.output.directory) / c.label / ("r" + std::to_string(rep))).string();
                            cells.push_back(std::move(c));
                        }
                    }
                }
            }
        }
    }
    return cells;
}

struct SummaryRow {
    double beta = 0.0;
    int n = 0;
    double drift = 0.0;
    int l = 0;
    int k = 0;
    int replica = 0;
    std::uint64_t seed = 0;
    double mean_abs_m = std::numeric_limits<double>::quiet_NaN();
    double omega = std::numeric_limits<double>::quiet_NaN();
    double omega_stderr = std::numeric_limits<double>::quiet_NaN();
    double m_floor = std::numeric_limits<double>::quiet_NaN();
    std::string verdict = "none";  // rotating | static | none
    double energy_per_site = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";  // ok | error
    std::string message;
    std::string directory;
};

inline const char* summary_header =
    "beta,N,drift,L,k,replica,seed,mean_abs_m,omega,omega_stderr,m_floor,verdict,energy_per_site,status,message,"
    "directory";

inline int worker_limit() {
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("ROTORS_MAX_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) n = static_cast<int>(std::min<long>(v, 1024));
    }
    return n;
}

inline SummaryRow run_cell(const SweepCell& c, bool write) {
    SummaryRow row;
    row.beta = c.beta;
    row.n = c.n;
    row.drift = c.drift;
    row.l = c.config.lattice.dims[0];
    row.k = c.k;
    row.replica = c.replica;
    row.seed = c.config.rng.seed;
    row.directory = c.config.output.directory;
    try {
        const RunResult r = write ? run(c.config) : simulate(c.config);
        row.mean_abs_m = r.means.abs_m;
        row.energy_per_site = r.means.energy_per_site;
        if (r.verdict) {
            row.omega = r.verdict->omega;
            row.omega_stderr = r.verdict->omega_stderr;
            row.m_floor = r.verdict->m_floor;
            row.verdict = r.verdict->rotating ? "rotating" : "static";
        } else {
            row.message = r.verdict_note;
        }
    } catch (const std::exception& e) {
        row.status = "error";
        row.message = e.what();
    }
    return row;
}

/// Runs every cell on up to `workers` threads (0: worker_limit()); rows come
/// back in cell order whatever the scheduling.
inline std::vector<SummaryRow> run_sweep(const SweepGrid& grid, int workers = 0, bool write = true) {
    const auto cells = expand(grid);
    std::vector<SummaryRow> rows(cells.size());
    if (cells.empty()) return rows;
    const int n_workers = std::min<int>(workers > 0 ? workers : worker_limit(), static_cast<int>(cells.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) rows[i] = run_cell(cells[i], write);
    };
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(work);
    }
    return rows;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
    auto clean = [](std::string s) {
        for (char& c : s) {
            if (c == ',' || c == '\n' || c == '\r') c = ';';
        }
        return s;
    };
    std::string out = std::string(summary_header) + "\n";
    for (const auto& r : rows) {
        out += fmt(r.beta) + "," + std::to_string(r.n) + "," + fmt(r.drift) + "," + std::to_string(r.l) + "," +
               std::to_string(r.k) + "," + std::to_string(r.replica) + "," + std::to_string(r.seed) + "," +
               fmt(r.mean_abs_m) + "," + fmt(r.omega) + "," + fmt(r.omega_stderr) + "," + fmt(r.m_floor) + "," +
               r.verdict + "," + fmt(r.energy_per_site) + "," + r.status + "," + clean(r.message) + "," +
               clean(r.directory) + "\n";
    }
    return out;
}

inline std::vector<SummaryRow> parse_summary_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != summary_header) throw std::invalid_argument("not a sweep summary");
    std::vector<SummaryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream cells(line);
        for (std::string cell; std::getline(cells, cell, ',');) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 16) throw std::invalid_argument("malformed summary row: " + line);
        SummaryRow r;
        r.beta = std::stod(f[0]);
        r.n = std::stoi(f[1]);
        r.drift = std::stod(f[2]);
        r.l = std::stoi(f[3]);
        r.k = std::stoi(f[4]);
        r.replica = std::stoi(f[5]);
        r.seed = std::stoull(f[6]);
        r.mean_abs_m = std::stod(f[7]);
        r.omega = std::stod(f[8]);
        r.omega_stderr = std::stod(f[9]);
        r.m_floor = std::stod(f[10]);
        r.verdict = f[11];
        r.energy_per_site = std::stod(f[12]);
        r.status = f[13];
        r.message = f[14];
        r.directory = f[15];
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Writes summary.csv and the resolved grid next to the cell directories.
inline std::vector<SummaryRow> run_sweep_to_disk(const SweepGrid& grid, int workers = 0) {
    auto rows = run_sweep(grid, workers, true);
    const fs::path dir = grid.base.output.directory;
    fs::create_directories(dir);
    write_file(dir / "summary.csv", summary_csv(rows));
    write_file(dir / "sweep.toml", to_toml(grid));
    return rows;
}

// ---------------------------------------------------------------------------
// Critical drift

struct DcrEstimate {
    enum class Status { bracketed, all_rotating, none_rotating, undetermined };
    Status status = Status::undetermined;
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    std::vector<double> offending;  // drifts whose majority verdict breaks monotonicity or ties
    std::vector<std::pair<double, bool>> verdicts;  // majority verdict per drift, ascending
};

inline const char* to_string(DcrEstimate::Status s) {
    switch (s) {
        case DcrEstimate::Status::bracketed: return "bracketed";
        case DcrEstimate::Status::all_rotating: return "all-rotating";
        case DcrEstimate::Status::none_rotating: return "none-rotating";
        case DcrEstimate::Status::undetermined: return "undetermined";
    }
    return "?";
}

/// Bracket [largest static d, smallest rotating d] from the majority verdict
/// per drift at fixed (beta, N). Failed rows and rows without a verdict are
/// ignored; a drift with tied votes counts as offending.
inline DcrEstimate estimate_dcr(const std::vector<SummaryRow>& rows, double beta, int n) {
    std::map<double, std::pair<int, int>> votes;  // drift -> (rotating, static)
    for (const auto& r : rows) {
        if (r.n != n || std::abs(r.beta - beta) > 1e-12 * std::max(1.0, std::abs(beta))) continue;
        if (r.status != "ok" || r.verdict == "none") continue;
        auto& v = votes[r.drift];
        (r.verdict == "rotating" ? v.first : v.second)++;
    }
    if (votes.empty()) {
        throw std::invalid_argument("no drift scan at beta=" + fmt(beta) + ", N=" + std::to_string(n));
    }
    DcrEstimate e;
    std::vector<double> ties;
    for (const auto& [d, v] : votes) {
        if (v.first == v.second) {
            ties.push_back(d);
        } else {
            e.verdicts.emplace_back(d, v.first > v.second);
        }
    }
    double first_rot = std::numeric_limits<double>::infinity();
    double last_static = -std::numeric_limits<double>::infinity();
    for (const auto& [d, rot] : e.verdicts) {
        if (rot) first_rot = std::min(first_rot, d);
        if (!rot) last_static = std::max(last_static, d);
    }
    if (!ties.empty() || first_rot < last_static) {
        e.status = DcrEstimate::Status::undetermined;
        e.offending = ties;
        for (const auto& [d, rot] : e.verdicts) {
            if (d >= first_rot && d <= last_static) e.offending.push_back(d);
        }
        std::sort(e.offending.begin(), e.offending.end());
        e.lower = std::numeric_limits<double>::quiet_NaN();
        e.upper = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    if (e.verdicts.empty()) {
        e.status = DcrEstimate::Status::undetermined;
        return e;
    }
    if (std::isinf(last_static)) {
        e.status = DcrEstimate::Status::all_rotating;
        e.lower = 0.0;
        e.upper = first_rot;
    } else if (std::isinf(first_rot)) {
        e.status = DcrEstimate::Status::none_rotating;
        e.lower = last_static;
    } else {
        e.status = DcrEstimate::Status::bracketed;
        e.lower = last_static;
        e.upper = first_rot;
    }
    return e;
}

}  // namespace rotors::harness
