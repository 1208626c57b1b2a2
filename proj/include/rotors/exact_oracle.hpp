#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "rotors/clock_dynamics.hpp"
#include "rotors/energy.hpp"
#include "rotors/lattice.hpp"
#include "rotors/spin_state.hpp"
#include "rotors/trajectory.hpp"

namespace rotors {

inline constexpr std::size_t default_state_cap = 2'000'000;

/// Mixed-radix encoding of clock configurations: code = sum_x k_x * N^x, so
/// site 0 is the least significant digit.
class StateCodec {
public:
    StateCodec(int n, std::size_t sites, std::size_t cap = default_state_cap) : n_(n), sites_(sites) {
        if (n < 2) throw std::invalid_argument("state codec: N must be >= 2");
        double count = std::pow(static_cast<double>(n), static_cast<double>(sites));
        if (count > static_cast<double>(cap)) {
            throw std::length_error("state space N^sites = " + std::to_string(count) +
                                    " exceeds the cap " + std::to_string(cap));
        }
        count_ = 1;
        for (std::size_t i = 0; i < sites; ++i) count_ *= static_cast<std::size_t>(n);
    }

    std::size_t count() const { return count_; }
    int n() const { return n_; }
    std::size_t sites() const { return sites_; }

    template <class Int>
    std::size_t encode(std::span<const Int> indices) const {
        std::size_t code = 0;
        for (std::size_t x = sites_; x-- > 0;) code = code * n_ + static_cast<std::size_t>(indices[x]);
        return code;
    }

    std::size_t encode(const SpinState& s) const { return encode(s.indices()); }

    void decode(std::size_t code, SpinState& out) const {
        for (std::size_t x = 0; x < sites_; ++x) {
            out.set_index(x, static_cast<int>(code % n_));
            code /= n_;
        }
    }

private:
    int n_;
    std::size_t sites_;
    std::size_t count_ = 1;
};

/// Sparse CTMC generator in row (CSR) layout; off-diagonals only, with the
/// diagonal kept separately as the negative row sum.
struct GeneratorMatrix {
    std::size_t dimension = 0;
    std::vector<std::size_t> row_start;   // dimension + 1 entries
    std::vector<std::size_t> column;
    std::vector<double> rate;
    std::vector<double> diagonal;

    double max_exit_rate() const {
        double m = 0.0;
        for (double d : diagonal) m = std::max(m, -d);
        return m;
    }

    /// out = pi Q.
    void left_multiply(std::span<const double> pi, std::span<double> out) const {
        for (std::size_t i = 0; i < dimension; ++i) out[i] = pi[i] * diagonal[i];
        for (std::size_t i = 0; i < dimension; ++i) {
            const double p = pi[i];
            for (std::size_t e = row_start[i]; e < row_start[i + 1]; ++e) out[column[e]] += p * rate[e];
        }
    }

    /// Largest |row sum| over the rows.
    double max_row_sum() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < dimension; ++i) {
            double s = diagonal[i];
            for (std::size_t e = row_start[i]; e < row_start[i + 1]; ++e) s += rate[e];
            worst = std::max(worst, std::abs(s));
        }
        return worst;
    }
};

/// Entry (sigma, sigma^{x,+-}) = jump_rate(sigma, x, +-). Moves that land on the
/// same target (N = 2) are merged into one entry.
inline GeneratorMatrix build_generator(const Lattice& lattice, const ClockParams& params,
                                       std::size_t cap = default_state_cap) {
    const StateCodec codec(params.n, lattice.size(), cap);
    const ClockRateKernel kernel(params);
    const std::size_t dim = codec.count();
    const std::size_t sites = lattice.size();

    GeneratorMatrix q;
    q.dimension = dim;
    q.row_start.reserve(dim + 1);
    q.column.reserve(dim * 2 * sites);
    q.rate.reserve(dim * 2 * sites);
    q.diagonal.assign(dim, 0.0);
    q.row_start.push_back(0);

    SpinState s = SpinState::clock(sites, params.n);
    std::vector<std::pair<std::size_t, double>> row;
    std::size_t place = 1;  // N^x
    for (std::size_t code = 0; code < dim; ++code) {
        codec.decode(code, s);
        row.clear();
        place = 1;
        for (std::size_t x = 0; x < sites; ++x, place *= params.n) {
            const int k = s.index(x);
            const std::size_t up = k == params.n - 1 ? code - (params.n - 1) * place : code + place;
            const std::size_t down = k == 0 ? code + (params.n - 1) * place : code - place;
            row.emplace_back(up, kernel.rate(s, lattice, x, Move::plus));
            row.emplace_back(down, kernel.rate(s, lattice, x, Move::minus));
        }
        std::sort(row.begin(), row.end());
        double exit = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            exit += row[i].second;
            if (!q.column.empty() && q.column.size() > q.row_start.back() &&
                q.column.back() == row[i].first) {
                q.rate.back() += row[i].second;
            } else {
                q.column.push_back(row[i].first);
                q.rate.push_back(row[i].second);
            }
        }
        q.diagonal[code] = -exit;
        q.row_start.push_back(q.column.size());
    }
    return q;
}

struct StationaryDistribution {
    std::vector<double> pi;
    double residual = 0.0;       // max |(pi Q)_j|
    std::size_t iterations = 0;
    bool converged = false;
};

struct PowerIterationOptions {
    double tolerance = 1e-15;        // on the l1 change per iteration
    std::size_t max_iterations = 2'000'000;
    double uniformization_margin = 1.05;
};

inline double residual_norm(const GeneratorMatrix& q, std::span<const double> pi) {
    std::vector<double> r(q.dimension);
    q.left_multiply(pi, r);
    double worst = 0.0;
    for (double v : r) worst = std::max(worst, std::abs(v));
    return worst;
}

/// Power iteration on the uniformized chain P = I + Q / Lambda, with Lambda a
/// margin above the largest exit rate.
inline StationaryDistribution stationary_distribution(const GeneratorMatrix& q,
                                                      std::span<const double> start = {},
                                                      const PowerIterationOptions& opts = {}) {
    const std::size_t dim = q.dimension;
    StationaryDistribution out;
    std::vector<double> pi(dim, 1.0 / static_cast<double>(dim));
    if (!start.empty()) {
        if (start.size() != dim) throw std::invalid_argument("start vector has the wrong size");
        double total = 0.0;
        for (double v : start) total += v;
        for (std::size_t i = 0; i < dim; ++i) pi[i] = start[i] / total;
    }
    const double lambda = opts.uniformization_margin * q.max_exit_rate();
    if (!(lambda > 0.0)) throw std::invalid_argument("generator has no transitions");
    std::vector<double> flow(dim);
    for (out.iterations = 0; out.iterations < opts.max_iterations; ++out.iterations) {
        q.left_multiply(pi, flow);
        double change = 0.0, total = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double step = flow[i] / lambda;
            pi[i] += step;
            change += std::abs(step);
            total += pi[i];
        }
        for (double& v : pi) v /= total;
        if (change < opts.tolerance) {
            out.converged = true;
            break;
        }
    }
    for (double v : pi) {
        if (v < 0.0) throw std::runtime_error("power iteration produced a negative probability");
    }
    out.residual = residual_norm(q, pi);
    out.pi = std::move(pi);
    return out;
}

/// Strong connectivity of the transition graph (positive off-diagonal rates):
/// every state reachable from state 0 and state 0 reachable from every state.
/// For a finite chain this is equivalent to a unique stationary law with full support.
inline bool is_irreducible(const GeneratorMatrix& q) {
    const std::size_t dim = q.dimension;
    if (dim == 0) return false;
    std::vector<std::size_t> rev_start(dim + 1, 0);
    for (std::size_t e = 0; e < q.column.size(); ++e) {
        if (q.rate[e] > 0.0) ++rev_start[q.column[e] + 1];
    }
    for (std::size_t i = 0; i < dim; ++i) rev_start[i + 1] += rev_start[i];
    std::vector<std::size_t> rev(rev_start.back());
    std::vector<std::size_t> fill(rev_start.begin(), rev_start.end() - 1);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t e = q.row_start[i]; e < q.row_start[i + 1]; ++e) {
            if (q.rate[e] > 0.0) rev[fill[q.column[e]]++] = i;
        }
    }
    auto reaches_all = [&](const std::vector<std::size_t>& start, const std::vector<std::size_t>& adj,
                           bool forward) {
        std::vector<char> seen(dim, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t e = start[i]; e < start[i + 1]; ++e) {
                if (forward && !(q.rate[e] > 0.0)) continue;
                const std::size_t j = adj[e];
                if (!seen[j]) {
                    seen[j] = 1;
                    ++count;
                    stack.push_back(j);
                }
            }
        }
        return count == dim;
    };
    return reaches_all(q.row_start, q.column, true) && reaches_all(rev_start, rev, false);
}

/// Direct solve of pi Q = 0, sum(pi) = 1 by sparse LU of Q^T with one balance
/// equation replaced by the normalization. A successful factorization certifies
/// a one-dimensional null space.
inline StationaryDistribution stationary_distribution_direct(const GeneratorMatrix& q,
                                                             std::size_t max_states = 10'000) {
    const std::size_t dim = q.dimension;
    if (dim > max_states) {
        throw std::length_error("direct solve limited to " + std::to_string(max_states) + " states");
    }
    using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, long>;
    std::vector<Eigen::Triplet<double, long>> entries;
    const auto last = static_cast<long>(dim - 1);
    for (std::size_t i = 0; i < dim; ++i) {
        // Row j of Q^T collects column j of Q; drop row `last`, replaced below.
        if (static_cast<long>(i) != last) entries.emplace_back(i, i, q.diagonal[i]);
        for (std::size_t e = q.row_start[i]; e < q.row_start[i + 1]; ++e) {
            if (static_cast<long>(q.column[e]) != last) {
                entries.emplace_back(static_cast<long>(q.column[e]), static_cast<long>(i), q.rate[e]);
            }
        }
        entries.emplace_back(last, static_cast<long>(i), 1.0);
    }
    SpMat a(static_cast<long>(dim), static_cast<long>(dim));
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<long>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw std::runtime_error("generator is reducible: normalized balance system is singular");
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<long>(dim));
    rhs[last] = 1.0;
    Eigen::VectorXd x = lu.solve(rhs);
    StationaryDistribution out;
    out.pi.assign(x.data(), x.data() + dim);
    out.converged = true;
    out.residual = residual_norm(q, out.pi);
    return out;
}

/// Weights proportional to exp(-beta H) over every clock configuration.
inline std::vector<double> gibbs_distribution(const Lattice& lattice, const ClockParams& params,
                                              std::size_t cap = default_state_cap) {
    const StateCodec codec(params.n, lattice.size(), cap);
    SpinState s = SpinState::clock(lattice.size(), params.n);
    std::vector<double> h(codec.count());
    double h_min = std::numeric_limits<double>::infinity();
    for (std::size_t code = 0; code < codec.count(); ++code) {
        codec.decode(code, s);
        h[code] = energy(s, lattice, params.interaction);
        h_min = std::min(h_min, h[code]);
    }
    double z = 0.0;
    for (double& w : h) {
        w = std::exp(-params.beta * (w - h_min));
        z += w;
    }
    for (double& w : h) w /= z;
    return h;
}

/// -(1/beta) log Z, computed with a shifted exponent.
inline double free_energy(const Lattice& lattice, const ClockParams& params,
                          std::size_t cap = default_state_cap) {
    const StateCodec codec(params.n, lattice.size(), cap);
    SpinState s = SpinState::clock(lattice.size(), params.n);
    std::vector<double> h(codec.count());
    for (std::size_t code = 0; code < codec.count(); ++code) {
        codec.decode(code, s);
        h[code] = energy(s, lattice, params.interaction);
    }
    const double h_min = *std::min_element(h.begin(), h.end());
    double z = 0.0;
    for (double e : h) z += std::exp(-params.beta * (e - h_min));
    return h_min - std::log(z) / params.beta;
}

inline double total_variation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("total variation: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

/// max_sigma |pi(sigma) - pi(R sigma)|, R adding 1 (mod N) to every site index.
inline double check_rotation_invariance(std::span<const double> pi, int n, std::size_t sites) {
    const StateCodec codec(n, sites);
    if (codec.count() != pi.size()) throw std::invalid_argument("pi does not match N^sites");
    std::vector<int> digits(sites);
    double worst = 0.0;
    for (std::size_t code = 0; code < pi.size(); ++code) {
        std::size_t c = code;
        for (std::size_t x = 0; x < sites; ++x) {
            digits[x] = static_cast<int>((c % n + 1) % n);
            c /= n;
        }
        const std::size_t rotated = codec.encode(std::span<const int>(digits));
        worst = std::max(worst, std::abs(pi[code] - pi[rotated]));
    }
    return worst;
}

/// Occupation histogram of the recorded clock states after discarding the first
/// `burn_in_fraction` of samples. Samples sit on a uniform time grid, so equal
/// weights are time weights.
inline std::vector<double> empirical_occupation(const Trajectory& trajectory, std::size_t states,
                                                double burn_in_fraction = 0.1) {
    if (trajectory.kind != SpinKind::clock || !trajectory.has_states) {
        throw std::invalid_argument("empirical occupation needs recorded clock states");
    }
    const StateCodec codec(trajectory.clock_size, trajectory.sites, states);
    if (codec.count() != states) throw std::invalid_argument("state space mismatch");
    const std::size_t total = trajectory.samples.size();
    const auto first = static_cast<std::size_t>(std::floor(burn_in_fraction * total));
    if (first >= total) throw std::invalid_argument("no samples left after burn-in");
    std::vector<double> hist(states, 0.0);
    for (std::size_t i = first; i < total; ++i) {
        hist[codec.encode(trajectory.state_indices(i))] += 1.0;
    }
    for (double& h : hist) h /= static_cast<double>(total - first);
    return hist;
}

/// Time-weighted occupation, fed as the on_hold callback of simulate_clock.
/// Time before `t_from` is discarded.
class OccupationRecorder {
public:
    OccupationRecorder(int n, std::size_t sites, double t_from = 0.0)
        : codec_(n, sites), t_from_(t_from), time_(codec_.count(), 0.0) {}

    void operator()(const SpinState& s, double t0, double t1) {
        const double a = std::max(t0, t_from_);
        if (t1 > a) time_[codec_.encode(s)] += t1 - a;
    }

    std::vector<double> distribution() const {
        double total = 0.0;
        for (double v : time_) total += v;
        if (!(total > 0.0)) throw std::invalid_argument("no time recorded after burn-in");
        std::vector<double> p(time_);
        for (double& v : p) v /= total;
        return p;
    }

private:
    StateCodec codec_;
    double t_from_;
    std::vector<double> time_;
};

inline double empirical_vs_exact(const Trajectory& trajectory, std::span<const double> pi,
                                 double burn_in_fraction = 0.1) {
    const auto hist = empirical_occupation(trajectory, pi.size(), burn_in_fraction);
    return total_variation(hist, pi);
}

}  // namespace rotors
