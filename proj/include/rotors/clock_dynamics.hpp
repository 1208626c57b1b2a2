#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rotors/energy.hpp"
#include "rotors/interaction.hpp"
#include "rotors/lattice.hpp"
#include "rotors/observables.hpp"
#include "rotors/rng.hpp"
#include "rotors/spin_state.hpp"
#include "rotors/trajectory.hpp"

namespace rotors {

/// Parameters of the driven N-clock jump process.
struct ClockParams {
    double beta = 1.0;
    int n = 6;
    double p_plus = 1.0;
    double p_minus = 1.0;
    Interaction interaction = Interaction::cosine();

    /// p_plus = exp(d/2), p_minus = exp(-d/2).
    static ClockParams from_drift(double beta, int n, double drift,
                                  Interaction interaction = Interaction::cosine()) {
        if (!(drift >= 0.0)) throw std::invalid_argument("clock drift must be >= 0");
        ClockParams p{beta, n, std::exp(0.5 * drift), std::exp(-0.5 * drift), interaction};
        p.validate();
        return p;
    }

    static ClockParams from_rates(double beta, int n, double p_plus, double p_minus,
                                  Interaction interaction = Interaction::cosine()) {
        ClockParams p{beta, n, p_plus, p_minus, interaction};
        p.validate();
        return p;
    }

    double drift() const { return std::log(p_plus / p_minus); }
    double step() const { return two_pi / n; }

    void validate() const {
        if (!(beta >= 0.0)) throw std::invalid_argument("clock beta must be >= 0");
        if (n < 2) throw std::invalid_argument("clock size N must be >= 2");
        if (!(p_minus > 0.0)) throw std::invalid_argument("p_minus must be > 0");
        if (!(p_plus >= p_minus)) throw std::invalid_argument("p_plus must be >= p_minus");
    }
};

struct ClockSchedule {
    double t_end = 1.0;
    double sample_every = 0.1;
    bool record_full_states = false;

    void validate() const {
        if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
        if (!(sample_every > 0.0)) throw std::invalid_argument("sample_every must be > 0");
        if (sample_every > t_end) throw std::invalid_argument("sample_every must be <= t_end");
    }
};

enum class Move : int { plus = +1, minus = -1 };

/// Rate evaluation with the coupling differences for on-grid neighbors tabulated.
///   rate(x, +-) = p_+- * exp{(beta/2) sum_y [u(phi_x - phi_y +- 2pi/N) - u(phi_x - phi_y)]}
class ClockRateKernel {
public:
    explicit ClockRateKernel(const ClockParams& params) : params_(params) {
        params_.validate();
        const int n = params_.n;
        plus_.resize(n);
        minus_.resize(n);
        for (int j = 0; j < n; ++j) {
            const double delta = two_pi * j / n;
            const double u0 = params_.interaction.coupling(delta);
            plus_[j] = params_.interaction.coupling(delta + params_.step()) - u0;
            minus_[j] = params_.interaction.coupling(delta - params_.step()) - u0;
        }
    }

    const ClockParams& params() const { return params_; }

    double rate(const SpinState& state, const Lattice& lattice, std::size_t x, Move move) const {
        const bool plus = move == Move::plus;
        const std::vector<double>& table = plus ? plus_ : minus_;
        const int n = params_.n;
        const int kx = state.index(x);
        const double shift = plus ? params_.step() : -params_.step();
        double sum = 0.0;
        for (const NeighborSlot& slot : lattice.neighbors(x)) {
            if (slot.is_site()) {
                int j = kx - state.index(slot.site);
                if (j < 0) j += n;
                sum += table[j];
            } else if (slot.is_virtual()) {
                const double delta = state.angle(x) - slot.angle;
                sum += params_.interaction.coupling(delta + shift) -
                       params_.interaction.coupling(delta);
            }
        }
        return (plus ? params_.p_plus : params_.p_minus) * std::exp(0.5 * params_.beta * sum);
    }

private:
    ClockParams params_;
    std::vector<double> plus_;
    std::vector<double> minus_;
};

namespace detail {
inline void require_clock(const SpinState& state, const ClockParams& params) {
    if (!state.is_clock()) throw std::invalid_argument("clock dynamics needs a clock state");
    if (state.clock_size() != params.n) {
        throw std::invalid_argument("state clock size " + std::to_string(state.clock_size()) +
                                    " does not match params N = " + std::to_string(params.n));
    }
}
}  // namespace detail

inline double jump_rate(const SpinState& state, const Lattice& lattice, const ClockParams& params,
                        std::size_t x, Move move) {
    detail::require_clock(state, params);
    return ClockRateKernel(params).rate(state, lattice, x, move);
}

/// B = p_plus * exp((beta/2) * 6 * m), m = max_theta |u(theta + 2pi/N) - u(theta)|.
/// For the cosine m = 2 sin(pi/N), so B = p_plus * exp(6 beta sin(pi/N)).
inline double rate_bound(const ClockParams& params) {
    const double m = params.interaction.max_coupling_change(params.step());
    return params.p_plus * std::exp(0.5 * params.beta * Lattice::slots_per_site * m);
}

/// Rejection kinetic Monte Carlo. Proposals arrive at total rate 2 * |sites| * B;
/// each picks a uniform site and direction and is accepted with probability
/// rate / B. Samples are taken at t = k * sample_every, k = 1..floor(t_end / sample_every),
/// and record the state holding at that time.
/// `on_hold(state, t0, t1)` is called for every interval [t0, t1) during which
/// the configuration stayed fixed, the last one ending at the final time.
template <class OnHold>
inline Trajectory simulate_clock(SpinState state, const Lattice& lattice, const ClockParams& params,
                                 const ClockSchedule& schedule, CounterRng& rng, OnHold&& on_hold) {
    detail::require_clock(state, params);
    detail::require_matching(state, lattice);
    schedule.validate();

    const ClockRateKernel kernel(params);
    const double bound = rate_bound(params);
    const std::size_t sites = lattice.size();
    const double total_rate = 2.0 * static_cast<double>(sites) * bound;
    const auto n_samples =
        static_cast<std::size_t>(std::floor(schedule.t_end / schedule.sample_every + 1e-9));

    Trajectory traj;
    traj.kind = SpinKind::clock;
    traj.clock_size = params.n;
    traj.sites = sites;
    traj.has_states = schedule.record_full_states;
    traj.samples.reserve(n_samples);
    if (traj.has_states) {
        traj.angles.reserve(n_samples * sites);
        traj.indices.reserve(n_samples * sites);
    }

    auto record = [&](double t) {
        traj.samples.push_back(
            {t, magnetization(state), energy(state, lattice, params.interaction) / sites});
        if (traj.has_states) {
            traj.angles.insert(traj.angles.end(), state.angles().begin(), state.angles().end());
            traj.indices.insert(traj.indices.end(), state.indices().begin(),
                                state.indices().end());
        }
    };

    double t = 0.0, t_changed = 0.0;
    std::size_t next_sample = 1;
    while (next_sample <= n_samples) {
        t += rng.exponential(total_rate);
        while (next_sample <= n_samples &&
               static_cast<double>(next_sample) * schedule.sample_every <= t) {
            record(static_cast<double>(next_sample) * schedule.sample_every);
            ++next_sample;
        }
        if (next_sample > n_samples) break;

        const auto x = static_cast<std::size_t>(rng.below(sites));
        const Move move = rng.below(2) == 0 ? Move::plus : Move::minus;
        const double rate = kernel.rate(state, lattice, x, move);
        if (rate > bound * (1.0 + 1e-12)) {
            throw std::logic_error("clock rate " + std::to_string(rate) + " exceeds bound " +
                                   std::to_string(bound));
        }
        if (rng.uniform() * bound < rate) {
            on_hold(std::as_const(state), t_changed, t);
            t_changed = t;
            state.set_index(x, state.index(x) + static_cast<int>(move));
        }
    }
    traj.final_time = static_cast<double>(n_samples) * schedule.sample_every;
    on_hold(std::as_const(state), t_changed, traj.final_time);
    traj.final_state = std::move(state);
    return traj;
}

inline Trajectory simulate_clock(SpinState state, const Lattice& lattice, const ClockParams& params,
                                 const ClockSchedule& schedule, CounterRng& rng) {
    return simulate_clock(std::move(state), lattice, params, schedule, rng,
                          [](const SpinState&, double, double) {});
}

struct DiffusivePreset {
    ClockParams params;
    double time_scale = 1.0;  // clock time per unit of XY time
};

/// Clock parameters whose time-accelerated dynamics approach the driven XY
/// Langevin equation with drift d_xy and noise 2/beta as N grows.
///
/// With step a = 2pi/N and rates p_+- exp(-(beta/2) dH_+-), a second-order
/// expansion of the jump generator accelerated by A gives
///   drift    A a (p+ - p-) - A a^2 beta (p+ + p-)/2 * dH/dphi
///   noise    A a^2 (p+ + p-) / 2 * d^2/dphi^2.
/// Matching d_xy - dH/dphi and (1/beta) d^2/dphi^2 yields
///   p_+- = 1 +- pi beta d_xy / N,   A = N^2 / (4 pi^2 beta).
inline DiffusivePreset diffusive_preset(double beta, double d_xy, int n,
                                        Interaction interaction = Interaction::cosine()) {
    if (!(beta > 0.0)) throw std::invalid_argument("diffusive preset needs beta > 0");
    if (!(d_xy >= 0.0)) throw std::invalid_argument("diffusive preset needs d_xy >= 0");
    const double shift = std::numbers::pi * beta * d_xy / n;
    if (!(shift < 1.0)) {
        throw std::invalid_argument("diffusive preset needs N > pi * beta * d_xy");
    }
    DiffusivePreset out;
    out.params = ClockParams::from_rates(beta, n, 1.0 + shift, 1.0 - shift, interaction);
    out.time_scale = static_cast<double>(n) * n / (4.0 * std::numbers::pi * std::numbers::pi * beta);
    return out;
}

}  // namespace rotors
