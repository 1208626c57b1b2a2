#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotors/energy.hpp"
#include "rotors/interaction.hpp"
#include "rotors/lattice.hpp"
#include "rotors/observables.hpp"
#include "rotors/rng.hpp"
#include "rotors/spin_state.hpp"
#include "rotors/trajectory.hpp"

namespace rotors {

enum class Scheme { euler_maruyama, stochastic_heun };

/// d phi_x = (d - dH/dphi_x) dt + sqrt(2/beta) dW_x, modulo 2pi.
struct XYParams {
    double beta = 1.0;
    double drift = 0.0;
    Interaction interaction = Interaction::cosine();
    double dt = 0.005;
    Scheme scheme = Scheme::stochastic_heun;

    void validate() const {
        if (!(beta > 0.0)) throw std::invalid_argument("xy beta must be > 0");
        if (!(dt > 0.0)) throw std::invalid_argument("xy dt must be > 0");
        if (!std::isfinite(drift)) throw std::invalid_argument("xy drift must be finite");
    }

    double noise_amplitude() const { return std::sqrt(2.0 / beta); }
};

/// dH/dphi_x at the given angles: sum over neighbor slots of the pair torque.
inline double grad_site(std::span<const double> angles, const Lattice& lattice,
                        const Interaction& interaction, std::size_t x) {
    const double phi = angles[x];
    double g = 0.0;
    for (const NeighborSlot& n : lattice.neighbors(x)) {
        if (n.is_site()) {
            g += interaction.torque(phi - angles[n.site]);
        } else if (n.is_virtual()) {
            g += interaction.torque(phi - n.angle);
        }
    }
    return g;
}

inline double grad_site(const SpinState& state, const Lattice& lattice,
                        const Interaction& interaction, std::size_t x) {
    return grad_site(state.angles(), lattice, interaction, x);
}

/// Reusable buffers for stepping the XY dynamics without per-step allocation.
class XYIntegrator {
public:
    XYIntegrator(const Lattice& lattice, const XYParams& params)
        : lattice_(lattice), params_(params) {
        params_.validate();
        const std::size_t n = lattice.size();
        drift_.resize(n);
        predictor_.resize(n);
    }

    /// Synchronous update reading only `current`; `noise` holds one Wiener
    /// increment (variance dt) per site. Result is reduced to [0, 2pi).
    void step(std::span<const double> current, std::span<const double> noise,
              std::vector<double>& out) {
        const std::size_t n = lattice_.size();
        if (current.size() != n || noise.size() != n) {
            throw std::invalid_argument("xy step: state or noise size mismatch");
        }
        const double dt = params_.dt;
        const double d = params_.drift;
        const double amp = params_.noise_amplitude();
        for (std::size_t x = 0; x < n; ++x) {
            drift_[x] = -grad_site(current, lattice_, params_.interaction, x);
        }
        out.resize(n);
        if (params_.scheme == Scheme::euler_maruyama) {
            for (std::size_t x = 0; x < n; ++x) {
                out[x] = wrap_angle(current[x] + (d + drift_[x]) * dt + amp * noise[x]);
            }
            return;
        }
        for (std::size_t x = 0; x < n; ++x) {
            predictor_[x] = current[x] + (d + drift_[x]) * dt + amp * noise[x];
        }
        for (std::size_t x = 0; x < n; ++x) {
            const double corrected =
                0.5 * (drift_[x] - grad_site(predictor_, lattice_, params_.interaction, x));
            out[x] = wrap_angle(current[x] + (d + corrected) * dt + amp * noise[x]);
        }
    }

private:
    const Lattice& lattice_;
    XYParams params_;
    std::vector<double> drift_;
    std::vector<double> predictor_;
};

inline SpinState integrate_step(const SpinState& state, const Lattice& lattice,
                                const XYParams& params, std::span<const double> noise_slice) {
    if (state.is_clock()) throw std::invalid_argument("xy dynamics needs an xy state");
    detail::require_matching(state, lattice);
    XYIntegrator integrator(lattice, params);
    std::vector<double> next;
    integrator.step(state.angles(), noise_slice, next);
    SpinState out = SpinState::xy(state.size());
    out.assign_angles(std::move(next));
    return out;
}

/// Iterate integrate_step for round(t_end / dt) steps, recording observables
/// every round(sample_every / dt) steps (first record after one interval).
/// Step k uses the increments noise.increments(k, dt, ...).
inline Trajectory simulate_xy(SpinState state, const Lattice& lattice, const XYParams& params,
                              double t_end, double sample_every, const NoiseStream& noise,
                              bool record_full_states = false) {
    if (state.is_clock()) throw std::invalid_argument("xy dynamics needs an xy state");
    detail::require_matching(state, lattice);
    params.validate();
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
    if (!(sample_every > 0.0) || sample_every > t_end) {
        throw std::invalid_argument("sample_every must be in (0, t_end]");
    }
    const auto steps = static_cast<std::uint64_t>(std::llround(t_end / params.dt));
    const auto stride = static_cast<std::uint64_t>(std::llround(sample_every / params.dt));
    if (stride == 0 || std::abs(static_cast<double>(stride) * params.dt - sample_every) >
                           1e-9 * sample_every) {
        throw std::invalid_argument("sample_every must be a multiple of dt");
    }

    const std::size_t sites = lattice.size();
    Trajectory traj;
    traj.kind = SpinKind::xy;
    traj.sites = sites;
    traj.has_states = record_full_states;
    traj.samples.reserve(steps / stride);

    XYIntegrator integrator(lattice, params);
    std::vector<double> current(state.angles().begin(), state.angles().end());
    std::vector<double> next(sites);
    std::vector<double> dw(sites);
    for (std::uint64_t k = 0; k < steps; ++k) {
        noise.increments(k, params.dt, dw);
        integrator.step(current, dw, next);
        current.swap(next);
        if ((k + 1) % stride == 0) {
            state.assign_angles(current);
            traj.samples.push_back({static_cast<double>(k + 1) * params.dt, magnetization(state),
                                    energy(state, lattice, params.interaction) / sites});
            if (record_full_states) {
                traj.angles.insert(traj.angles.end(), current.begin(), current.end());
            }
        }
    }
    state.assign_angles(std::move(current));
    traj.final_state = std::move(state);
    traj.final_time = static_cast<double>(steps) * params.dt;
    return traj;
}

/// Co-rotating frame: psi_x(t) = phi_x(t) - d t (mod 2pi). Magnetization samples
/// pick up the factor e^{-i d t}; energies are unchanged.
inline Trajectory rotation_frame(const Trajectory& trajectory, double d) {
    if (trajectory.kind != SpinKind::xy) {
        throw std::invalid_argument("rotation_frame applies to xy trajectories");
    }
    Trajectory out = trajectory;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        auto& s = out.samples[i];
        s.m *= std::polar(1.0, -d * s.t);
        if (out.has_states) {
            const double shift = d * s.t;
            double* row = out.angles.data() + i * out.sites;
            for (std::size_t x = 0; x < out.sites; ++x) row[x] = wrap_angle(row[x] - shift);
        }
    }
    if (out.final_state) out.final_state->rotate_xy(-d * out.final_time);
    return out;
}

}  // namespace rotors
