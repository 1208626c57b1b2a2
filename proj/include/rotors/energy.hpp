#pragma once

#include <cstddef>
#include <stdexcept>

#include "rotors/interaction.hpp"
#include "rotors/lattice.hpp"
#include "rotors/spin_state.hpp"

namespace rotors {

namespace detail {
inline void require_matching(const SpinState& state, const Lattice& lattice) {
    if (state.size() != lattice.size()) {
        throw std::invalid_argument("state has " + std::to_string(state.size()) +
                                    " sites, lattice has " + std::to_string(lattice.size()));
    }
}
}  // namespace detail

/// H = sum over bonds of -u(phi_x - phi_y). Each site-site bond is counted once
/// (through its forward slot); each bond to a virtual boundary spin is counted once.
inline double energy(const SpinState& state, const Lattice& lattice,
                     const Interaction& interaction) {
    detail::require_matching(state, lattice);
    double h = 0.0;
    for (std::size_t x = 0; x < lattice.size(); ++x) {
        const double phi = state.angle(x);
        const auto nbrs = lattice.neighbors(x);
        for (int slot = 0; slot < Lattice::slots_per_site; ++slot) {
            const NeighborSlot& n = nbrs[slot];
            if (n.is_site()) {
                if (slot % 2 == 0) h += interaction.pair_energy(phi - state.angle(n.site));
            } else if (n.is_virtual()) {
                h += interaction.pair_energy(phi - n.angle);
            }
        }
    }
    return h;
}

/// H(after) - H(before) when site x alone moves to `new_angle`. Bonds of x to
/// itself (extent-1 periodic directions) move rigidly and contribute nothing.
inline double local_energy_delta(const SpinState& state, const Lattice& lattice,
                                 const Interaction& interaction, std::size_t x, double new_angle) {
    const double old_angle = state.angle(x);
    double delta = 0.0;
    for (const NeighborSlot& n : lattice.neighbors(x)) {
        double other;
        if (n.is_site()) {
            if (static_cast<std::size_t>(n.site) == x) continue;
            other = state.angle(n.site);
        } else if (n.is_virtual()) {
            other = n.angle;
        } else {
            continue;
        }
        delta += interaction.pair_energy(new_angle - other) -
                 interaction.pair_energy(old_angle - other);
    }
    return delta;
}

/// Number of bonds counted by energy().
inline std::size_t bond_count(const Lattice& lattice) {
    std::size_t bonds = 0;
    for (std::size_t x = 0; x < lattice.size(); ++x) {
        const auto nbrs = lattice.neighbors(x);
        for (int slot = 0; slot < Lattice::slots_per_site; ++slot) {
            if (nbrs[slot].is_virtual() || (nbrs[slot].is_site() && slot % 2 == 0)) ++bonds;
        }
    }
    return bonds;
}

}  // namespace rotors
