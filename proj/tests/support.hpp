#pragma once

// Test-only helpers: random configurations and independent reference
// evaluations that do not go through the library's neighbor tables.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rotors/interaction.hpp"
#include "rotors/lattice.hpp"
#include "rotors/rng.hpp"
#include "rotors/spin_state.hpp"

namespace rotors::testing {

inline SpinState random_clock(const Lattice& lattice, int n, CounterRng& rng) {
    SpinState s = SpinState::clock(lattice.size(), n);
    for (std::size_t x = 0; x < s.size(); ++x) s.set_index(x, static_cast<int>(rng.below(n)));
    return s;
}

inline SpinState random_xy(const Lattice& lattice, CounterRng& rng) {
    SpinState s = SpinState::xy(lattice.size());
    for (std::size_t x = 0; x < s.size(); ++x) s.set_angle(x, two_pi * rng.uniform());
    return s;
}

/// Energy on a periodic box by walking coordinates: one bond per site and axis.
inline double torus_energy_by_coordinates(std::span<const double> angles, const Dims& dims,
                                          const Interaction& interaction) {
    double h = 0.0;
    for (int z = 0; z < dims[2]; ++z) {
        for (int y = 0; y < dims[1]; ++y) {
            for (int x = 0; x < dims[0]; ++x) {
                auto at = [&](int i, int j, int k) {
                    i = (i + dims[0]) % dims[0];
                    j = (j + dims[1]) % dims[1];
                    k = (k + dims[2]) % dims[2];
                    return angles[i + dims[0] * (j + dims[1] * k)];
                };
                const double phi = at(x, y, z);
                h += interaction.pair_energy(phi - at(x + 1, y, z));
                h += interaction.pair_energy(phi - at(x, y + 1, z));
                h += interaction.pair_energy(phi - at(x, y, z + 1));
            }
        }
    }
    return h;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

/// Critical value of the two-sample KS statistic at level alpha = 0.01.
inline double ks_critical_1pct(std::size_t n, std::size_t m) {
    return 1.628 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

}  // namespace rotors::testing
