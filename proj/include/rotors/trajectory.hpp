#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rotors/spin_state.hpp"

namespace rotors {

struct MagnetizationSample {
    double t = 0.0;
    std::complex<double> m;
    double energy_per_site = 0.0;
};

/// Time-stamped observable samples, optionally with full per-site snapshots
/// taken at the same times.
struct Trajectory {
    SpinKind kind = SpinKind::xy;
    int clock_size = 0;
    std::size_t sites = 0;

    std::vector<MagnetizationSample> samples;

    bool has_states = false;
    std::vector<double> angles;          // samples x sites, row-major
    std::vector<std::int32_t> indices;   // clock only, samples x sites

    std::optional<SpinState> final_state;
    double final_time = 0.0;

    std::span<const double> state_angles(std::size_t sample) const {
        return std::span<const double>(angles).subspan(sample * sites, sites);
    }
    std::span<const std::int32_t> state_indices(std::size_t sample) const {
        return std::span<const std::int32_t>(indices).subspan(sample * sites, sites);
    }
};

}  // namespace rotors
