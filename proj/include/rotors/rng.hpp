#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace rotors {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Keyed 64-bit hash of a counter. Two rounds of SplitMix64 with the key folded
/// in between; distinct (key, counter) pairs give statistically independent words.
constexpr std::uint64_t counter_hash(std::uint64_t key, std::uint64_t counter) {
    return splitmix64(splitmix64(counter) ^ key);
}

/// Seed of replica `replica` in sweep cell `cell`:
///   splitmix64(splitmix64(splitmix64(master) ^ cell) ^ (replica + 1)).
/// `cell` is a hash of the cell's parameter values, not its position in the grid.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell,
                                    std::uint64_t replica) {
    return splitmix64(splitmix64(splitmix64(master) ^ cell) ^ (replica + 1));
}

/// Uniform double in the open interval (0, 1) from the top 53 bits.
constexpr double to_unit_open(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Sequential generator backed by counter_hash. Deterministic across platforms
/// because no std distribution is involved.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ull)) {}

    std::uint64_t next() { return counter_hash(key_, counter_++); }

    double uniform() { return to_unit_open(next()); }

    /// Exponential variate with the given rate.
    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Lemire's multiply-shift; the bias is below 2^-64 * n and irrelevant here.
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Gaussian increments addressed by (step, site). The value for a given address
/// depends only on the seed, so any sampling cadence or evaluation order sees the
/// same Brownian path.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(splitmix64(seed ^ 0xD1B54A32D192ED03ull) ^ splitmix64(stream)) {}

    /// Standard normal variate for (step, site), via Box-Muller.
    double standard_normal(std::uint64_t step, std::uint64_t site) const {
        const std::uint64_t step_key = counter_hash(key_, step);
        const double u1 = to_unit_open(counter_hash(step_key, 2 * site));
        const double u2 = to_unit_open(counter_hash(step_key, 2 * site + 1));
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Fill `out` with Wiener increments of variance dt for all sites at `step`.
    void increments(std::uint64_t step, double dt, std::span<double> out) const {
        const double scale = std::sqrt(dt);
        const std::uint64_t step_key = counter_hash(key_, step);
        for (std::size_t x = 0; x < out.size(); ++x) {
            const double u1 = to_unit_open(counter_hash(step_key, 2 * x));
            const double u2 = to_unit_open(counter_hash(step_key, 2 * x + 1));
            out[x] = scale * std::sqrt(-2.0 * std::log(u1)) *
                     std::cos(2.0 * std::numbers::pi * u2);
        }
    }

private:
    std::uint64_t key_;
};

}  // namespace rotors
