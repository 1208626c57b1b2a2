#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rotors/lattice.hpp"
#include "rotors/rng.hpp"

namespace rotors {

enum class SpinKind { clock, xy };

/// Per-site angles. For clock states the integer index is the source of truth
/// and the angle 2*pi*k/N is derived from it; xy angles live in [0, 2pi).
class SpinState {
public:
    static SpinState clock(std::size_t sites, int n) {
        if (n < 2) throw std::invalid_argument("clock size N must be >= 2");
        SpinState s;
        s.kind_ = SpinKind::clock;
        s.n_ = n;
        s.angles_.assign(sites, 0.0);
        s.indices_.assign(sites, 0);
        return s;
    }

    static SpinState xy(std::size_t sites) {
        SpinState s;
        s.kind_ = SpinKind::xy;
        s.angles_.assign(sites, 0.0);
        return s;
    }

    SpinKind kind() const { return kind_; }
    bool is_clock() const { return kind_ == SpinKind::clock; }
    int clock_size() const { return n_; }
    std::size_t size() const { return angles_.size(); }

    double angle(std::size_t x) const { return angles_[x]; }
    int index(std::size_t x) const { return indices_[x]; }

    std::span<const double> angles() const { return angles_; }
    std::span<const int> indices() const { return indices_; }

    void set_index(std::size_t x, int k) {
        if (!is_clock()) throw std::logic_error("set_index on an xy state");
        k %= n_;
        if (k < 0) k += n_;
        indices_[x] = k;
        angles_[x] = clock_angle(k);
    }

    void set_angle(std::size_t x, double a) {
        if (is_clock()) throw std::logic_error("set_angle on a clock state");
        angles_[x] = wrap_angle(a);
    }

    /// Replace all xy angles; values are reduced to [0, 2pi).
    void assign_angles(std::vector<double> angles) {
        if (is_clock()) throw std::logic_error("assign_angles on a clock state");
        if (angles.size() != angles_.size()) throw std::invalid_argument("state size mismatch");
        for (double& a : angles) a = wrap_angle(a);
        angles_ = std::move(angles);
    }

    double clock_angle(int k) const { return two_pi * k / n_; }

    /// Rotate every spin: by `steps` clock units, or by `alpha` radians for xy.
    void rotate_clock(int steps) {
        for (std::size_t x = 0; x < size(); ++x) set_index(x, indices_[x] + steps);
    }
    void rotate_xy(double alpha) {
        for (double& a : angles_) a = wrap_angle(a + alpha);
    }

    bool operator==(const SpinState&) const = default;

private:
    SpinKind kind_ = SpinKind::xy;
    int n_ = 0;
    std::vector<double> angles_;
    std::vector<int> indices_;
};

namespace init {

/// All sites at clock index k (clock) or at angle 2*pi*k/N (xy with a grid size).
struct CoherentIndex {
    int k = 0;
};

/// All sites at a given angle (xy only).
struct CoherentAngle {
    double angle = 0.0;
};

/// i.i.d. uniform on the single-site state space.
struct UniformRandom {
    std::uint64_t seed = 0;
};

/// Upper half in x1 (x1 >= L1/2) at 2*pi*k/N, lower half at 2*pi*(k + N/2)/N.
struct Interface {
    int k = 0;
};

}  // namespace init

using InitSpec = std::variant<init::CoherentIndex, init::CoherentAngle, init::UniformRandom,
                              init::Interface>;

/// Build an initial state. `n` is the clock size; for xy states it sets the
/// angle grid used by CoherentIndex and Interface.
inline SpinState init_state(const Lattice& lattice, SpinKind kind, int n, const InitSpec& spec) {
    const std::size_t sites = lattice.size();
    SpinState s = kind == SpinKind::clock ? SpinState::clock(sites, n) : SpinState::xy(sites);
    auto place = [&](std::size_t x, int k) {
        if (kind == SpinKind::clock) {
            s.set_index(x, k);
        } else {
            s.set_angle(x, two_pi * k / n);
        }
    };
    auto require_grid = [&] {
        if (n < 1) throw std::invalid_argument("init: grid size N must be >= 1");
    };

    if (const auto* c = std::get_if<init::CoherentIndex>(&spec)) {
        require_grid();
        for (std::size_t x = 0; x < sites; ++x) place(x, c->k);
    } else if (const auto* a = std::get_if<init::CoherentAngle>(&spec)) {
        if (kind == SpinKind::clock) {
            throw std::invalid_argument("init: coherent angle needs an xy state; use a clock index");
        }
        for (std::size_t x = 0; x < sites; ++x) s.set_angle(x, a->angle);
    } else if (const auto* r = std::get_if<init::UniformRandom>(&spec)) {
        CounterRng rng(r->seed, 0x1417);
        for (std::size_t x = 0; x < sites; ++x) {
            if (kind == SpinKind::clock) {
                s.set_index(x, static_cast<int>(rng.below(static_cast<std::uint64_t>(n))));
            } else {
                s.set_angle(x, two_pi * rng.uniform());
            }
        }
    } else if (const auto* i = std::get_if<init::Interface>(&spec)) {
        if (n <= 0 || n % 2 != 0) throw std::invalid_argument("init: interface requires an even N");
        const int half = lattice.dims()[0] / 2;
        for (std::size_t x = 0; x < sites; ++x) {
            const bool upper = lattice.coords(x)[0] >= half;
            place(x, upper ? i->k : i->k + n / 2);
        }
    }
    return s;
}

}  // namespace rotors
