#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rotors {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle to [0, 2pi).
inline double wrap_angle(double a) {
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

/// Shortest signed distance on the circle, in [-pi, pi].
inline double circular_difference(double a, double b) {
    double r = std::remainder(a - b, two_pi);
    return r;
}

namespace boundary {

/// Torus in every direction. A direction of length 1 wraps onto the site itself.
struct Periodic {};

/// Virtual spins fixed at `zeta` on every face of the box.
struct Coherent {
    double zeta = 0.0;
};

/// Clamped in x1 (virtual spins at 2pi*k/N beyond the top face and at
/// 2pi*(k + N/2)/N beyond the bottom face), periodic in x2 and x3.
struct InterfaceClamped {
    int k = 0;
    int n = 2;
};

/// Free boundary: neighbor slots leaving the box are absent.
struct Open {};

}  // namespace boundary

using Boundary = std::variant<boundary::Periodic, boundary::Coherent, boundary::InterfaceClamped,
                              boundary::Open>;

struct NeighborSlot {
    enum class Kind : std::uint8_t { site, virtual_spin, none };

    Kind kind = Kind::none;
    std::int32_t site = -1;
    double angle = 0.0;  // only meaningful for virtual spins

    bool is_site() const { return kind == Kind::site; }
    bool is_virtual() const { return kind == Kind::virtual_spin; }
};

using Dims = std::array<int, 3>;
using Coords = std::array<int, 3>;

/// Rectangular box of up to three dimensions with a precomputed neighbor table.
///
/// Sites are indexed as x = x1 + L1 * (x2 + L2 * x3). Every site carries six
/// neighbor slots in the order +x1, -x1, +x2, -x2, +x3, -x3. Periodic directions
/// keep all slots even when the extent is 1 or 2, so slots can repeat a site or
/// point back at the site itself.
class Lattice {
public:
    static constexpr int slots_per_site = 6;

    Lattice(Dims dims, Boundary boundary) : dims_(dims), boundary_(boundary) {
        for (int d = 0; d < 3; ++d) {
            if (dims_[d] < 1) {
                throw std::invalid_argument("lattice dimension " + std::to_string(d + 1) +
                                            " must be >= 1");
            }
        }
        if (const auto* iface = std::get_if<boundary::InterfaceClamped>(&boundary_)) {
            if (iface->n <= 0 || iface->n % 2 != 0) {
                throw std::invalid_argument("interface-clamped boundary requires an even N");
            }
            if (dims_[0] % 2 != 0) {
                throw std::invalid_argument("interface-clamped boundary requires an even L1");
            }
        }
        const std::size_t n = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
        table_.resize(n * slots_per_site);
        for (std::size_t x = 0; x < n; ++x) {
            const Coords c = coords(x);
            for (int axis = 0; axis < 3; ++axis) {
                for (int dir = 0; dir < 2; ++dir) {
                    table_[x * slots_per_site + 2 * axis + dir] =
                        make_slot(c, axis, dir == 0 ? +1 : -1);
                }
            }
        }
    }

    const Dims& dims() const { return dims_; }
    const Boundary& boundary() const { return boundary_; }
    std::size_t size() const { return table_.size() / slots_per_site; }

    /// Number of extents larger than one.
    int dimension() const {
        int d = 0;
        for (int l : dims_) d += l > 1 ? 1 : 0;
        return d;
    }

    bool is_periodic() const { return std::holds_alternative<boundary::Periodic>(boundary_); }

    /// Whether the given axis wraps around.
    bool periodic_along(int axis) const {
        if (is_periodic()) return true;
        if (std::holds_alternative<boundary::InterfaceClamped>(boundary_)) return axis != 0;
        return false;
    }

    std::span<const NeighborSlot, slots_per_site> neighbors(std::size_t x) const {
        return std::span<const NeighborSlot, slots_per_site>(table_.data() + x * slots_per_site,
                                                             slots_per_site);
    }

    Coords coords(std::size_t x) const {
        const auto i = static_cast<int>(x);
        return {i % dims_[0], (i / dims_[0]) % dims_[1], i / (dims_[0] * dims_[1])};
    }

    std::size_t index(const Coords& c) const {
        return static_cast<std::size_t>(c[0] + dims_[0] * (c[1] + dims_[1] * c[2]));
    }

    /// Site reached from x by moving `steps` along `axis`, wrapping around.
    std::size_t shifted(std::size_t x, int axis, int steps) const {
        Coords c = coords(x);
        const int l = dims_[axis];
        c[axis] = ((c[axis] + steps) % l + l) % l;
        return index(c);
    }

private:
    NeighborSlot make_slot(const Coords& c, int axis, int step) const {
        const int l = dims_[axis];
        const int target = c[axis] + step;
        NeighborSlot slot;
        if (target >= 0 && target < l) {
            Coords t = c;
            t[axis] = target;
            slot.kind = NeighborSlot::Kind::site;
            slot.site = static_cast<std::int32_t>(index(t));
            return slot;
        }
        if (periodic_along(axis)) {
            Coords t = c;
            t[axis] = (target + l) % l;
            slot.kind = NeighborSlot::Kind::site;
            slot.site = static_cast<std::int32_t>(index(t));
            return slot;
        }
        if (const auto* coh = std::get_if<boundary::Coherent>(&boundary_)) {
            slot.kind = NeighborSlot::Kind::virtual_spin;
            slot.angle = wrap_angle(coh->zeta);
            return slot;
        }
        if (const auto* iface = std::get_if<boundary::InterfaceClamped>(&boundary_)) {
            // Only axis 0 reaches here.
            slot.kind = NeighborSlot::Kind::virtual_spin;
            const int level = step > 0 ? iface->k : iface->k + iface->n / 2;
            slot.angle = wrap_angle(two_pi * level / iface->n);
            return slot;
        }
        return slot;  // open boundary
    }

    Dims dims_;
    Boundary boundary_;
    std::vector<NeighborSlot> table_;
};

}  // namespace rotors
