#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "rotors/energy.hpp"
#include "rotors/lattice.hpp"
#include "rotors/spin_state.hpp"
#include "support.hpp"

using namespace rotors;
using rotors::testing::random_clock;
using rotors::testing::random_xy;

TEST(Lattice, PeriodicTorusDegree) {
    const Lattice lat({2, 2, 2}, boundary::Periodic{});
    EXPECT_EQ(lat.size(), 8u);
    for (std::size_t x = 0; x < lat.size(); ++x) {
        for (const auto& n : lat.neighbors(x)) {
            EXPECT_TRUE(n.is_site());
            EXPECT_NE(static_cast<std::size_t>(n.site), x);
        }
    }
}

TEST(Lattice, DegenerateTorusPointsToItself) {
    const Lattice lat({1, 1, 1}, boundary::Periodic{});
    ASSERT_EQ(lat.size(), 1u);
    for (const auto& n : lat.neighbors(0)) {
        EXPECT_TRUE(n.is_site());
        EXPECT_EQ(n.site, 0);
    }
}

TEST(Lattice, CoherentFacesAreVirtual) {
    const Lattice lat({4, 4, 4}, boundary::Coherent{0.0});
    std::size_t virtual_slots = 0;
    for (std::size_t x = 0; x < lat.size(); ++x) {
        const Coords c = lat.coords(x);
        const bool face = std::ranges::any_of(c, [](int v) { return v == 0 || v == 3; });
        int here = 0;
        for (const auto& n : lat.neighbors(x)) {
            if (n.is_virtual()) {
                ++here;
                EXPECT_DOUBLE_EQ(n.angle, 0.0);
            }
        }
        EXPECT_EQ(here > 0, face);
        virtual_slots += here;
    }
    EXPECT_EQ(virtual_slots, 6u * 16u);
}

TEST(Lattice, PeriodicNeighborRelationIsSymmetric) {
    const Lattice lat({5, 3, 4}, boundary::Periodic{});
    for (std::size_t x = 0; x < lat.size(); ++x) {
        const auto nbrs = lat.neighbors(x);
        for (int slot = 0; slot < 6; ++slot) {
            const auto y = static_cast<std::size_t>(nbrs[slot].site);
            // The opposite slot of y leads back to x.
            const int back = slot ^ 1;
            EXPECT_EQ(static_cast<std::size_t>(lat.neighbors(y)[back].site), x);
        }
    }
}

TEST(Lattice, InterfaceClampedVirtualLevels) {
    const Lattice lat({4, 2, 2}, boundary::InterfaceClamped{1, 4});
    for (std::size_t x = 0; x < lat.size(); ++x) {
        const Coords c = lat.coords(x);
        const auto nbrs = lat.neighbors(x);
        EXPECT_EQ(nbrs[0].is_virtual(), c[0] == 3);
        EXPECT_EQ(nbrs[1].is_virtual(), c[0] == 0);
        if (c[0] == 3) {
            EXPECT_NEAR(nbrs[0].angle, std::numbers::pi / 2, 1e-15);
        }
        if (c[0] == 0) {
            EXPECT_NEAR(nbrs[1].angle, 3 * std::numbers::pi / 2, 1e-15);
        }
        for (int slot = 2; slot < 6; ++slot) EXPECT_TRUE(nbrs[slot].is_site());
    }
}

TEST(Lattice, RejectsBadInput) {
    EXPECT_THROW(Lattice({0, 2, 2}, boundary::Periodic{}), std::invalid_argument);
    EXPECT_THROW(Lattice({4, 2, 2}, boundary::InterfaceClamped{0, 5}), std::invalid_argument);
    EXPECT_THROW(Lattice({3, 2, 2}, boundary::InterfaceClamped{0, 4}), std::invalid_argument);
}

TEST(Lattice, OpenBoundaryHasNoOutsideSlots) {
    const Lattice single({1, 1, 1}, boundary::Open{});
    for (const auto& n : single.neighbors(0)) EXPECT_EQ(n.kind, NeighborSlot::Kind::none);
    const Lattice chain({3, 1, 1}, boundary::Open{});
    EXPECT_EQ(bond_count(chain), 2u);
}

TEST(InitState, CoherentClockIndex) {
    const Lattice lat({3, 2, 2}, boundary::Periodic{});
    const SpinState s = init_state(lat, SpinKind::clock, 6, init::CoherentIndex{2});
    for (std::size_t x = 0; x < s.size(); ++x) {
        EXPECT_EQ(s.index(x), 2);
        EXPECT_NEAR(s.angle(x), 2 * std::numbers::pi / 3, 1e-15);
    }
}

TEST(InitState, InterfaceSplitsHalves) {
    const Lattice lat({4, 2, 2}, boundary::Periodic{});
    const SpinState s = init_state(lat, SpinKind::clock, 4, init::Interface{0});
    int at_zero = 0, at_pi = 0;
    for (std::size_t x = 0; x < s.size(); ++x) {
        const bool upper = lat.coords(x)[0] >= 2;
        if (upper) {
            EXPECT_DOUBLE_EQ(s.angle(x), 0.0);
            ++at_zero;
        } else {
            EXPECT_NEAR(s.angle(x), std::numbers::pi, 1e-15);
            ++at_pi;
        }
    }
    EXPECT_EQ(at_zero, 8);
    EXPECT_EQ(at_pi, 8);
    EXPECT_THROW(init_state(lat, SpinKind::clock, 3, init::Interface{0}), std::invalid_argument);
}

TEST(InitState, RandomIsDeterministicPerSeed) {
    const Lattice lat({4, 4, 4}, boundary::Periodic{});
    const auto a = init_state(lat, SpinKind::clock, 3, init::UniformRandom{42});
    const auto b = init_state(lat, SpinKind::clock, 3, init::UniformRandom{42});
    const auto c = init_state(lat, SpinKind::clock, 3, init::UniformRandom{43});
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    std::set<int> seen(a.indices().begin(), a.indices().end());
    EXPECT_EQ(seen.size(), 3u);
}

TEST(SpinState, XYAnglesStayReduced) {
    SpinState s = SpinState::xy(3);
    s.set_angle(0, -0.5);
    s.set_angle(1, 7.0);
    s.set_angle(2, two_pi);
    for (double a : s.angles()) {
        EXPECT_GE(a, 0.0);
        EXPECT_LT(a, two_pi);
    }
    SpinState c = SpinState::clock(2, 5);
    c.set_index(0, -1);
    c.set_index(1, 12);
    EXPECT_EQ(c.index(0), 4);
    EXPECT_EQ(c.index(1), 2);
}

TEST(Energy, AlignedTorus) {
    for (int l : {1, 2, 3, 5}) {
        const Lattice lat({l, l, l}, boundary::Periodic{});
        const SpinState s = init_state(lat, SpinKind::xy, 1, init::CoherentAngle{0.4});
        EXPECT_NEAR(energy(s, lat, Interaction::cosine()), -3.0 * l * l * l, 1e-10);
    }
}

TEST(Energy, SingleRotatedInteriorSite) {
    // Six bonds go from -1 to -cos(pi/2) = 0.
    const Lattice lat({4, 4, 4}, boundary::Periodic{});
    SpinState s = init_state(lat, SpinKind::clock, 4, init::CoherentIndex{0});
    const double before = energy(s, lat, Interaction::cosine());
    s.set_index(lat.index({1, 2, 2}), 1);
    EXPECT_NEAR(energy(s, lat, Interaction::cosine()) - before, 6.0, 1e-12);
}

TEST(Energy, VeryNonlinearP1IsAffineInCosine) {
    CounterRng rng(7);
    for (const Boundary b : {Boundary{boundary::Periodic{}}, Boundary{boundary::Coherent{1.0}},
                             Boundary{boundary::Open{}}}) {
        const Lattice lat({3, 4, 2}, b);
        const double bonds = static_cast<double>(bond_count(lat));
        for (int trial = 0; trial < 20; ++trial) {
            const SpinState s = random_xy(lat, rng);
            const double cosine = energy(s, lat, Interaction::cosine());
            const double vn = energy(s, lat, Interaction::very_nonlinear(1.0));
            EXPECT_NEAR(vn, cosine / 2 - bonds / 2, 1e-12);
        }
    }
}

TEST(Energy, MatchesCoordinateWalkOnTorus) {
    CounterRng rng(11);
    const Dims dims{3, 4, 5};
    const Lattice lat(dims, boundary::Periodic{});
    for (const auto inter : {Interaction::cosine(), Interaction::very_nonlinear(3.0)}) {
        const SpinState s = random_xy(lat, rng);
        EXPECT_NEAR(energy(s, lat, inter),
                    rotors::testing::torus_energy_by_coordinates(s.angles(), dims, inter), 1e-10);
    }
}

TEST(Energy, TranslationInvariantOnTorus) {
    CounterRng rng(3);
    const Lattice lat({4, 3, 5}, boundary::Periodic{});
    const SpinState s = random_xy(lat, rng);
    const double h = energy(s, lat, Interaction::cosine());
    for (int axis = 0; axis < 3; ++axis) {
        SpinState shifted = SpinState::xy(lat.size());
        for (std::size_t x = 0; x < lat.size(); ++x) {
            shifted.set_angle(lat.shifted(x, axis, 1), s.angle(x));
        }
        EXPECT_NEAR(energy(shifted, lat, Interaction::cosine()), h, 1e-10 * std::abs(h));
    }
}

TEST(Energy, GlobalRotationInvariant) {
    CounterRng rng(5);
    const Lattice lat({4, 4, 4}, boundary::Periodic{});
    SpinState xy = random_xy(lat, rng);
    const double h = energy(xy, lat, Interaction::cosine());
    xy.rotate_xy(1.234);
    EXPECT_NEAR(energy(xy, lat, Interaction::cosine()), h, 1e-12 * lat.size());

    SpinState clock = random_clock(lat, 6, rng);
    const double hc = energy(clock, lat, Interaction::very_nonlinear(4.0));
    clock.rotate_clock(2);
    EXPECT_NEAR(energy(clock, lat, Interaction::very_nonlinear(4.0)), hc, 1e-12 * lat.size());
}

TEST(LocalDelta, IdentityMoveIsZero) {
    CounterRng rng(9);
    const Lattice lat({3, 3, 3}, boundary::Periodic{});
    const SpinState s = random_xy(lat, rng);
    EXPECT_EQ(local_energy_delta(s, lat, Interaction::cosine(), 4, s.angle(4)), 0.0);
}

TEST(LocalDelta, AlignedNeighborsOneClockStep) {
    for (int n : {3, 4, 6, 12}) {
        const Lattice lat({4, 4, 4}, boundary::Periodic{});
        const SpinState s = init_state(lat, SpinKind::clock, n, init::CoherentIndex{0});
        const double delta =
            local_energy_delta(s, lat, Interaction::cosine(), 21, two_pi / n);
        EXPECT_NEAR(delta, 6.0 * (1.0 - std::cos(two_pi / n)), 1e-12);
    }
}

TEST(LocalDelta, AgreesWithFullRecomputation) {
    CounterRng rng(13);
    const Interaction inters[] = {Interaction::cosine(), Interaction::very_nonlinear(6.0)};
    const Boundary bounds[] = {boundary::Periodic{}, boundary::Coherent{0.3},
                               boundary::InterfaceClamped{1, 4}, boundary::Open{}};
    int moves = 0;
    for (const auto& b : bounds) {
        const Lattice lat({4, 3, 2}, b);
        for (const auto& inter : inters) {
            SpinState s = random_xy(lat, rng);
            for (int i = 0; i < 125; ++i, ++moves) {
                const auto x = static_cast<std::size_t>(rng.below(lat.size()));
                const double a = two_pi * rng.uniform();
                const double before = energy(s, lat, inter);
                const double local = local_energy_delta(s, lat, inter, x, a);
                s.set_angle(x, a);
                EXPECT_LT(std::abs(local - (energy(s, lat, inter) - before)), 1e-10);
            }
        }
    }
    EXPECT_EQ(moves, 1000);
}

TEST(LocalDelta, SelfBondsDoNotContribute) {
    const Lattice lat({1, 1, 1}, boundary::Periodic{});
    SpinState s = SpinState::xy(1);
    EXPECT_EQ(local_energy_delta(s, lat, Interaction::cosine(), 0, 2.0), 0.0);
}
