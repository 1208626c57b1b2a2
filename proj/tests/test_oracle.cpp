#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rotors/exact_oracle.hpp"
#include "support.hpp"

using namespace rotors;
using std::numbers::pi;

namespace {

const Lattice single_site({1, 1, 1}, boundary::Periodic{});

double row_entry(const GeneratorMatrix& q, std::size_t i, std::size_t j) {
    for (std::size_t e = q.row_start[i]; e < q.row_start[i + 1]; ++e) {
        if (q.column[e] == j) return q.rate[e];
    }
    return 0.0;
}

}  // namespace

// codec

TEST(StateCodec, RoundTripAndDigitOrder) {
    const StateCodec codec(3, 4);
    EXPECT_EQ(codec.count(), 81u);
    SpinState s = SpinState::clock(4, 3);
    for (std::size_t code = 0; code < codec.count(); ++code) {
        codec.decode(code, s);
        EXPECT_EQ(codec.encode(s), code);
    }
    s.set_index(0, 2);
    s.set_index(1, 0);
    s.set_index(2, 1);
    s.set_index(3, 0);
    EXPECT_EQ(codec.encode(s), 2u + 1u * 9u);
}

TEST(StateCodec, CapEnforced) {
    EXPECT_THROW(StateCodec(6, 9), std::length_error);  // 6^9 > 2e6
    EXPECT_NO_THROW(StateCodec(6, 8));
    EXPECT_THROW(StateCodec(3, 4, 80), std::length_error);
    const Lattice big({3, 3, 2}, boundary::Periodic{});
    EXPECT_THROW(build_generator(big, ClockParams::from_drift(1.0, 3, 0.0)), std::length_error);
    EXPECT_THROW(gibbs_distribution(big, ClockParams::from_drift(1.0, 3, 0.0)), std::length_error);
}

// build_generator

TEST(Generator, SingleSiteIsCycle) {
    for (int n : {3, 4, 6}) {
        const auto params = ClockParams::from_drift(1.3, n, 0.4);
        const auto q = build_generator(single_site, params);
        ASSERT_EQ(q.dimension, static_cast<std::size_t>(n));
        const double up = params.p_plus * std::exp(0.5 * 1.3 * 6 * (std::cos(two_pi / n) - 1));
        const double down = params.p_minus * std::exp(0.5 * 1.3 * 6 * (std::cos(-two_pi / n) - 1));
        for (int k = 0; k < n; ++k) {
            EXPECT_EQ(q.row_start[k + 1] - q.row_start[k], 2u);
            EXPECT_NEAR(row_entry(q, k, (k + 1) % n), up, 1e-14);
            EXPECT_NEAR(row_entry(q, k, (k + n - 1) % n), down, 1e-14);
            EXPECT_NEAR(q.diagonal[k], -(up + down), 1e-14);
        }
    }
}

TEST(Generator, TwoSitesNThreeCounting) {
    const Lattice lat({2, 1, 1}, boundary::Periodic{});
    const auto q = build_generator(lat, ClockParams::from_drift(0.8, 3, 0.3));
    EXPECT_EQ(q.dimension, 9u);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(q.row_start[i + 1] - q.row_start[i], 4u);
}

TEST(Generator, NTwoMovesMerge) {
    const Lattice lat({2, 1, 1}, boundary::Periodic{});
    const auto params = ClockParams::from_drift(0.8, 2, 0.3);
    const auto q = build_generator(lat, params);
    EXPECT_EQ(q.dimension, 4u);
    SpinState s = SpinState::clock(2, 2);
    const StateCodec codec(2, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(q.row_start[i + 1] - q.row_start[i], 2u);
        codec.decode(i, s);
        for (std::size_t x = 0; x < 2; ++x) {
            SpinState t = s;
            t.set_index(x, s.index(x) + 1);
            const double both =
                jump_rate(s, lat, params, x, Move::plus) + jump_rate(s, lat, params, x, Move::minus);
            EXPECT_NEAR(row_entry(q, i, codec.encode(t)), both, 1e-14);
        }
    }
}

TEST(Generator, EntriesAreJumpRates) {
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    const auto params = ClockParams::from_drift(0.9, 4, 0.7);
    const auto q = build_generator(lat, params);
    const StateCodec codec(4, 4);
    SpinState s = SpinState::clock(4, 4);
    for (std::size_t i = 0; i < q.dimension; ++i) {
        codec.decode(i, s);
        for (std::size_t x = 0; x < 4; ++x) {
            for (Move m : {Move::plus, Move::minus}) {
                SpinState t = s;
                t.set_index(x, s.index(x) + static_cast<int>(m));
                EXPECT_EQ(row_entry(q, i, codec.encode(t)), jump_rate(s, lat, params, x, m));
            }
        }
    }
}

TEST(Generator, RowSumsVanishOffDiagonalsPositive) {
    for (const Dims& dims : {Dims{2, 1, 1}, Dims{2, 2, 1}, Dims{2, 2, 2}}) {
        const Lattice lat(dims, boundary::Periodic{});
        for (double beta : {0.0, 0.5, 2.0}) {
            for (double d : {0.0, 1.0}) {
                const auto q = build_generator(lat, ClockParams::from_drift(beta, 3, d));
                // exit rates reach 1e5 at beta = 2; below ~100 the absolute bound applies
                if (q.max_exit_rate() < 100.0) {
                    EXPECT_LT(q.max_row_sum(), 1e-12);
                } else {
                    EXPECT_LT(q.max_row_sum() / q.max_exit_rate(), 1e-15);
                }
                for (double r : q.rate) EXPECT_GT(r, 0.0);
            }
        }
    }
}

TEST(Generator, BetaZeroIsUniform) {
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    const auto q = build_generator(lat, ClockParams::from_drift(0.0, 3, 0.8));
    const auto st = stationary_distribution(q);
    ASSERT_TRUE(st.converged);
    for (double p : st.pi) EXPECT_NEAR(p, 1.0 / 81, 1e-13);
}

// stationary_distribution

TEST(Stationary, SingleSiteUniform) {
    for (double beta : {0.0, 1.0}) {
        for (double d : {0.0, 0.5, 2.0}) {
            const auto q = build_generator(single_site, ClockParams::from_drift(beta, 5, d));
            const auto st = stationary_distribution(q);
            ASSERT_TRUE(st.converged);
            for (double p : st.pi) EXPECT_NEAR(p, 0.2, 1e-13);
            const auto direct = stationary_distribution_direct(q);
            for (double p : direct.pi) EXPECT_NEAR(p, 0.2, 1e-13);
        }
    }
}

TEST(Stationary, EqualsGibbsWithoutDrift) {
    struct Case {
        Dims dims;
        int n;
        double beta;
    };
    for (const Case& c : {Case{{2, 1, 1}, 3, 0.7}, Case{{2, 2, 1}, 3, 0.7}, Case{{2, 2, 2}, 3, 0.7},
                          Case{{2, 2, 1}, 4, 1.5}, Case{{2, 2, 1}, 3, 2.5}}) {
        const Lattice lat(c.dims, boundary::Periodic{});
        const auto params = ClockParams::from_drift(c.beta, c.n, 0.0);
        const auto q = build_generator(lat, params);
        const auto st = stationary_distribution(q);
        ASSERT_TRUE(st.converged);
        const auto g = gibbs_distribution(lat, params);
        EXPECT_LT(total_variation(st.pi, g), 1e-10) << c.dims[0] << c.dims[1] << c.dims[2] << " N=" << c.n;
        EXPECT_LT(residual_norm(q, g), 1e-12);
    }
}

TEST(Stationary, NormalizedAndNonNegative) {
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    const auto st = stationary_distribution(build_generator(lat, ClockParams::from_drift(1.0, 3, 1.0)));
    double sum = 0.0;
    for (double p : st.pi) {
        EXPECT_GE(p, 0.0);
        sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_LT(st.residual, 1e-12);
}

TEST(Stationary, DirectSolveAgrees) {
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    for (double d : {0.0, 0.5, 2.0}) {
        const auto q = build_generator(lat, ClockParams::from_drift(1.2, 4, d));
        const auto power = stationary_distribution(q);
        const auto direct = stationary_distribution_direct(q);
        EXPECT_LT(total_variation(power.pi, direct.pi), 1e-10);
        EXPECT_LT(direct.residual, 1e-12);
    }
}

TEST(Stationary, UniqueFromDistinctStarts) {
    // starts concentrated on two different aligned states land on the same vector
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    const auto q = build_generator(lat, ClockParams::from_drift(0.5, 3, 0.5));
    std::vector<double> a(q.dimension, 0.0), b(q.dimension, 0.0);
    a[0] = 1.0;
    b[q.dimension - 1] = 1.0;
    const auto pa = stationary_distribution(q, a);
    const auto pb = stationary_distribution(q, b);
    ASSERT_TRUE(pa.converged && pb.converged);
    EXPECT_LT(total_variation(pa.pi, pb.pi), 1e-10);
}

TEST(Stationary, UniqueAtLowTemperature) {
    // power iteration from an aligned start is metastable here; the factorization
    // certifies a one-dimensional null space instead
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    const auto q = build_generator(lat, ClockParams::from_drift(2.0, 3, 0.5));
    const auto direct = stationary_distribution_direct(q);
    const auto power = stationary_distribution(q);
    ASSERT_TRUE(power.converged);
    EXPECT_LT(direct.residual, 1e-12);
    EXPECT_LT(total_variation(power.pi, direct.pi), 1e-10);
    EXPECT_LT(check_rotation_invariance(direct.pi, 3, 4), 1e-10);
}

TEST(Stationary, ReducibleGeneratorDetected) {
    // two disconnected 2-cycles
    GeneratorMatrix q;
    q.dimension = 4;
    q.row_start = {0, 1, 2, 3, 4};
    q.column = {1, 0, 3, 2};
    q.rate = {1.0, 1.0, 1.0, 1.0};
    q.diagonal = {-1.0, -1.0, -1.0, -1.0};
    EXPECT_THROW(stationary_distribution_direct(q), std::runtime_error);
    EXPECT_FALSE(is_irreducible(q));
}

TEST(Stationary, IrreducibilityCheck) {
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    for (double d : {0.0, 1.0}) EXPECT_TRUE(is_irreducible(build_generator(lat, ClockParams::from_drift(1.0, 3, d))));
    // one-way ring 0 -> 1 -> 2 -> 0 is irreducible; cutting 2 -> 0 leaves 2 absorbing
    GeneratorMatrix ring;
    ring.dimension = 3;
    ring.row_start = {0, 1, 2, 3};
    ring.column = {1, 2, 0};
    ring.rate = {1.0, 1.0, 1.0};
    ring.diagonal = {-1.0, -1.0, -1.0};
    EXPECT_TRUE(is_irreducible(ring));
    ring.rate[2] = 0.0;
    ring.diagonal[2] = 0.0;
    EXPECT_FALSE(is_irreducible(ring));
}

TEST(Stationary, DirectSizeLimit) {
    const Lattice lat({2, 2, 2}, boundary::Periodic{});
    const auto q = build_generator(lat, ClockParams::from_drift(1.0, 3, 0.0));
    EXPECT_THROW(stationary_distribution_direct(q, 1000), std::length_error);
}

// gibbs

TEST(Gibbs, BetaZeroUniform) {
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    for (double p : gibbs_distribution(lat, ClockParams::from_drift(0.0, 4, 0.0))) {
        EXPECT_NEAR(p, 1.0 / 256, 1e-15);
    }
}

TEST(Gibbs, LowTemperatureConcentratesOnAlignedStates) {
    const Lattice lat({2, 1, 1}, boundary::Periodic{});
    const auto g = gibbs_distribution(lat, ClockParams::from_drift(40.0, 3, 0.0));
    const StateCodec codec(3, 2);
    double aligned_mass = 0.0;
    for (int k = 0; k < 3; ++k) {
        const std::vector<int> idx = {k, k};
        const double p = g[codec.encode(std::span<const int>(idx))];
        EXPECT_NEAR(p, 1.0 / 3, 1e-12);
        aligned_mass += p;
    }
    EXPECT_NEAR(aligned_mass, 1.0, 1e-12);
}

TEST(Gibbs, MatchesBoltzmannRatios) {
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    const auto params = ClockParams::from_drift(0.9, 3, 0.0);
    const auto g = gibbs_distribution(lat, params);
    const StateCodec codec(3, 4);
    SpinState a = SpinState::clock(4, 3), b = a;
    for (std::size_t i = 0; i < g.size(); i += 7) {
        codec.decode(i, a);
        codec.decode((i * 13 + 5) % g.size(), b);
        const double expect = std::exp(-0.9 * (energy(a, lat, params.interaction) - energy(b, lat, params.interaction)));
        EXPECT_NEAR(g[i] / g[codec.encode(b)], expect, 1e-12 * expect);
    }
}

TEST(Gibbs, FreeEnergyMonotoneInBeta) {
    // dF/dbeta = S / beta^2 >= 0: F rises towards the ground energy as beta grows,
    // i.e. F decreases with temperature
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    const auto interaction = Interaction::cosine();
    const double ground = energy(init_state(lat, SpinKind::clock, 3, init::CoherentIndex{0}), lat, interaction);
    double prev = -std::numeric_limits<double>::infinity();
    for (double beta = 0.1; beta < 5.0; beta += 0.3) {
        const double f = free_energy(lat, ClockParams::from_drift(beta, 3, 0.0));
        EXPECT_GT(f, prev) << beta;
        EXPECT_LE(f, ground - std::log(3.0) / beta + 1e-12);
        prev = f;
    }
    const double cold = free_energy(lat, ClockParams::from_drift(60.0, 3, 0.0));
    EXPECT_NEAR(cold, ground - std::log(3.0) / 60.0, 1e-9);
}

// rotation invariance

TEST(RotationInvariance, GibbsIsInvariant) {
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    for (int n : {3, 4}) {
        const auto g = gibbs_distribution(lat, ClockParams::from_drift(1.1, n, 0.0));
        EXPECT_LT(check_rotation_invariance(g, n, 4), 1e-12);
    }
}

TEST(RotationInvariance, DrivenStationaryIsInvariant) {
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    for (double beta : {0.3, 1.0, 3.0}) {
        for (double d : {0.25, 1.0, 4.0}) {
            const auto q = build_generator(lat, ClockParams::from_drift(beta, 3, d));
            const auto st = stationary_distribution(q);
            ASSERT_TRUE(st.converged);
            EXPECT_LT(check_rotation_invariance(st.pi, 3, 4), 1e-10) << beta << " " << d;
        }
    }
}

TEST(RotationInvariance, BrokenVectorDetected) {
    std::vector<double> v(27, 1.0 / 27);
    v[0] += 0.01;
    v[13] -= 0.01;
    EXPECT_GT(check_rotation_invariance(v, 3, 3), 0.005);
    EXPECT_THROW(check_rotation_invariance(std::vector<double>(26, 0.0), 3, 3), std::invalid_argument);
}

// empirical comparison

TEST(Empirical, SyntheticSamplesConverge) {
    const Lattice lat({2, 1, 1}, boundary::Periodic{});
    const auto g = gibbs_distribution(lat, ClockParams::from_drift(1.0, 3, 0.0));
    std::mt19937_64 gen(3);
    std::discrete_distribution<std::size_t> draw(g.begin(), g.end());
    const StateCodec codec(3, 2);
    double prev = 1.0;
    for (std::size_t count : {100u, 10'000u, 1'000'000u}) {
        Trajectory traj;
        traj.kind = SpinKind::clock;
        traj.clock_size = 3;
        traj.sites = 2;
        traj.has_states = true;
        SpinState s = SpinState::clock(2, 3);
        for (std::size_t i = 0; i < count; ++i) {
            codec.decode(draw(gen), s);
            traj.samples.push_back({static_cast<double>(i), magnetization(s), 0.0});
            traj.indices.insert(traj.indices.end(), s.indices().begin(), s.indices().end());
            traj.angles.insert(traj.angles.end(), s.angles().begin(), s.angles().end());
        }
        const double tv = empirical_vs_exact(traj, g, 0.0);
        EXPECT_LT(tv, prev);
        prev = tv;
    }
    EXPECT_LT(prev, 0.003);
}

TEST(Empirical, MismatchRejected) {
    const Lattice lat({2, 1, 1}, boundary::Periodic{});
    CounterRng rng(1);
    const auto params = ClockParams::from_drift(1.0, 3, 0.0);
    const SpinState s0 = init_state(lat, SpinKind::clock, 3, init::CoherentIndex{0});
    const auto no_states = simulate_clock(s0, lat, params, {10.0, 1.0, false}, rng);
    EXPECT_THROW(empirical_vs_exact(no_states, std::vector<double>(9, 1.0 / 9)), std::invalid_argument);
    const auto with_states = simulate_clock(s0, lat, params, {10.0, 1.0, true}, rng);
    EXPECT_THROW(empirical_vs_exact(with_states, std::vector<double>(27, 1.0 / 27)), std::invalid_argument);
}

TEST(Empirical, HoldingTimesCoverRun) {
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    const auto params = ClockParams::from_drift(0.5, 3, 0.5);
    CounterRng rng(4);
    double covered = 0.0, last_end = 0.0;
    bool contiguous = true;
    const auto traj = simulate_clock(init_state(lat, SpinKind::clock, 3, init::CoherentIndex{0}), lat, params,
                                     {50.0, 1.0, false}, rng, [&](const SpinState&, double t0, double t1) {
                                         contiguous = contiguous && t0 == last_end && t1 >= t0;
                                         last_end = t1;
                                         covered += t1 - t0;
                                     });
    EXPECT_TRUE(contiguous);
    EXPECT_EQ(last_end, traj.final_time);
    EXPECT_NEAR(covered, 50.0, 1e-9);
}

TEST(Empirical, SamplerMatchesOracle) {
    const Lattice lat({2, 2, 1}, boundary::Periodic{});
    for (double d : {0.0, 0.5}) {
        const auto params = ClockParams::from_drift(0.5, 3, d);
        const auto pi_exact = stationary_distribution(build_generator(lat, params)).pi;
        CounterRng rng(derive_seed(2024, d > 0, 0));
        OccupationRecorder occupation(3, 4, 1000.0);
        simulate_clock(init_state(lat, SpinKind::clock, 3, init::CoherentIndex{0}), lat, params,
                       {2e4, 10.0, false}, rng, std::ref(occupation));
        EXPECT_LT(total_variation(occupation.distribution(), pi_exact), 0.04) << d;
    }
}
