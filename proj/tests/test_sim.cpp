#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "msf/sim.hpp"

using namespace msf;

namespace {

FactorySpec bh_factory(int k, std::size_t rounds) {
    FactorySpec spec;
    for (std::size_t i = 0; i < rounds; ++i)
        spec.rounds.push_back({bravyi_haah(k), CheckMode::module, 1});
    return spec;
}

long double binom_pmf(std::size_t n, std::size_t t, long double p) {
    long double term = std::pow(1.0L - p, static_cast<long double>(n));
    for (std::size_t k = 0; k < t; ++k)
        term *= static_cast<long double>(n - k) / static_cast<long double>(k + 1) * p / (1.0L - p);
    return term;
}

}  // namespace

TEST_CASE("firewall shuffle: canonical interleave is exact") {
    TrialRng rng(1, 1);
    SUBCASE("three branches of width one collapse to a single block") {
        std::vector<BinaryMatrix> branches(3, BinaryMatrix(1, 1));
        branches[1].set(0, 0, true);
        const auto blocks = firewall_shuffle(branches, ShufflePolicy::canonical, rng);
        REQUIRE(blocks.size() == 1);
        CHECK(!blocks[0].get(0, 0));
        CHECK(blocks[0].get(0, 1));
        CHECK(!blocks[0].get(0, 2));
    }
    SUBCASE("block t receives qubit t of every branch") {
        const std::size_t n = 5, width = 7;
        std::vector<BinaryMatrix> branches;
        for (std::size_t i = 0; i < n; ++i) {
            BinaryMatrix b(1, width);
            for (std::size_t t = 0; t < width; ++t)
                if (((i * 31 + t * 17) % 3) == 0) b.set(0, t, true);
            branches.push_back(b);
        }
        const auto blocks = firewall_shuffle(branches, ShufflePolicy::canonical, rng);
        REQUIRE(blocks.size() == width);
        for (std::size_t t = 0; t < width; ++t)
            for (std::size_t i = 0; i < n; ++i)
                CHECK(blocks[t].get(0, i) == branches[i].get(0, t));
    }
    SUBCASE("width mismatch is rejected") {
        std::vector<BinaryMatrix> branches{BinaryMatrix(1, 3), BinaryMatrix(1, 4)};
        CHECK_THROWS_AS(firewall_shuffle(branches, ShufflePolicy::canonical, rng),
                        std::invalid_argument);
    }
}

TEST_CASE("two identical corrupted branches never deliver a lone error") {
    TrialRng rng(2, 0);
    for (std::size_t width = 2; width <= 8; ++width) {
        for (std::uint64_t pattern = 1; pattern < (std::uint64_t(1) << width); ++pattern) {
            std::vector<BinaryMatrix> branches(4, BinaryMatrix(1, width));
            for (std::size_t t = 0; t < width; ++t) {
                if ((pattern >> t) & 1u) {
                    branches[1].set(0, t, true);
                    branches[3].set(0, t, true);
                }
            }
            const auto blocks = firewall_shuffle(branches, ShufflePolicy::canonical, rng);
            for (const auto& block : blocks) {
                const std::size_t w = block.row_weight(0);
                CHECK((w == 0 || w == 2));
            }
        }
    }
}

TEST_CASE("firewall lemma on a real module") {
    // Per-block detection: with exactly two corrupt branches a module check
    // passes only when the branch positions collide in g0 and the error
    // patterns are identical.
    const ProtocolCode code = bravyi_haah(2);
    const std::size_t width = 4;
    TrialRng rng(3, 0);

    auto module_passes = [&](std::size_t a, std::size_t b, std::uint64_t fa, std::uint64_t fb) {
        std::vector<BinaryMatrix> branches(code.n, BinaryMatrix(1, width));
        for (std::size_t t = 0; t < width; ++t) {
            if ((fa >> t) & 1u) branches[a].set(0, t, true);
            if ((fb >> t) & 1u) branches[b].set(0, t, true);
        }
        const auto blocks = firewall_shuffle(branches, ShufflePolicy::canonical, rng);
        for (const auto& x : blocks)
            if (!(code.g0 * x.transposed()).is_zero()) return false;
        return true;
    };

    // Column-collision pairs are exactly the undetected weight-2 inputs.
    std::size_t colliding_a = 0, colliding_b = 0, free_a = 0, free_b = 0;
    bool found_collide = false, found_free = false;
    for (std::size_t a = 0; a < code.n && !(found_collide && found_free); ++a) {
        for (std::size_t b = a + 1; b < code.n; ++b) {
            BinaryMatrix u(1, code.n);
            u.set(0, a, true);
            u.set(0, b, true);
            if ((code.g0 * u.transposed()).is_zero()) {
                colliding_a = a;
                colliding_b = b;
                found_collide = true;
            } else {
                free_a = a;
                free_b = b;
                found_free = true;
            }
        }
    }
    REQUIRE(found_collide);
    REQUIRE(found_free);

    for (std::uint64_t fa = 1; fa < 16; ++fa) {
        for (std::uint64_t fb = 1; fb < 16; ++fb) {
            if (fa != fb) {
                CHECK(!module_passes(colliding_a, colliding_b, fa, fb));
            } else {
                CHECK(module_passes(colliding_a, colliding_b, fa, fb));
                CHECK(!module_passes(free_a, free_b, fa, fb));
            }
        }
    }
}

TEST_CASE("brute simulation basics") {
    SUBCASE("eps = 0 gives all successes") {
        SimConfig config{bh_factory(2, 2), 0.0, 5000, 42, SimMethod::brute,
                         ShufflePolicy::canonical};
        const SimCounts counts = simulate_brute(config);
        CHECK(counts.n_success == 5000);
        CHECK(counts.n_fail == 0);
        CHECK(counts.n_error == 0);
    }
    SUBCASE("round-count preconditions") {
        SimConfig config{bh_factory(2, 1), 1e-3, 10, 1, SimMethod::brute,
                         ShufflePolicy::canonical};
        CHECK_THROWS_AS(simulate_brute(config), std::invalid_argument);
        config.factory = bh_factory(2, 3);
        CHECK_NOTHROW(simulate_brute(config));
    }
    SUBCASE("determinism across repeat runs and thread counts") {
        SimConfig config{bh_factory(6, 2), 5e-3, 200000, 1234, SimMethod::brute,
                         ShufflePolicy::canonical};
        setenv("MSF_THREADS", "1", 1);
        const SimCounts a = simulate_brute(config);
        setenv("MSF_THREADS", "2", 1);
        const SimCounts b = simulate_brute(config);
        unsetenv("MSF_THREADS");
        const SimCounts c = simulate_brute(config);
        CHECK(a.n_success == b.n_success);
        CHECK(a.n_fail == b.n_fail);
        CHECK(a.n_error == b.n_error);
        CHECK(a.n_success == c.n_success);
        CHECK(a.n_error == c.n_error);
        // A different seed gives a different sample.
        SimConfig other = config;
        other.seed = 77;
        const SimCounts d = simulate_brute(other);
        CHECK(d.n_fail != a.n_fail);
    }
}

TEST_CASE("two-round brute force tracks the analytic estimate") {
    // Moderate budget here; the acceptance suite runs the full grid.
    const int k = 2;
    const double eps = 1e-2;
    SimConfig config{bh_factory(k, 2), eps, 40000000, 99, SimMethod::brute,
                     ShufflePolicy::canonical};
    const SimCounts counts = simulate_brute(config);
    REQUIRE(counts.n_error > 10);
    const double sim = counts.round2_branch_error_rate;
    const double analytic = track_module_checked(config.factory.codes(), eps).back().eps_glo;
    const double se = std::sqrt(sim * (1 - sim) / double(counts.n_success + counts.n_error));
    CHECK(std::fabs(sim - analytic) <= std::max(0.10 * analytic, 3 * se));
}

TEST_CASE("rare-events preconditions") {
    SimCounts stats;
    stats.round2_branch_error_rate = 0.0;
    SimConfig config{bh_factory(2, 3), 1e-3, 100, 5, SimMethod::rare, ShufflePolicy::canonical};
    CHECK_THROWS_AS(simulate_rare(config, stats), InvalidPreselection);
    config.factory = bh_factory(2, 2);
    stats.round2_branch_error_rate = 1e-6;
    CHECK_THROWS_AS(simulate_rare(config, stats), std::invalid_argument);
}

TEST_CASE("rare-events run agrees with the tracked three-round value") {
    const double eps = 1e-3;
    SimConfig config{bh_factory(2, 3), eps, 60000, 2024, SimMethod::rare,
                     ShufflePolicy::canonical};
    const auto codes = config.factory.codes();
    const auto reports = track_module_checked(codes, eps);

    SimCounts stats;
    stats.round2_branch_error_rate = reports[1].eps_glo;
    const SimCounts counts = simulate_rare(config, stats);
    CHECK(counts.trials() == 60000);
    const SimEstimate est = estimate(counts, codes[2].n);
    REQUIRE(counts.n_error > 50);
    CHECK(std::fabs(est.eps_glo_3 - reports[2].eps_glo) <= 3 * est.stderr_ +
                                                              0.02 * reports[2].eps_glo);
    // Preselected trials with two differently-corrupted branches fail the
    // module check, so FAIL dominates the classification.
    CHECK(counts.n_fail > counts.n_success);
}

TEST_CASE("rare-events estimator formulas") {
    SUBCASE("zero upstream corruption is trivial") {
        SimCounts counts;
        counts.n_success = 10;
        counts.round2_branch_error_rate = 0;
        const SimEstimate est = estimate(counts, 14);
        CHECK(est.p_suc_3 == doctest::Approx(1.0));
        CHECK(est.eps_glo_3 == 0.0);
    }
    SUBCASE("synthetic counts reproduce the printed expressions") {
        SimCounts counts;
        counts.n_success = 5000;
        counts.n_fail = 4000;
        counts.n_error = 1000;
        counts.round2_branch_error_rate = 1e-4;
        const std::size_t n3 = 14;
        const SimEstimate est = estimate(counts, n3);

        long double pnum = 0;
        for (std::size_t t = 2; t <= n3; ++t) pnum += binom_pmf(n3, t, 1e-4L);
        const long double p0 = std::pow(1.0L - 1e-4L, 14.0L);
        const long double psuc = p0 + pnum * (0.5L + 0.1L);
        CHECK(est.p_suc_3 == doctest::Approx(double(psuc)).epsilon(1e-12));
        CHECK(est.eps_glo_3 == doctest::Approx(double(0.1L * pnum / psuc)).epsilon(1e-12));
        // Identical to the complement form 1-(1-e)^n - n e (1-e)^(n-1).
        const long double e = 1e-4L;
        const long double pnum_printed =
            1.0L - std::pow(1.0L - e, 14.0L) - 14.0L * e * std::pow(1.0L - e, 13.0L);
        CHECK(double(pnum) == doctest::Approx(double(pnum_printed)).epsilon(1e-9));
    }
    SUBCASE("no observed errors reports a rule-of-three bound") {
        SimCounts counts;
        counts.n_success = 600;
        counts.n_fail = 400;
        counts.round2_branch_error_rate = 1e-4;
        const SimEstimate est = estimate(counts, 14);
        CHECK(est.eps_glo_3 == 0.0);
        long double pnum = 0;
        for (std::size_t t = 2; t <= 14; ++t) pnum += binom_pmf(14, t, 1e-4L);
        CHECK(est.eps_upper ==
              doctest::Approx(double(3.0L / 1000.0L * pnum / est.p_suc_3)).epsilon(1e-9));
    }
}

TEST_CASE("random shuffle policy keeps the factory healthy") {
    SimConfig config{bh_factory(2, 2), 1e-2, 2000000, 7, SimMethod::brute,
                     ShufflePolicy::random_within_branch};
    const SimCounts counts = simulate_brute(config);
    // Same leading-order rate as the canonical policy (pairs collide at the
    // same positions after any within-branch permutation at width 1).
    const double analytic = track_module_checked(config.factory.codes(), 1e-2).back().eps_glo;
    const double sim = counts.round2_branch_error_rate;
    const double se =
        std::sqrt(std::max(sim, 1e-12) * (1 - sim) / double(counts.n_success + counts.n_error));
    CHECK(std::fabs(sim - analytic) <= std::max(0.15 * analytic, 4 * se));
}
