#include <doctest.h>

#include <cmath>

#include "msf/protocol.hpp"
#include "msf/realization.hpp"

using namespace msf;

TEST_CASE("bravyi_haah rejects unsupported parameters") {
    CHECK_THROWS_AS(bravyi_haah(3), std::invalid_argument);
    CHECK_THROWS_AS(bravyi_haah(4), std::invalid_argument);
    CHECK_THROWS_AS(bravyi_haah(0), std::invalid_argument);
    CHECK_THROWS_AS(bravyi_haah(-2), std::invalid_argument);
}

TEST_CASE("bravyi_haah shapes and duality") {
    for (int k : {2, 6, 10}) {
        const ProtocolCode code = bravyi_haah(k);
        CHECK(code.n == std::size_t(3 * k + 8));
        CHECK(code.g0.rows() == 3);
        CHECK(code.g1.rows() == std::size_t(k));

        // The stacked G is dual to the sparse generator family: identical
        // nullspaces checked by mutual span membership.
        const BinaryMatrix gp = build_g_perp(k);
        const BinaryMatrix dual = nullspace_basis(code.g0.stacked(code.g1));
        CHECK(dual.rows() == gp.rows());
        CHECK(in_row_span(gp, dual));
        CHECK(in_row_span(dual, gp));
    }
}

TEST_CASE("triorthogonality of the distillation families") {
    for (int k : {2, 6, 10}) CHECK_NOTHROW(validate(bravyi_haah(k)));
    CHECK_NOTHROW(validate(reed_muller_code()));
    CHECK_NOTHROW(validate(toffoli_code()));
}

TEST_CASE("toffoli code matches the printed form") {
    const ProtocolCode tof = toffoli_code();
    CHECK(tof.n == 8);
    CHECK(tof.k == 3);
    CHECK(tof.output_units() == 1);
    CHECK(tof.g1.row_weight(0) == 4);
    CHECK(tof.g1.row_weight(1) == 4);
    CHECK(tof.g1.row_weight(2) == 4);
    CHECK(tof.g0.rows() == 1);
    CHECK(tof.g0.row_weight(0) == 8);
    // Every single-qubit input hits the all-ones check.
    for (std::size_t j = 0; j < 8; ++j) {
        BinaryMatrix x(1, 8);
        x.set(0, j, true);
        CHECK(!(tof.g0 * x.transposed()).is_zero());
    }
}

TEST_CASE("reed_muller code matches the printed form") {
    const ProtocolCode rm = reed_muller_code();
    CHECK(rm.n == 15);
    CHECK(rm.k == 1);
    for (std::size_t r = 0; r < 4; ++r) CHECK(rm.g0.row_weight(r) == 8);
    CHECK(rm.g1.row_weight(0) == 15);
    CHECK(eta(rm).total() == 35);
}

TEST_CASE("all single errors are detected") {
    for (const ProtocolCode& code :
         {bravyi_haah(2), bravyi_haah(6), bravyi_haah(10), bravyi_haah(14), toffoli_code(),
          reed_muller_code()}) {
        for (std::size_t j = 0; j < code.n; ++j) {
            BinaryMatrix x(1, code.n);
            x.set(0, j, true);
            CHECK(!(code.g0 * x.transposed()).is_zero());
        }
    }
}

TEST_CASE("eta census values") {
    SUBCASE("bh k=6: weight-2 patterns count 3, all-ones counts 4") {
        const EtaFunction e = eta(bravyi_haah(6));
        CHECK(e.input_weight == 2);
        std::size_t weight2 = 0;
        for (const auto& [y, c] : e.counts) {
            const int w = __builtin_popcountll(y);
            if (w == 2) {
                CHECK(c == 3);
                ++weight2;
            } else {
                CHECK(w == 6);
                CHECK(c == 4);
            }
        }
        CHECK(weight2 == 15);
        CHECK(e.counts.size() == 16);
    }
    SUBCASE("bh k=2: single pattern y=(1,1) with eta 7") {
        const EtaFunction e = eta(bravyi_haah(2));
        REQUIRE(e.counts.size() == 1);
        CHECK(e.counts.at(0b11) == 7);
    }
    SUBCASE("toffoli: eta(y) = 4 for all seven nonzero y") {
        const EtaFunction e = eta(toffoli_code());
        CHECK(e.counts.size() == 7);
        for (const auto& [y, c] : e.counts) CHECK(c == 4);
    }
    SUBCASE("totals and per-qubit marginals") {
        for (int k : {2, 6, 10, 14}) {
            const EtaFunction e = eta(bravyi_haah(k));
            CHECK(e.total() == std::uint64_t(k == 2 ? 7 : 4 + 3 * k * (k - 1) / 2));
            for (std::size_t j = 0; j < std::size_t(k); ++j)
                CHECK(e.marginal(j) == std::uint64_t(3 * k + 1));
        }
    }
}

TEST_CASE("sum_eta_power closed forms") {
    CHECK(sum_eta_power(bravyi_haah(6), 1) == 49);
    CHECK(sum_eta_power(bravyi_haah(2), 3) == 343);
    CHECK(sum_eta_power(toffoli_code(), 2) == 112);
    for (int k : {6, 10, 14, 18}) {
        for (unsigned m : {1u, 2u, 4u}) {
            const BigInt expect = boost::multiprecision::pow(BigInt(4), m) +
                                  boost::multiprecision::pow(BigInt(3), m) * k * (k - 1) / 2;
            CHECK(sum_eta_power(bravyi_haah(k), m) == expect);
        }
    }
    for (unsigned m : {1u, 2u, 4u})
        CHECK(sum_eta_power(bravyi_haah(2), m) == boost::multiprecision::pow(BigInt(7), m));
}

TEST_CASE("block_distribution at eps = 0 is trivial") {
    for (const ProtocolCode& code : {bravyi_haah(2), toffoli_code(), reed_muller_code()}) {
        const OutputDistribution od = block_distribution(code, 0.0, std::nullopt);
        CHECK(od.p_success == 1.0);
        CHECK(od.p_out.empty());
        CHECK(od.tail_bound == 0.0);
    }
}

TEST_CASE("block_distribution normalization and marginal consistency") {
    const OutputDistribution od = block_distribution(bravyi_haah(6), 0.01, std::nullopt);
    double total = 0;
    std::vector<double> marg(6, 0);
    for (const auto& [y, p] : od.p_out) {
        total += p;
        for (std::size_t j = 0; j < 6; ++j)
            if ((y >> j) & 1u) marg[j] += p;
    }
    CHECK(std::fabs(total + (1 - od.p_any_error()) - 1.0) < 1e-12);
    for (std::size_t j = 0; j < 6; ++j)
        CHECK(od.marginal_qubit_error[j] == doctest::Approx(marg[j]).epsilon(1e-12));
}

TEST_CASE("exhaustive enumeration equals the enumerator identities") {
    // Two independent routes: the 2^n sum over inputs against the
    // dual-coset closed forms, at several error rates.
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        for (const ProtocolCode& code : {bravyi_haah(2), toffoli_code(), reed_muller_code()}) {
            const OutputDistribution od = block_distribution(code, eps, std::nullopt);
            CHECK(od.p_success ==
                  doctest::Approx(success_probability_exact(code, eps)).epsilon(1e-12));
            CHECK(od.p_any_error() ==
                  doctest::Approx(global_error_exact(code, eps)).epsilon(1e-12));
            for (std::size_t j = 0; j < code.k; ++j)
                CHECK(od.marginal_qubit_error[j] ==
                      doctest::Approx(qubit_error_exact(code, j, eps)).epsilon(1e-12));
        }
    }
}

TEST_CASE("weight enumerator path matches exhaustive enumeration") {
    for (double eps : {1e-2, 5e-3, 1e-4}) {
        const OutputDistribution od = block_distribution(bravyi_haah(2), eps, std::nullopt);
        CHECK(weight_enumerator_undetected(2, eps) ==
              doctest::Approx(od.p_any_error()).epsilon(1e-12));
    }
    // k=6 against the weight-cutoff enumeration, within its reported tail.
    const double eps = 5e-3;
    const OutputDistribution od = block_distribution(bravyi_haah(6), eps, 6);
    const double exact = weight_enumerator_undetected(6, eps);
    CHECK(std::fabs(od.p_any_error() - exact) <= 10 * od.tail_bound + 1e-13);
    // And the bigger guns: exhaustive n = 26.
    const OutputDistribution full = block_distribution(bravyi_haah(6), eps, std::nullopt);
    CHECK(full.p_any_error() == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("reed_muller leading-order output error is 35 eps^3") {
    const double eps = 0.01;
    const OutputDistribution od = block_distribution(reed_muller_code(), eps, std::nullopt);
    CHECK(od.p_any_error() == doctest::Approx(35 * eps * eps * eps).epsilon(0.10));
}

TEST_CASE("leading-order eta limit of the block distribution") {
    // p_out(y != 0) * p_success / eps^2 -> sum eta as eps -> 0.
    const double eps = 1e-4;
    for (const ProtocolCode& code : {bravyi_haah(2), bravyi_haah(6), toffoli_code()}) {
        const OutputDistribution od = block_distribution(code, eps, std::nullopt);
        const double ratio = od.p_any_error() * od.p_success / (eps * eps);
        CHECK(ratio == doctest::Approx(double(eta(code).total())).epsilon(0.05));
    }
}

TEST_CASE("cutoff mode reports its tail and enforces the tolerance") {
    const ProtocolCode code = bravyi_haah(10);
    const OutputDistribution od = block_distribution(code, 1e-3, 4);
    CHECK(od.tail_bound > 0);
    CHECK(!od.exhaustive);
    CHECK_THROWS_AS(block_distribution(code, 0.05, 2, 1e-9), TailTooLarge);
    CHECK_THROWS_AS(block_distribution(code, 0.01, std::nullopt), std::invalid_argument);
}

TEST_CASE("cutoff enumeration converges to the exact rates for larger k") {
    const double eps = 4e-4;
    const ProtocolCode code = bravyi_haah(10);
    const OutputDistribution od = block_distribution(code, eps, 4);
    CHECK(od.p_success ==
          doctest::Approx(success_probability_exact(code, eps)).epsilon(1e-9));
    CHECK(od.p_any_error() == doctest::Approx(global_error_exact(code, eps)).epsilon(1e-6));
}

TEST_CASE("codes round-trip through the text matrix format") {
    const ProtocolCode code = bravyi_haah(6);
    CHECK(BinaryMatrix::parse(code.g0.to_text()) == code.g0);
    CHECK(BinaryMatrix::parse(code.g1.to_text()) == code.g1);
}
