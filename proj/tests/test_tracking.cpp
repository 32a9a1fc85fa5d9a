#include <doctest.h>

#include <cmath>

#include "msf/tracking.hpp"

using namespace msf;

namespace {

BigInt bh_poly(int k, const BigInt& a, const BigInt& b) {
    // a + b/2 * k(k-1), the printed coefficient building block
    return a + b * k * (k - 1) / 2;
}

}  // namespace

TEST_CASE("theorem-style tracking spot values") {
    const ProtocolCode bh10 = bravyi_haah(10);
    const std::vector<ProtocolCode> f{bh10, bh10, bh10};
    const auto reports = track_module_checked(f, 1e-3);
    REQUIRE(reports.size() == 3);
    // Published figure: 2.3e-16 to two significant digits.
    CHECK(reports[2].eps_glo == doctest::Approx(2.3e-16).epsilon(0.05));
    CHECK(reports[2].branch_width == 1000);
    // Widths multiply per round.
    CHECK(reports[0].branch_width == 10);
    CHECK(reports[1].branch_width == 100);
}

TEST_CASE("tracking at eps = 0 is trivial") {
    const ProtocolCode bh6 = bravyi_haah(6);
    for (const auto& rep : track_module_checked({bh6, bh6}, 0.0)) {
        CHECK(rep.p_suc == doctest::Approx(1.0));
        CHECK(rep.eps_glo == 0.0);
    }
    for (const auto& rep : track_block_checked({bh6, bh6}, 0.0)) {
        CHECK(rep.p_suc == doctest::Approx(1.0));
        CHECK(rep.eps_glo == 0.0);
    }
}

TEST_CASE("leading coefficients match every printed closed form") {
    const ProtocolCode tof = toffoli_code();
    SUBCASE("spot checks") {
        CHECK(leading_coefficient({bravyi_haah(10), bravyi_haah(10)}) == 58519);
        CHECK(leading_coefficient({tof, bravyi_haah(10)}) == BigInt(112) * 139);
        CHECK(leading_coefficient({bravyi_haah(10), tof}) == BigInt(421) * 28);
        CHECK(leading_coefficient({tof, bravyi_haah(10), bravyi_haah(10)}) ==
              BigInt(1792) * 421 * 139);
    }
    SUBCASE("two-level polynomials, k > 2") {
        for (int k1 : {6, 10, 14}) {
            for (int k2 : {6, 10, 14}) {
                CHECK(leading_coefficient({bravyi_haah(k1), bravyi_haah(k2)}) ==
                      bh_poly(k1, 16, 9) * bh_poly(k2, 4, 3));
            }
            CHECK(leading_coefficient({tof, bravyi_haah(k1)}) == BigInt(112) * bh_poly(k1, 4, 3));
            CHECK(leading_coefficient({bravyi_haah(k1), tof}) == bh_poly(k1, 16, 9) * 28);
        }
    }
    SUBCASE("three-level polynomials, k > 2") {
        for (int k : {6, 10, 14}) {
            CHECK(leading_coefficient({bravyi_haah(k), bravyi_haah(k), bravyi_haah(k)}) ==
                  bh_poly(k, 256, 81) * bh_poly(k, 16, 9) * bh_poly(k, 4, 3));
            CHECK(leading_coefficient({tof, bravyi_haah(k), bravyi_haah(k)}) ==
                  BigInt(1792) * bh_poly(k, 16, 9) * bh_poly(k, 4, 3));
            CHECK(leading_coefficient({bravyi_haah(k), bravyi_haah(k), tof}) ==
                  bh_poly(k, 256, 81) * bh_poly(k, 16, 9) * 28);
        }
    }
    SUBCASE("k = 2 special case uses powers of seven") {
        CHECK(leading_coefficient({bravyi_haah(2), bravyi_haah(2)}) == 343);
        CHECK(leading_coefficient({bravyi_haah(2), bravyi_haah(2), bravyi_haah(2)}) ==
              boost::multiprecision::pow(BigInt(7), 7));
        CHECK(leading_coefficient({tof, bravyi_haah(2)}) == BigInt(112) * 7);
    }
    SUBCASE("rejects Reed-Muller rounds and bad sizes") {
        CHECK_THROWS_AS(leading_coefficient({reed_muller_code()}), std::invalid_argument);
        CHECK_THROWS_AS(leading_coefficient({}), std::invalid_argument);
        const std::vector<ProtocolCode> four(4, bravyi_haah(2));
        CHECK_THROWS_AS(leading_coefficient(four), std::invalid_argument);
    }
}

namespace {

// Census of undetected weight-3 inputs that carry a logical error. These
// set the subleading term the pair-based tracking cannot see.
std::uint64_t weight3_error_census(const ProtocolCode& code) {
    std::uint64_t count = 0;
    for (std::size_t a = 0; a < code.n; ++a)
        for (std::size_t b = a + 1; b < code.n; ++b)
            for (std::size_t c = b + 1; c < code.n; ++c) {
                BinaryMatrix x(1, code.n);
                x.set(0, a, true);
                x.set(0, b, true);
                x.set(0, c, true);
                if ((code.g0 * x.transposed()).is_zero() &&
                    !(code.g1 * x.transposed()).is_zero())
                    ++count;
            }
    return count;
}

}  // namespace

TEST_CASE("one-round tracking reduces to the eta estimate") {
    // eps_g = (sum eta) eps^2 + N3 eps^3 + O(eps^4): the tracked value
    // reproduces the pair term; the residual is pinned by the weight-3
    // census (zero for the Toffoli converter, whose parity check kills all
    // odd-weight inputs).
    const double eps = 1e-4;
    for (const ProtocolCode& code : {bravyi_haah(2), bravyi_haah(6), toffoli_code()}) {
        const auto reports = track_module_checked({code}, eps);
        const double exact = global_error_exact(code, eps);
        const double residual = std::fabs(reports[0].eps_glo - exact);
        const double n3 = double(weight3_error_census(code));
        const double quartic_scale = std::pow(double(code.n * (code.n - 1) / 2), 2.0);
        CHECK(residual <= 1.1 * n3 * eps * eps * eps + quartic_scale * std::pow(eps, 4.0));
        if (n3 > 0)
            CHECK(residual >= 0.9 * n3 * eps * eps * eps);
        CHECK(reports[0].eps_glo == doctest::Approx(exact).epsilon(1e-3));
    }
    CHECK(weight3_error_census(toffoli_code()) == 0);
    CHECK(weight3_error_census(bravyi_haah(2)) == 56);
}

TEST_CASE("block-checked chain values") {
    const ProtocolCode bh2 = bravyi_haah(2);
    SUBCASE("one bh k=2 round reproduces the 7 eps^2 marginal") {
        const double eps = 1e-4;
        const auto reports = track_block_checked({bh2}, eps);
        const double per_qubit = -std::expm1(std::log1p(-reports[0].eps_glo) / 2.0);
        CHECK(per_qubit == doctest::Approx(7 * eps * eps).epsilon(0.01));
        // Oracle: exhaustive marginal.
        const OutputDistribution od = block_distribution(bh2, eps, std::nullopt);
        CHECK(per_qubit == doctest::Approx(od.marginal_qubit_error[0]).epsilon(1e-9));
    }
    SUBCASE("three k=10 rounds land near 1e-11 globally") {
        const ProtocolCode bh10 = bravyi_haah(10);
        const auto reports = track_block_checked({bh10, bh10, bh10}, 1e-3);
        CHECK(reports[2].eps_glo > 5e-12);
        CHECK(reports[2].eps_glo < 8e-11);
    }
}

TEST_CASE("module checking dominates the union-bound estimate") {
    for (int k : {2, 6, 10, 14}) {
        const ProtocolCode code = bravyi_haah(k);
        for (double eps : {1e-4, 1e-3, 3e-3, 1e-2}) {
            for (std::size_t rounds : {1u, 2u, 3u}) {
                const std::vector<ProtocolCode> f(rounds, code);
                const double module = track_module_checked(f, eps).back().eps_glo;
                const double block = track_block_checked(f, eps).back().eps_glo;
                CHECK(module <= block * (1 + 1e-9));
            }
        }
    }
}

TEST_CASE("global error decreases per level") {
    const ProtocolCode bh10 = bravyi_haah(10);
    const auto reports = track_module_checked({bh10, bh10, bh10}, 1e-3);
    CHECK(reports[0].eps_glo > reports[1].eps_glo);
    CHECK(reports[1].eps_glo > reports[2].eps_glo);
}

TEST_CASE("cost values") {
    SUBCASE("perfect Reed-Muller round costs 15 raw states") {
        CHECK(cost({reed_muller_code()}, 0.0, CheckMode::block) == doctest::Approx(15.0));
        CHECK(cost({bravyi_haah(2)}, 0.0, CheckMode::block) == doctest::Approx(7.0));
    }
    SUBCASE("one bh k=2 round at 1e-2: 14 / (2 P_suc) with enumerated P_suc") {
        const double eps = 1e-2;
        const double p = block_distribution(bravyi_haah(2), eps, std::nullopt).p_success;
        const double expect = 14.0 / (2.0 * p);
        CHECK(cost({bravyi_haah(2)}, eps, CheckMode::block) == doctest::Approx(expect).epsilon(1e-9));
        CHECK(cost({bravyi_haah(2)}, eps, CheckMode::module) ==
              doctest::Approx(expect).epsilon(1e-9));
    }
    SUBCASE("table asymptote: union-bound to module-checked ratio at k = 50") {
        // Final-column check: prod(k) * eps_union / eps^(2^l) approaches
        // 27 k1^3 k2^2 at large k (two Bravyi-Haah levels), within 15%.
        const int k = 50;
        const double eps = 1e-5;
        const ProtocolCode code = bravyi_haah(k);
        const std::vector<ProtocolCode> f{code, code};
        // Union-bound global estimate from the leading-order marginal chain.
        const double e1 = (3.0 * k + 1) * eps * eps;
        const double e2 = (3.0 * k + 1) * e1 * e1;
        const double union_bound = double(k) * double(k) * e2;
        const double ratio = union_bound / std::pow(eps, 4.0);
        const double limit = 27.0 * std::pow(double(k), 3.0) * double(k) * double(k);
        CHECK(ratio == doctest::Approx(limit).epsilon(0.15));
    }
}

TEST_CASE("module tracking rejects weight-3 families and bad eps") {
    CHECK_THROWS_AS(track_module_checked({reed_muller_code()}, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(track_module_checked({bravyi_haah(2)}, 0.7), std::invalid_argument);
    CHECK_THROWS_AS(track_module_checked({}, 1e-3), std::invalid_argument);
}

TEST_CASE("report rendering is stable key/value text") {
    const ProtocolCode bh2 = bravyi_haah(2);
    const std::vector<ProtocolCode> f{bh2, bh2};
    const std::string text = render_reports(f, track_module_checked(f, 1e-3));
    CHECK(text.find("level=1 protocol=bh:2 p_suc=") != std::string::npos);
    CHECK(text.find("level=2") != std::string::npos);
    CHECK(text.find("branch_width=4") != std::string::npos);
}
