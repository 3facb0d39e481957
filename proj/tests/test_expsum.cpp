#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numbers>

#include "gplab/errors.hpp"
#include "gplab/expsum.hpp"
#include "gplab/numeric.hpp"

using namespace gplab;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Oracle: sum_l r(l)^2 through a map, independent of the sorting implementation.
std::uint64_t plancherel_oracle(std::int64_t b, std::int64_t n) {
    std::map<std::int64_t, std::uint64_t> r;
    for (std::int64_t m1 = b; m1 < b + n; ++m1)
        for (std::int64_t m2 = b; m2 < b + n; ++m2) ++r[m1 * m1 - m2 * m2];
    std::uint64_t s = 0;
    for (auto [l, c] : r) s += c * c;
    return s;
}

// Oracle: sum_l r(l)^3, the number of sextuples with m1^2+m2^2+m3^2 = m4^2+m5^2+m6^2,
// which is (1/2pi) * integral of |S|^6 over one period.
std::uint64_t sixth_moment_oracle(std::int64_t b, std::int64_t n) {
    std::map<std::int64_t, std::uint64_t> r3;
    for (std::int64_t a = b; a < b + n; ++a)
        for (std::int64_t c = b; c < b + n; ++c)
            for (std::int64_t e = b; e < b + n; ++e) ++r3[a * a + c * c + e * e];
    std::uint64_t s = 0;
    for (auto [l, c] : r3) s += c * c;
    return s;
}

std::int64_t naive_pair_count(std::int64_t l, std::int64_t b, std::int64_t n) {
    std::int64_t c = 0;
    for (std::int64_t m1 = b; m1 < b + n; ++m1)
        for (std::int64_t m2 = b; m2 < b + n; ++m2) c += (m1 * m1 - m2 * m2 == l);
    return c;
}

}  // namespace

TEST_CASE("partial_sum examples") {
    CHECK(std::abs(partial_sum({.b = 17, .n = 1}, 0.731)) == Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(partial_sum({.b = 0, .n = 2}, 0.0) - 2.0) < 1e-15);
    // Direct evaluation oracle, including a large offset b.
    for (std::int64_t b : {0L, -7L, 1000L, 1000000L}) {
        const ExpSumSpec spec{.b = b, .n = 130, .scale = 0.37};
        const double t = 0.4123;
        std::complex<double> direct = 0.0;
        for (std::int64_t m = b; m < b + spec.n; ++m) {
            const long double ph = std::fmod(static_cast<long double>(0.37) * static_cast<long double>(t) * m * m, 2.0L * std::numbers::pi_v<long double>);
            direct += std::polar(1.0, static_cast<double>(ph));
        }
        INFO("b = " << b);
        // The extended-precision oracle itself carries ~1e-8 phase error per term at b = 10^6.
        CHECK(std::abs(partial_sum(spec, t) - direct) < (b == 1000000 ? 1e-6 : 1e-10));
        CHECK(std::abs(partial_sum(spec, t)) <= spec.n + 1e-9);
    }
}

TEST_CASE("lp_time_norm examples") {
    CHECK(lp_time_norm({.b = 5, .n = 1}, 4.0, LpMethod::trapezoid) == Approx(2 * kPi).epsilon(1e-12));
    const ExpSumSpec two{.b = 0, .n = 2};
    CHECK(std::abs(lp_time_norm(two, 4.0, LpMethod::trapezoid) - 12 * kPi) < 1e-6);
    CHECK(std::abs(lp_time_norm(two, 4.0, LpMethod::lifted) - 12 * kPi) < 1e-9);
    const ExpSumSpec n64{.b = 0, .n = 64};
    CHECK(lp_time_norm(n64, 4.0, LpMethod::trapezoid) ==
          Approx(2 * kPi * static_cast<double>(plancherel_oracle(0, 64))).epsilon(1e-6));
}

TEST_CASE("lp_time_norm refuses undersampled requests") {
    const ExpSumSpec spec{.b = 0, .n = 64};
    CHECK_THROWS_AS(lp_time_norm(spec, 4.0, 1000), ResolutionError);
    CHECK_NOTHROW(lp_time_norm(spec, 4.0, required_samples(spec, 4.0)));
    CHECK_THROWS_AS(lp_time_norm(spec, 0.5, 1 << 20), ArgumentError);
}

TEST_CASE("l4_plancherel examples and oracle") {
    CHECK(l4_plancherel(0, 1) == Approx(2 * kPi));
    CHECK(l4_plancherel(123, 1) == Approx(2 * kPi));
    CHECK(l4_pair_count(0, 2) == 6);
    CHECK(l4_plancherel(0, 2) == Approx(12 * kPi));
    for (std::int64_t b : {0L, -7L, 7L, 1000000L})
        for (std::int64_t n : {1L, 3L, 16L, 33L}) REQUIRE(l4_pair_count(b, n) == plancherel_oracle(b, n));
    CHECK(lp_time_norm({.b = 0, .n = 16}, 4.0, LpMethod::trapezoid) == Approx(l4_plancherel(0, 16)).epsilon(1e-6));
    CHECK_THROWS_AS(l4_plancherel(std::int64_t{1} << 62, 4), OverflowError);
}

TEST_CASE("lifted and trapezoid quadratures agree with exact moments") {
    for (std::int64_t b : {0L, 3L, -7L, 250L}) {
        for (std::int64_t n : {2L, 5L, 11L}) {
            const ExpSumSpec spec{.b = b, .n = n};
            const double exact4 = 2 * kPi * static_cast<double>(plancherel_oracle(b, n));
            const double exact6 = 2 * kPi * static_cast<double>(sixth_moment_oracle(b, n));
            INFO("b = " << b << " N = " << n);
            CHECK(lp_time_norm_lifted(spec, 4) == Approx(exact4).epsilon(1e-11));
            CHECK(lp_time_norm_lifted(spec, 6) == Approx(exact6).epsilon(1e-11));
            CHECK(lp_time_norm(spec, 4.0, LpMethod::trapezoid) == Approx(exact4).epsilon(1e-9));
            CHECK(lp_time_norm(spec, 6.0, LpMethod::trapezoid) == Approx(exact6).epsilon(1e-9));
        }
    }
    // Two whole periods double the value.
    const ExpSumSpec twice{.b = 4, .n = 6, .t0 = 1.0, .t1 = 1.0 + 4 * kPi};
    CHECK(lp_time_norm_lifted(twice, 4) == Approx(2 * l4_plancherel(4, 6)).epsilon(1e-11));
    CHECK_THROWS_AS(lp_time_norm_lifted({.b = 0, .n = 3, .scale = 2.0}, 4), ArgumentError);
    CHECK_THROWS_AS(lp_time_norm_lifted({.b = 0, .n = 3, .t1 = 1.0}, 4), ArgumentError);
}

TEST_CASE("scale covariance of the time norm") {
    // integral_I |S_s(t)|^p dt = (1/s) integral_{sI} |S_1(u)|^p du.
    const double s = 1.7;
    const ExpSumSpec scaled{.b = -2, .n = 9, .scale = s, .t0 = 0.2, .t1 = 1.3};
    const ExpSumSpec unit{.b = -2, .n = 9, .scale = 1.0, .t0 = 0.2 * s, .t1 = 1.3 * s};
    const double a = lp_time_norm(scaled, 3.0, 8 * required_samples(scaled, 3.0));
    const double b = lp_time_norm(unit, 3.0, 8 * required_samples(unit, 3.0));
    CHECK(a == Approx(b / s).epsilon(1e-7));
}

TEST_CASE("divisor_count examples") {
    CHECK(divisor_count(0, 0, 10) == 10);
    CHECK(divisor_count(9, 0, 10) == 2);
    CHECK(divisor_count(1, 10 * 16 * 16 + 1, 16) <= 1);
}

TEST_CASE("divisor_count agrees with direct pair counting") {
    CounterRng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const std::int64_t n = rng.uniform_int(1, 12);
        const std::int64_t b = rng.uniform_int(-15, 15);
        const std::int64_t m1 = b + rng.uniform_int(0, n - 1);
        const std::int64_t m2 = b + rng.uniform_int(0, n - 1);
        const std::int64_t l = m1 * m1 - m2 * m2 + (trial % 5 == 0 ? 1 : 0);
        REQUIRE(divisor_count(l, b, n) == naive_pair_count(l, b, n));
    }
}

TEST_CASE("uniform count for large offsets") {
    for (std::int64_t n : {8L, 16L}) {
        const std::int64_t b = 10 * n * n + 1;
        CHECK(max_divisor_count(b, n, true) == 1);
        CHECK(max_divisor_count(b, n, false) == n);  // l = 0 is the diagonal
        for (std::int64_t m1 = b; m1 < b + n; m1 += 3)
            for (std::int64_t m2 = b; m2 < b + n; m2 += 2)
                if (m1 != m2) REQUIRE(divisor_count(m1 * m1 - m2 * m2, b, n) == 1);
    }
    // Small offsets do have repeated differences.
    CHECK(max_divisor_count(0, 16, true) > 1);
}
