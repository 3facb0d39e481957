#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "gplab/torus.hpp"
#include "support.hpp"

using namespace gplab;
using Catch::Approx;

TEST_CASE("q_bilinear examples") {
    const QuadraticForm id = QuadraticForm::identity(2);
    CHECK(q_bilinear(id, {1, 0}, {1, 0}) == 1.0);
    CHECK(q_bilinear(id, {1, 0}, {0, 1}) == 0.0);
    const QuadraticForm irr({1.0, std::sqrt(2.0)});
    CHECK(q_bilinear(irr, {1, 1}, {1, 1}) == Approx(3.0).epsilon(1e-15));
    CHECK_THROWS_AS(q_bilinear(irr, {1, 1, 1}, {1, 1}), ArgumentError);
}

TEST_CASE("q_form examples") {
    CHECK(q_form(QuadraticForm::identity(2), {0, 0}) == 0.0);
    CHECK(q_form(QuadraticForm({2.0, 3.0}), {1, 1}) == 13.0);
    CHECK(q_form(QuadraticForm({1.0, std::sqrt(2.0), std::sqrt(3.0)}), {1, 1, 1}) == Approx(6.0).epsilon(1e-15));
}

TEST_CASE("QuadraticForm rejects nonpositive theta") {
    CHECK_THROWS_AS(QuadraticForm({1.0, 0.0}), ArgumentError);
    CHECK_THROWS_AS(QuadraticForm({-1.0}), ArgumentError);
    CHECK_THROWS_AS(QuadraticForm({1.0, NAN}), ArgumentError);
    CHECK_THROWS_AS(QuadraticForm(std::vector<double>{}), ArgumentError);
}

TEST_CASE("jp_bracket examples") {
    CHECK(jp_bracket(LatticePoint{0, 0}) == 1.0);
    CHECK(jp_bracket(LatticePoint{3, 4}) == Approx(std::sqrt(26.0)).epsilon(1e-15));
    CHECK(jp_bracket(LatticePoint{0, 0, 1}) == Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(jp_bracket_pow(LatticePoint{3, 4}, 2.0) == Approx(26.0).epsilon(1e-15));
}

TEST_CASE("shell_member examples") {
    CHECK(shell_member({0, 0}, 0));
    CHECK(shell_member({1, 0}, 1));
    CHECK(shell_member({4, 0}, 3));
    CHECK_FALSE(shell_member({4, 0}, 2));
    CHECK(shell_member({1, 1}, 1));  // |x| = 1.41 in [1, 2)
    CHECK(shell_member({2, 0}, 2));
    CHECK_THROWS_AS(shell_member({0, 0}, -1), ArgumentError);
}

TEST_CASE("shell_member partitions the lattice") {
    // Oracle: the floating definition of the shells.
    auto oracle = [](const LatticePoint& x, int j) {
        const double r = x.norm();
        if (j == 0) return r < 1.0;
        return std::ldexp(1.0, j - 1) <= r && r < std::ldexp(1.0, j);
    };
    CounterRng rng(11);
    for (int trial = 0; trial < 3000; ++trial) {
        const LatticePoint x = testing::random_point(rng, 2, 1 << 10);
        if (x.norm() > 1024.0) continue;
        int hits = 0;
        for (int j = 0; j <= 12; ++j) {
            const bool m = shell_member(x, j);
            REQUIRE(m == oracle(x, j));
            hits += m;
        }
        REQUIRE(hits == 1);
    }
}

TEST_CASE("Q expansion and polarization identities") {
    const QuadraticForm form({1.0, std::sqrt(2.0)});
    CounterRng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const LatticePoint a = testing::random_point(rng, 2, 1 << 20);
        const LatticePoint b = testing::random_point(rng, 2, 1 << 20);
        const double lhs = q_form(form, a + b);
        const double rhs = q_form(form, a) + 2.0 * q_bilinear(form, a, b) + q_form(form, b);
        const double scale = q_form(form, a) + q_form(form, b) + 1.0;
        REQUIRE(std::abs(lhs - rhs) <= 8.0 * 2.2e-16 * 4.0 * scale);
        REQUIRE(q_bilinear(form, a, b) == q_bilinear(form, b, a));
        const double pol = (q_form(form, a + b) - q_form(form, a - b)) / 2.0;
        REQUIRE(std::abs(2.0 * q_bilinear(form, a, b) - pol) <= 1e-12 * scale);
    }
}

TEST_CASE("rescale_freq examples and round trip") {
    const QuadraticForm id = QuadraticForm::identity(2);
    const std::vector<double> x{5.0, -2.0};
    CHECK(rescale_freq(id, x) == LatticePoint{5, -2});
    const QuadraticForm f23({2.0, 3.0});
    const std::vector<double> y{4.0, -9.0};
    CHECK(rescale_freq(f23, y) == LatticePoint{2, -3});
    const std::vector<double> bad{1.0, 0.0};
    CHECK_THROWS_AS(rescale_freq(f23, bad), LatticeError);

    const QuadraticForm irr({1.0, std::sqrt(2.0)});
    CounterRng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const LatticePoint p = testing::random_point(rng, 2, 1 << 20);
        REQUIRE(rescale_freq(irr, unrescale_freq(irr, p)) == p);
        REQUIRE(rescale_freq(f23, unrescale_freq(f23, p)) == p);
    }
}

TEST_CASE("enumerate_ball examples") {
    CHECK(enumerate_ball({0, 0}, 0.0, BallNorm::euclidean) == std::vector<LatticePoint>{{0, 0}});
    CHECK(enumerate_ball({0, 0}, 0.0, BallNorm::sup).size() == 1);
    CHECK(enumerate_ball({0, 0}, 1.0, BallNorm::euclidean).size() == 5);
    CHECK(enumerate_ball({0, 0}, 1.0, BallNorm::sup).size() == 9);
    CHECK_THROWS_AS(enumerate_ball({0, 0}, -1.0, BallNorm::sup), ArgumentError);
}

TEST_CASE("enumerate_ball matches a brute-force filter, lexicographic and unique") {
    const LatticePoint c{3, -2, 1};
    const double radius = 3.7;
    const auto pts = enumerate_ball(c, radius, BallNorm::euclidean);
    std::size_t expected = 0;
    for (int x = -10; x <= 10; ++x)
        for (int y = -10; y <= 10; ++y)
            for (int z = -10; z <= 10; ++z)
                if (x * x + y * y + z * z <= radius * radius) ++expected;
    CHECK(pts.size() == expected);
    CHECK(std::is_sorted(pts.begin(), pts.end()));
    CHECK(std::set<LatticePoint>(pts.begin(), pts.end()).size() == pts.size());
}

TEST_CASE("DyadicIndex ordering accessors") {
    const DyadicIndex j{5, 1, 3};
    CHECK(j.min() == 1);
    CHECK(j.med() == 3);
    CHECK(j.max() == 5);
    const DyadicIndex k{2, 2, 0};
    CHECK(k.min() == 0);
    CHECK(k.med() == 2);
    CHECK(k.max() == 2);
}
