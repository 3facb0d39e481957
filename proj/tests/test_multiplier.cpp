#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "gplab/errors.hpp"
#include "gplab/multiplier.hpp"
#include "support.hpp"

using namespace gplab;
using Catch::Approx;

namespace {

const QuadraticForm kIrr({1.0, std::sqrt(2.0)});

// Gaussian cutoff e * exp(-t^2), transform e * sqrt(pi) * exp(-xi^2/4).
class GaussBump final : public TimeBump {
public:
    double value(double t) const override { return std::exp(1.0 - t * t); }
    double transform(double xi) const override { return std::exp(1.0) * std::sqrt(M_PI) * std::exp(-0.25 * xi * xi); }
    double half_support() const override { return 6.5; }
};

double q_oracle(const std::vector<double>& th, const LatticePoint& a, const LatticePoint& b) {
    double s = 0;
    for (int i = 0; i < a.dim(); ++i) s += th[i] * th[i] * double(a[i]) * double(b[i]);
    return s;
}

double br(const LatticePoint& x) { return 1.0 + double(x.norm2()); }

// Exhaustive sum over the full box with the formulas written out independently.
double brute_multiplier(const std::vector<double>& th, double tau, const LatticePoint& p, double alpha, int R,
                        bool polarized) {
    double total = 0;
    const int d = p.dim();
    LatticePoint lo(d);
    for (int i = 0; i < d; ++i) lo[i] = 0;
    const auto box = enumerate_ball(lo, R, BallNorm::sup);
    for (const auto& m : box)
        for (const auto& n : box) {
            double phase, den;
            const LatticePoint w = p - n - m;
            if (polarized) {
                if (m.is_zero() || n.is_zero()) continue;
                phase = tau + q_oracle(th, p, p) - 2 * q_oracle(th, n, m);
                den = br(m - p) * br(n - p) * br(w);
            } else {
                phase = tau + q_oracle(th, w, w) + q_oracle(th, n, n) - q_oracle(th, m, m);
                den = br(w) * br(n) * br(m);
            }
            if (phase >= -1e-9 && phase <= 1 + 1e-9) total += std::pow(br(p) / den, alpha);
        }
    return total;
}

std::set<MNPair> naive_E(double tau, const LatticePoint& p, const DyadicIndex& j, const QuadraticForm& form) {
    std::set<MNPair> out;
    const std::int64_t r = std::int64_t{1} << j.max();
    for (const auto& m : enumerate_ball(p, double(r), BallNorm::sup))
        for (const auto& n : enumerate_ball(p, double(r), BallNorm::sup)) {
            if (m.is_zero() || n.is_zero()) continue;
            const double ph = tau + q_form(form, p) - 2 * q_bilinear(form, n, m);
            if (!(ph >= -1e-9 && ph <= 1 + 1e-9)) continue;
            if (shell_member(m - p, j.j1) && shell_member(n - p, j.j2) && shell_member(p - n - m, j.j3))
                out.insert({m, n});
        }
    return out;
}

}  // namespace

TEST_CASE("multiplier_sum: unattainable window gives zero") {
    const std::int64_t R = 3;
    const double tau = 10.0 * std::pow(2.0 * R * 2.0 * 2, 2) + 10.0;
    for (auto rep : {Representation::original, Representation::polarized}) {
        MultiplierQuery q{.tau = tau, .p = {1, -1}, .alpha = 1.0, .form = kIrr, .truncation = R, .representation = rep};
        CHECK(multiplier_sum(q) == 0.0);
    }
}

TEST_CASE("multiplier_sum: exhaustive oracle at R = 1") {
    MultiplierQuery q{.tau = 0.0, .p = {0, 0}, .alpha = 1.0, .form = QuadraticForm::identity(2), .truncation = 1,
                      .representation = Representation::original};
    const double expected = brute_multiplier({1.0, 1.0}, 0.0, {0, 0}, 1.0, 1, false);
    CHECK(expected > 0.0);
    CHECK(multiplier_sum(q) == Approx(expected).epsilon(1e-13));
}

TEST_CASE("multiplier_sum: both forms against brute force on random queries") {
    CounterRng rng(21);
    for (int trial = 0; trial < 12; ++trial) {
        const LatticePoint p = testing::random_point(rng, 2, 3);
        const double tau = rng.uniform(-12.0, 12.0);
        const double alpha = rng.uniform(0.3, 1.2);
        const int R = 2 + trial % 3;
        for (auto rep : {Representation::original, Representation::polarized}) {
            MultiplierQuery q{.tau = tau, .p = p, .alpha = alpha, .form = kIrr, .truncation = R, .representation = rep};
            const double want = brute_multiplier(kIrr.theta(), tau, p, alpha, R, rep == Representation::polarized);
            INFO("trial " << trial << " rep " << int(rep));
            REQUIRE(multiplier_sum(q) == Approx(want).epsilon(1e-12).margin(1e-14));
        }
    }
}

TEST_CASE("multiplier_sum: result is independent of the thread count") {
    MultiplierQuery q{.tau = 3.3, .p = {2, 1}, .alpha = 0.7, .form = kIrr, .truncation = 9,
                      .representation = Representation::polarized};
    const double one = multiplier_sum(q);
    q.threads = 3;
    CHECK(multiplier_sum(q) == one);
}

TEST_CASE("form equivalence: summands agree termwise under the change of variables") {
    CounterRng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const LatticePoint p = testing::random_point(rng, 2, 64);
        const LatticePoint m = testing::random_point(rng, 2, 64);
        const LatticePoint n = testing::random_point(rng, 2, 64);
        const double alpha = rng.uniform(0.1, 2.0);
        const double tau = rng.uniform(-1e4, 1e4);
        const auto [mp, np] = original_to_polarized(p, m, n);
        REQUIRE(polarized_to_original(p, mp, np) == MNPair{m, n});
        const double ph_o = multiplier_phase(Representation::original, kIrr, tau, p, m, n);
        const double ph_p = multiplier_phase(Representation::polarized, kIrr, tau, p, mp, np);
        const double scale = std::abs(tau) + q_form(kIrr, p) + q_form(kIrr, m) + q_form(kIrr, n) + 1.0;
        REQUIRE(std::abs(ph_o - ph_p) <= 1e-12 * scale);
        const double w_o = multiplier_weight(Representation::original, alpha, p, m, n);
        const double w_p = multiplier_weight(Representation::polarized, alpha, p, mp, np);
        REQUIRE(testing::close_rel(w_o, w_p, 1e-12));
    }
}

TEST_CASE("enumerate_E matches a naive enumerator") {
    const QuadraticForm id = QuadraticForm::identity(2);
    const auto got = enumerate_E(0.0, {0, 0}, {1, 1, 1}, id);
    const auto want = naive_E(0.0, {0, 0}, {1, 1, 1}, id);
    CHECK(std::set<MNPair>(got.pairs.begin(), got.pairs.end()) == want);
    CHECK(got.pairs.size() == want.size());

    CounterRng rng(8);
    for (int trial = 0; trial < 25; ++trial) {
        const LatticePoint p = testing::random_point(rng, 2, 6);
        const DyadicIndex j{int(rng.uniform_int(0, 3)), int(rng.uniform_int(0, 3)), int(rng.uniform_int(0, 3))};
        const double tau = q_form(kIrr, p) + rng.uniform(-20.0, 20.0);
        const auto e = enumerate_E(tau, p, j, kIrr);
        const auto n = naive_E(tau, p, j, kIrr);
        REQUIRE(std::set<MNPair>(e.pairs.begin(), e.pairs.end()) == n);
        REQUIRE(std::is_sorted(e.pairs.begin(), e.pairs.end()));
        // Swapping the roles of m and n swaps j1 and j2.
        const auto swapped = enumerate_E(tau, p, {j.j2, j.j1, j.j3}, kIrr);
        REQUIRE(swapped.pairs.size() == e.pairs.size());
    }
    CHECK(enumerate_E(1e12, {1, 1}, {2, 2, 2}, kIrr).pairs.empty());
}

TEST_CASE("enumerate_E reports clipping against R") {
    CHECK_FALSE(enumerate_E(0.0, {0, 0}, {2, 2, 2}, kIrr, 16).clipped);
    CHECK(enumerate_E(0.0, {0, 0}, {5, 2, 2}, kIrr, 16).clipped);
}

TEST_CASE("dyadic_bound_report agrees with enumerate_E triple by triple") {
    CounterRng rng(99);
    for (int trial = 0; trial < 4; ++trial) {
        const LatticePoint p = testing::random_point(rng, 2, 10);
        const double tau = q_form(kIrr, p) + rng.uniform(-30.0, 30.0);
        const auto recs = dyadic_bound_report(tau, p, kIrr, 3, 0.5);
        REQUIRE(recs.size() == 64);
        for (const auto& r : recs) {
            REQUIRE(r.count == enumerate_E(tau, p, r.j, kIrr).pairs.size());
            REQUIRE(r.bound == std::exp2(1.5 * (r.j.min() + r.j.med())));
            REQUIRE(r.ratio == double(r.count) / r.bound);
            if (r.count == 0) REQUIRE(r.ratio == 0.0);
        }
    }
}

TEST_CASE("dyadic triple (0,0,0) holds at most 81 pairs in 2D") {
    CounterRng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const LatticePoint p = testing::random_point(rng, 2, 3);
        const double tau = rng.uniform(-5.0, 5.0);
        const auto recs = dyadic_bound_report(tau, p, kIrr, 0, 0.5);
        REQUIRE(recs.size() == 1);
        REQUIRE(recs[0].count <= 81);
    }
    // p = 0, tau = 0: m = n = p = 0 is excluded, so the set is empty.
    CHECK(dyadic_bound_report(0.0, {0, 0}, kIrr, 0, 0.5)[0].count == 0);
}

TEST_CASE("forcing threshold") {
    CHECK(forcing_threshold(kIrr) == Approx(2.0));
    CHECK_THROWS_AS(require_forcing(kIrr, 2.0), PreconditionError);
    CHECK_NOTHROW(require_forcing(kIrr, 3.0));
    try {
        require_forcing(QuadraticForm({0.5, 1.0}), 4.0);
        FAIL("expected a precondition error");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("8") != std::string::npos);
    }
}

TEST_CASE("endpoint_slice_sum: direct summation oracle and monotonicity") {
    const std::int64_t kappa = 16, M = 1 << 14;
    double want = 0;
    for (std::int64_t m = -M; m <= M; ++m) {
        const double r2 = double(m) * double(m);
        want += 16.0 / (std::sqrt(1.0 + 256.0 + r2) * std::sqrt(1.0 + r2));
    }
    const double got = endpoint_slice_sum(kappa, kIrr, M, 2);
    CHECK(got > 0.0);
    CHECK(got == Approx(want).epsilon(1e-12));
    double prev = 0.0;
    for (std::int64_t m : {16, 32, 100, 1000, 5000}) {
        const double v = endpoint_slice_sum(kappa, kIrr, m, 2);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS_AS(endpoint_slice_sum(16, kIrr, 8, 2), ArgumentError);
    CHECK_THROWS_AS(endpoint_slice_sum(2, kIrr, 8, 2), PreconditionError);
}

TEST_CASE("endpoint_slice_sum: 3D row closed form agrees with direct summation") {
    const QuadraticForm f3({1.0, std::sqrt(2.0), std::sqrt(3.0)});
    for (auto [kappa, M] : {std::pair<std::int64_t, std::int64_t>{4, 16}, {8, 64}, {16, 256}, {3, 3}}) {
        double want = 0;
        for (std::int64_t a = -M; a <= M; ++a)
            for (std::int64_t b = -M; b <= M; ++b) {
                const double r2 = double(a * a + b * b);
                const double k2 = double(kappa * kappa);
                want += k2 / ((1 + k2 + r2) * (1 + r2));
            }
        INFO("kappa " << kappa << " M " << M);
        CHECK(endpoint_slice_sum(kappa, f3, M, 3, SliceMethod::direct) == Approx(want).epsilon(1e-12));
        CHECK(endpoint_slice_sum(kappa, f3, M, 3, SliceMethod::row_closed_form) == Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("slice sum is a sub-sum of the multiplier") {
    for (std::int64_t kappa : {3, 4, 6}) {
        const LatticePoint p{kappa, 0};
        const std::int64_t M = kappa;
        MultiplierQuery q{.tau = -q_form(kIrr, p), .p = p, .alpha = 0.5, .form = kIrr, .truncation = M,
                          .representation = Representation::original};
        CHECK(multiplier_sum(q) >= endpoint_slice_sum(kappa, kIrr, M, 2));
    }
}

TEST_CASE("phase_count bound dominates the count and matches its spectral form") {
    const GaussBump bump;
    CounterRng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const LatticePoint p = testing::random_point(rng, 2, 4);
        const DyadicIndex j{int(rng.uniform_int(0, 2)), int(rng.uniform_int(0, 2)), int(rng.uniform_int(0, 2))};
        const double tau = q_form(kIrr, p) + rng.uniform(-10.0, 10.0);
        const double count = double(enumerate_E(tau, p, j, kIrr).pairs.size());
        const double fourier = phase_count_fourier_bound(tau, p, j, kIrr, bump);
        const double spectral = phase_count_spectral(tau, p, j, kIrr, bump);
        INFO("trial " << trial);
        REQUIRE(fourier >= count - 1e-4);
        REQUIRE(fourier == Approx(spectral).epsilon(1e-8).margin(1e-8));
    }
    // (p, p) is in E for p = 0? No: m, n != 0. Use p != 0 with tau placing (p,p) in the window.
    const LatticePoint p{1, 0};
    const double tau = q_form(kIrr, p) + 0.5;  // tau + Q(p) - 2Q(p,p) = 0.5
    REQUIRE(enumerate_E(tau, p, {0, 0, 1}, kIrr).pairs.size() >= 1);
    CHECK(phase_count_fourier_bound(tau, p, {0, 0, 1}, kIrr, bump) >= 1.0);
    CHECK_THROWS_AS(phase_count_fourier_bound(tau, p, {0, 0, 1}, kIrr, bump, 100), ResolutionError);
}

TEST_CASE("phase boxes can be empty") {
    // eta' must sit within 2^j3 = 1 of p and within 2^1 of 2p: impossible for large p.
    const auto b = phase_boxes({100, 0}, {0, 0, 0});
    CHECK(b.empty());
    const GaussBump bump;
    CHECK(phase_count_fourier_bound(0.0, {100, 0}, {0, 0, 0}, kIrr, bump) == 0.0);
}
