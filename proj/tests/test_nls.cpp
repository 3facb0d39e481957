#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "gplab/errors.hpp"
#include "gplab/nls.hpp"
#include "support.hpp"

using namespace gplab;
using Catch::Approx;

namespace {

const QuadraticForm kIrr({1.0, std::sqrt(2.0)});

SpectralField random_field(CounterRng& rng, int n, double b0, int band, double amp) {
    SpectralField f(2, n, kIrr, b0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const LatticePoint p = f.frequency(i);
        if (p.sup_norm() <= band) f.coeffs()[i] = amp * cplx(rng.normal(), rng.normal()) / (1.0 + p.norm2());
    }
    return f;
}

// Strang step through explicit O(n^4) DFT sums on a 2D grid.
SpectralField strang_oracle(const SpectralField& f, double dt) {
    const int n = f.grid();
    const double h = 2.0 * M_PI / n;
    auto to_grid = [&](const std::vector<cplx>& a) {
        std::vector<cplx> phi(f.size());
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                cplx s{0.0, 0.0};
                for (std::size_t i = 0; i < f.size(); ++i) {
                    const LatticePoint p = f.frequency(i);
                    s += a[i] * std::polar(1.0, h * (double(p[0]) * x + double(p[1]) * y));
                }
                phi[static_cast<std::size_t>(x * n + y)] = s;
            }
        return phi;
    };
    auto to_coeffs = [&](const std::vector<cplx>& phi) {
        std::vector<cplx> a(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            const LatticePoint p = f.frequency(i);
            cplx s{0.0, 0.0};
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    s += phi[static_cast<std::size_t>(x * n + y)] *
                         std::polar(1.0, -h * (double(p[0]) * x + double(p[1]) * y));
            a[i] = s / double(f.size());
        }
        return a;
    };
    auto nl = [&](std::vector<cplx> a) {
        auto phi = to_grid(a);
        for (auto& v : phi) v *= std::polar(1.0, -0.5 * dt * f.b0() * std::norm(v));
        return to_coeffs(phi);
    };
    auto a = nl(f.coeffs());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= std::polar(1.0, -dt * q_form(f.form(), f.frequency(i)));
    SpectralField out = f;
    out.coeffs() = nl(a);
    return out;
}

double l2_diff(const SpectralField& a, const SpectralField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.coeffs()[i] - b.coeffs()[i]);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("storage order and frequencies") {
    SpectralField f(2, 8, kIrr, 1.0);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f.index_of(f.frequency(i)) == i);
    CHECK(f.frequency(1) == LatticePoint{0, 1});
    CHECK(f.frequency(7) == LatticePoint{0, -1});
    CHECK(f.frequency(8 * 4) == LatticePoint{-4, 0});
    CHECK_THROWS_AS(f.index_of(LatticePoint{4, 0}), ArgumentError);
    CHECK_THROWS_AS(SpectralField(2, 12, kIrr, 1.0), ArgumentError);
}

TEST_CASE("mass and energy") {
    SpectralField z(2, 16, kIrr, 1.0);
    CHECK(mass(z) == 0.0);
    CHECK(energy(z) == 0.0);
    const LatticePoint xi{2, -3};
    const double A = 0.7;
    auto f = SpectralField::from_modes(16, kIrr, 0.0, {{xi, A}});
    CHECK(mass(f) == Approx(A * A).epsilon(1e-15));
    CHECK(energy(f) == Approx(q_form(kIrr, xi) * A * A).epsilon(1e-14));
    auto g = SpectralField::from_modes(16, kIrr, 2.0, {{xi, A}});
    CHECK(energy(g) == Approx(q_form(kIrr, xi) * A * A + A * A * A * A).epsilon(1e-13));
}

TEST_CASE("high-band fraction") {
    auto f = SpectralField::from_modes(16, kIrr, 1.0, {{LatticePoint{0, 0}, 1.0}, {LatticePoint{0, 6}, 1.0}});
    CHECK(high_band_fraction(f) == Approx(0.5));
    auto g = SpectralField::from_modes(16, kIrr, 1.0, {{LatticePoint{5, -5}, 1.0}});
    CHECK(high_band_fraction(g) == 0.0);
}

TEST_CASE("Strang step matches the explicit DFT oracle") {
    CounterRng rng(7);
    const auto f = random_field(rng, 8, 1.3, 2, 0.5);
    CHECK(l2_diff(step_strang(f, 0.07), strang_oracle(f, 0.07)) <= 1e-13);
}

TEST_CASE("linear case is the exact propagator") {
    CounterRng rng(9);
    const auto f = random_field(rng, 16, 0.0, 7, 1.0);
    const double dt = 0.01;
    const auto tr = evolve(f, 0.37, dt, 10);
    REQUIRE(tr.times.back() == Approx(0.37));
    const auto& last = tr.states.back();
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const cplx e = f.coeffs()[i] * std::polar(1.0, -0.37 * q_form(kIrr, f.frequency(i)));
        worst = std::max(worst, std::abs(last.coeffs()[i] - e));
    }
    CHECK(worst <= 1e-12);
    CHECK(l2_diff(step_strang(f, 1e-300), f) == 0.0);
}

TEST_CASE("plane wave is reproduced") {
    const LatticePoint xi{3, -2};
    const double A = 0.8, b0 = 1.5, dt = 0.01;
    const auto f = SpectralField::from_modes(32, kIrr, b0, {{xi, A}});
    const auto g = step_strang(f, dt);
    const cplx exact = A * std::polar(1.0, -(q_form(kIrr, xi) + b0 * A * A) * dt);
    CHECK(std::abs(g.at(xi) - exact) <= 1e-14);
    CHECK(mass(g) == Approx(A * A).epsilon(1e-14));
}

TEST_CASE("conservation and second-order convergence") {
    SingleParticleState modes{{LatticePoint{0, 0}, 0.6},
                              {LatticePoint{1, 0}, {0.3, 0.1}},
                              {LatticePoint{0, -1}, {0.0, 0.3}},
                              {LatticePoint{-2, 1}, 0.1}};
    const auto f0 = SpectralField::from_modes(32, kIrr, 1.0, modes);
    const auto tr = evolve(f0, 1.0, 1e-3, 100);
    for (double m : tr.mass) CHECK(std::abs(m - tr.mass.front()) <= 1e-12 * tr.mass.front());
    for (double e : tr.energy) CHECK(std::abs(e - tr.energy.front()) <= 1e-6 * std::abs(tr.energy.front()));
    for (double h : tr.high_band) CHECK(h < 1e-12);

    const auto ref = evolve(f0, 0.5, 1e-3 / 16, 1 << 30).states.back();
    std::vector<double> err;
    for (double dt : {4e-3, 2e-3, 1e-3}) err.push_back(l2_diff(evolve(f0, 0.5, dt, 1 << 30).states.back(), ref));
    CHECK(std::log2(err[0] / err[1]) == Approx(2.0).margin(0.1));
    CHECK(std::log2(err[1] / err[2]) == Approx(2.0).margin(0.1));
}

TEST_CASE("evolve records and is deterministic") {
    CounterRng rng(13);
    const auto f = random_field(rng, 16, 1.0, 3, 0.3);
    const auto a = evolve(f, 0.1, 0.01, 3);
    REQUIRE(a.times.size() == 5);  // 0, 3, 6, 9, 10 steps
    CHECK(a.times[3] == Approx(0.09));
    const auto b = evolve(f, 0.1, 0.01, 3);
    for (std::size_t r = 0; r < a.states.size(); ++r) CHECK(a.states[r].coeffs() == b.states[r].coeffs());
    CHECK_THROWS_AS(evolve(f, 0.1, 0.03, 1), ArgumentError);
}

TEST_CASE("factorized trajectories") {
    SingleParticleState modes{{LatticePoint{0, 0}, 0.4}, {LatticePoint{1, 1}, {0.0, 0.3}}, {LatticePoint{-1, 0}, 0.2}};
    SECTION("linear flow equals free evolution of the initial data") {
        const auto f0 = SpectralField::from_modes(16, kIrr, 0.0, modes);
        const auto tr = factorized_trajectory(f0, 0.3, 0.01, 2, 10);
        REQUIRE(tr.size() == 4);
        for (const auto& p : tr)
            for (int k = 1; k <= 2; ++k) {
                const auto& e = p.seq.entries[static_cast<std::size_t>(k - 1)];
                CHECK(max_abs_difference(e, free_evolve(tr.front().seq.entries[static_cast<std::size_t>(k - 1)], p.t)) <=
                      1e-10);
                CHECK(symmetry_check(e));
            }
        CHECK(duhamel_residual(tr, 0.0, 0.5, 1.0) <= 1e-10);
    }
    SECTION("nonlinear flow: symmetric entries and a second-order residual") {
        const auto f0 = SpectralField::from_modes(16, kIrr, 1.0, modes);
        std::vector<double> res;
        for (double dt : {0.05, 0.025}) {
            const auto tr = factorized_trajectory(f0, 0.2, dt, 2, 1);
            CHECK(symmetry_check(tr.back().seq.entries[1]));
            res.push_back(duhamel_residual(tr, 1.0, 0.0, 1.0));
        }
        CHECK(std::log2(res[0] / res[1]) == Approx(2.0).margin(0.2));
    }
}

TEST_CASE("checkpoints and manifest") {
    const auto f0 = SpectralField::from_modes(8, kIrr, 1.0, {{LatticePoint{0, 0}, 0.5}, {LatticePoint{1, 0}, 0.25}});
    const auto tr = evolve(f0, 0.02, 0.01, 1);
    const auto ft = factorized_trajectory(tr, 1);
    const auto dir = std::filesystem::temp_directory_path() / "gplab-test-checkpoints";
    std::filesystem::remove_all(dir);
    write_checkpoints(dir, ft, 1, nls_manifest(tr, 0.02, 0.01, 1));
    std::ifstream ms(dir / "manifest.json");
    const auto m = nlohmann::json::parse(ms);
    CHECK(m["grid"] == 8);
    CHECK(m["checkpoints"].size() == 3);
    std::ifstream ds(dir / m["checkpoints"][2]["file"].get<std::string>());
    const auto g = read_density(ds);
    CHECK(max_abs_difference(g, ft[2].seq.entries[0]) == 0.0);
    std::filesystem::remove_all(dir);
}
