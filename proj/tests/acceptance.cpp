// Acceptance run: one PASS/FAIL line per criterion. Tolerances and runtime
// limits are fixed here; the process exits nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "gplab/config.hpp"
#include "gplab/counterexample.hpp"
#include "gplab/density.hpp"
#include "gplab/experiments.hpp"
#include "gplab/expsum.hpp"
#include "gplab/multiplier.hpp"
#include "gplab/numeric.hpp"

using namespace gplab;

namespace {

const std::string kSqrt2 = "1.4142135623730951";
const std::string kSqrt3 = "1.7320508075688772";

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

ExperimentReport run(const std::string& exp, const std::map<std::string, std::string>& flags) {
    return run_experiment(resolve_config(exp, nullptr, flags));
}

std::string check_summary(const ExperimentReport& r) {
    std::string s;
    for (const auto& c : r.checks) s += (s.empty() ? "" : ", ") + c.name + "=" + fmt("%.4g", c.value);
    return s;
}

// 2 pi sum_l r(l)^2 from an explicit table of m1^2 - m2^2.
double plancherel_oracle(std::int64_t b, std::int64_t n) {
    std::map<std::int64_t, std::int64_t> r;
    for (std::int64_t m1 = b; m1 < b + n; ++m1)
        for (std::int64_t m2 = b; m2 < b + n; ++m2) ++r[m1 * m1 - m2 * m2];
    double s = 0.0;
    for (const auto& [l, c] : r) s += double(c) * double(c);
    return 2.0 * std::numbers::pi * s;
}

Outcome c1_l4_oracle() {
    double worst = 0.0;
    for (std::int64_t b : {std::int64_t{0}, std::int64_t{-7}, std::int64_t{1000000}})
        for (std::int64_t n = 1; n <= 64; ++n) {
            ExpSumSpec s;
            s.b = b;
            s.n = n;
            const double q = lp_time_norm(s, 4.0, LpMethod::automatic);
            const double exact = plancherel_oracle(b, n);
            worst = std::max(worst, std::abs(q - exact) / exact);
        }
    return {worst <= 1e-6, "max rel error " + fmt("%.3g", worst) + " (<= 1e-6)"};
}

Outcome c2_growth() {
    const auto l4 = run("expsum-l4", {{"n", "16..256*2"}, {"b", "0"}});
    const auto l6 = run("expsum-lp", {{"n", "16..256*2"}, {"b", "0"}, {"p", "6"}});
    const double s4 = l4.find_check("slope[b=0]")->value, s6 = l6.find_check("slope[b=0]")->value;
    const bool ok = s4 > 1.5 && s4 <= 2.2 && s6 <= 4.2;
    return {ok, "L4 slope " + fmt("%.4f", s4) + " in (1.5, 2.2], L6 slope " + fmt("%.4f", s6) + " <= 4.2"};
}

Outcome c3_divisor_uniqueness() {
    bool ok = true;
    std::string detail;
    for (std::int64_t n : {8, 16}) {
        const std::int64_t b = 10 * n * n + 1;
        std::map<std::int64_t, std::int64_t> r;
        for (std::int64_t m1 = b; m1 < b + n; ++m1)
            for (std::int64_t m2 = b; m2 < b + n; ++m2)
                if (m1 != m2) ++r[m1 * m1 - m2 * m2];
        std::int64_t brute = 0;
        for (const auto& [l, c] : r) brute = std::max(brute, c);
        const auto lib = max_divisor_count(b, n, true);
        ok = ok && brute == 1 && lib == 1;
        detail += (detail.empty() ? "" : ", ") + std::string("N=") + std::to_string(n) + ": max " +
                  std::to_string(lib) + " (brute force " + std::to_string(brute) + ")";
    }
    return {ok, detail};
}

Outcome c4_dyadic() {
    const auto r = run("dyadic-count", {{"theta", "1," + kSqrt2}});
    const auto caps = r.summary["max_ratio_per_cap"];
    std::string per;
    for (const auto& [cap, v] : caps.items()) per += " cap" + cap + "=" + fmt("%.4f", v.get<double>());
    return {r.pass(), "max ratio" + per + "; " + check_summary(r)};
}

// Summands written out from the two displayed forms, on raw coordinates.
double q_raw(const std::vector<double>& th2, const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y) {
    double s = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) s += th2[a] * double(x[a] * y[a]);
    return s;
}
double br2(const std::vector<std::int64_t>& x) {
    double s = 1.0;
    for (auto v : x) s += double(v * v);
    return s;
}

Outcome c5_form_equivalence() {
    const std::vector<double> th2{1.0, 2.0};
    const QuadraticForm form({1.0, std::sqrt(2.0)});
    CounterRng rng(20240611);
    double worst = 0.0;
    int in_window = 0;
    bool map_ok = true;
    auto sub = [](auto a, auto b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
        return a;
    };
    auto add = [](auto a, auto b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        return a;
    };
    for (int t = 0; t < 1000; ++t) {
        std::vector<std::int64_t> p(2), m(2), n(2);
        for (auto* v : {&p, &m, &n})
            for (auto& c : *v) c = rng.uniform_int(-64, 64);
        const double alpha = rng.uniform(0.1, 2.0);
        const auto w = sub(sub(p, n), m);
        double tau = rng.uniform(-1e4, 1e4);
        if (t % 2 == 0) tau = -(q_raw(th2, w, w) + q_raw(th2, n, n) - q_raw(th2, m, m)) + rng.uniform(0.05, 0.95);
        // original at (m, n)
        const double ph1 = tau + q_raw(th2, w, w) + q_raw(th2, n, n) - q_raw(th2, m, m);
        const double s1 = (ph1 >= 0.0 && ph1 <= 1.0) ? std::pow(br2(p), alpha) / std::pow(br2(w) * br2(n) * br2(m), alpha) : 0.0;
        // polarized at (m', n') = (m + n, p - n)
        const auto mp = add(m, n), np = sub(p, n);
        const auto wp = sub(sub(p, np), mp);
        const double ph2 = tau + q_raw(th2, p, p) - 2.0 * q_raw(th2, np, mp);
        const double s2 = (ph2 >= 0.0 && ph2 <= 1.0)
                              ? std::pow(br2(p), alpha) / std::pow(br2(sub(mp, p)) * br2(sub(np, p)) * br2(wp), alpha)
                              : 0.0;
        if (s1 != 0.0) ++in_window;
        const double denom = std::max({1e-300, std::abs(s1), std::abs(s2)});
        worst = std::max(worst, std::abs(s1 - s2) / denom);
        // The library maps and summands agree with the oracle.
        const auto lp = LatticePoint{p[0], p[1]}, lm = LatticePoint{m[0], m[1]}, ln = LatticePoint{n[0], n[1]};
        const auto [lmp, lnp] = original_to_polarized(lp, lm, ln);
        map_ok = map_ok && lmp == LatticePoint{mp[0], mp[1]} && lnp == LatticePoint{np[0], np[1]};
        const double l1 = multiplier_summand(Representation::original, form, tau, alpha, lp, lm, ln);
        const double l2 = multiplier_summand(Representation::polarized, form, tau, alpha, lp, lmp, lnp);
        worst = std::max({worst, std::abs(l1 - s1) / denom, std::abs(l2 - s2) / denom});
    }
    return {worst <= 1e-12 && map_ok && in_window >= 400,
            "1000 tuples (" + std::to_string(in_window) + " in the window), max rel error " + fmt("%.3g", worst) +
                " (<= 1e-12)"};
}

Outcome c6_endpoint() {
    const auto r2 = run("endpoint-slice", {{"d", "2"}, {"theta", "1," + kSqrt2}, {"kappas", "2^4..2^14*2"}, {"m_rule", "square"}});
    const auto r3 = run("endpoint-slice",
                        {{"d", "3"}, {"theta", "1," + kSqrt2 + "," + kSqrt3}, {"kappas", "2^4..2^9*2"}, {"m_rule", "square"}});
    // Direct double loop at kappa = 16 for the 2D first row.
    const double k = 16.0;
    double direct = 0.0;
    for (std::int64_t m = -256; m <= 256; ++m) {
        const double m2 = double(m * m);
        direct += k / std::sqrt((1.0 + k * k + m2) * (1.0 + m2));
    }
    const double lib = std::get<double>(r2.rows.front()[3]);
    const bool ok = r2.pass() && r3.pass() && std::abs(lib - direct) <= 1e-12 * direct;
    return {ok, "2D: " + check_summary(r2) + "; 3D: " + check_summary(r3) + "; kappa=16 direct gap " +
                    fmt("%.2g", std::abs(lib - direct) / direct)};
}

Outcome c7_sharpness() {
    const auto r2 = run("extremizer-sweep", {{"d", "2"},
                                             {"theta", "1," + kSqrt2},
                                             {"alpha", "0.5"},
                                             {"delta", "0.05"},
                                             {"delta2", "0"},
                                             {"kappas", "2^4..2^12*2"},
                                             {"m_rule", "8"}});
    const auto r3 = run("extremizer-sweep", {{"d", "3"},
                                             {"theta", "1," + kSqrt2 + "," + kSqrt3},
                                             {"alpha", "1"},
                                             {"delta", "0.05"},
                                             {"delta2", "0"},
                                             {"kappas", "2^4..2^9*2"},
                                             {"m_rule", "2"}});
    return {r2.pass() && r3.pass(), "2D: " + check_summary(r2) + "; 3D: " + check_summary(r3)};
}

Outcome c8_boundedness() {
    std::string detail;
    bool ok = true;
    struct Case {
        int d;
        double alpha;
        std::int64_t cutoff;
        std::vector<double> theta;
    };
    for (const Case& cs : {Case{2, 0.6, 256, {1.0, std::sqrt(2.0)}}, Case{3, 1.1, 32, {1.0, std::sqrt(2.0), std::sqrt(3.0)}}}) {
        const QuadraticForm form(cs.theta);
        std::vector<double> ratios;
        SpacetimeOptions o;
        o.quadrature = TimeQuadrature::exact;
        for (std::uint64_t s = 0; s < 100; ++s) {
            auto g = random_sparse_density(8, s, 2, form, cs.cutoff, 8);
            g = scaled(g, 1.0 / hk_alpha_norm(g, cs.alpha));
            ratios.push_back(spacetime_norm(g, 1, cs.alpha, 1.0, o) / hk_alpha_norm(g, cs.alpha));
        }
        std::vector<double> sorted = ratios;
        std::sort(sorted.begin(), sorted.end());
        const double median = 0.5 * (sorted[49] + sorted[50]);
        const double mx = sorted.back();
        ok = ok && std::isfinite(mx) && mx <= 10.0 * median;
        detail += (detail.empty() ? "" : "; ") + std::to_string(cs.d) + "D max/median " + fmt("%.3f", mx / median) +
                  " (<= 10)";
    }
    return {ok, detail};
}

Outcome c9_nls() {
    const auto r = run("nls-converge", {{"theta", "1," + kSqrt2}, {"grid", "64"}, {"T", "1"}, {"dt", "1e-3"}});
    return {r.pass(), check_summary(r)};
}

Outcome c10_hierarchy() {
    const auto r = run("hierarchy-residual", {{"theta", "1," + kSqrt2}, {"grid", "32"}, {"b0", "1"}, {"k_max", "2"}});
    return {r.pass(), check_summary(r)};
}

Outcome c11_rescaling() {
    const auto a = run("rescale-check", {{"theta", "2,3"}, {"samples", "100"}, {"tolerance", "1e-12"}});
    const auto b = run("rescale-check", {{"theta", "1," + kSqrt2}, {"samples", "100"}, {"tolerance", "1e-12"}});
    return {a.pass() && b.pass(), "theta=(2,3): " + check_summary(a) + "; theta=(1,sqrt2): " + check_summary(b)};
}

Outcome c12_bump() {
    const auto r = run("bump-verify", {{"delta", "0.05"}, {"nonneg_tol", "1e-9"}});
    return {r.pass(), check_summary(r)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria{
        {1, "exponential-sum L4 oracle equality", 60, c1_l4_oracle},
        {2, "growth exponents of the L4 and L6 time norms", 120, c2_growth},
        {3, "uniqueness of divisor solutions for large offsets", 60, c3_divisor_uniqueness},
        {4, "dyadic counting bound stable in the cap", 300, c4_dyadic},
        {5, "original and polarized multiplier forms agree term-wise", 60, c5_form_equivalence},
        {6, "endpoint slice sums grow like ln kappa", 180, c6_endpoint},
        {7, "sharpness ratio grows with a constant B- part", 600, c7_sharpness},
        {8, "boundedness witness for random sparse data", 600, c8_boundedness},
        {9, "NLS plane wave, mass and second order", 120, c9_nls},
        {10, "hierarchy residual order and linear exactness", 300, c10_hierarchy},
        {11, "rescaling correspondence and round trip", 60, c11_rescaling},
        {12, "time bump support, sign and lower bound", 60, c12_bump},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = o.pass && secs < c.limit_s;
        if (!pass) ++failed;
        std::printf("%s [%d] %s: %s; %.1f s (< %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    c.limit_s);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
