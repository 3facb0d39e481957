#include "gplab/counterexample.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "gplab/errors.hpp"
#include "gplab/multiplier.hpp"

namespace gplab {

namespace {

struct GlTable {
    explicit GlTable(std::size_t n) : t(gsl_integration_glfixed_table_alloc(n), gsl_integration_glfixed_table_free) {}
    std::unique_ptr<gsl_integration_glfixed_table, void (*)(gsl_integration_glfixed_table*)> t;
};

const gsl_integration_glfixed_table* gl_table(std::size_t n) {
    // Tables are immutable after construction; one per size.
    static const GlTable t48(48), t64(64), t128(128), t256(256);
    switch (n) {
        case 48: return t48.t.get();
        case 64: return t64.t.get();
        case 128: return t128.t.get();
        default: return t256.t.get();
    }
}

template <class F>
double gl_integrate(F&& f, double a, double b, std::size_t n) {
    if (!(b > a)) return 0.0;
    const auto* tab = gl_table(n);
    double s = 0.0;
    for (std::size_t i = 0; i < tab->n; ++i) {
        double x = 0.0, w = 0.0;
        gsl_integration_glfixed_point(a, b, i, &x, &w, tab);
        s += w * f(x);
    }
    return s;
}

double phi1_hat(double s) { return s == 0.0 ? 2.0 * M_PI : std::sin(2.0 * M_PI * s) / s; }

// (phi1 * phi1)(y) = (4 pi - |y|)_+ / 4
double triangle(double y) { return 0.25 * std::max(0.0, 4.0 * M_PI - std::abs(y)); }

}  // namespace

// --- extremizer -----------------------------------------------------------

void ExtremizerSpec::validate() const {
    if (d < 2 || d > kMaxDim) throw ArgumentError("extremizer: d must be at least 2");
    if (form.dim() != d) throw ArgumentError("extremizer: form dimension differs from d");
    if (kappa < 1) throw ArgumentError("extremizer: kappa must be positive");
    require_forcing(form, static_cast<double>(kappa));
    if (M < kappa) throw ArgumentError("extremizer: transverse cutoff M must be at least kappa");
    if (M > (std::int64_t{1} << 30)) throw OverflowError("extremizer: transverse cutoff too large");
}

std::size_t ExtremizerSpec::transverse_count() const {
    std::size_t n = 1;
    for (int i = 1; i < d; ++i) n *= static_cast<std::size_t>(2 * M + 1);
    return n;
}

LatticePoint ExtremizerSpec::transverse(std::size_t index) const {
    LatticePoint m(d - 1);
    const auto side = static_cast<std::size_t>(2 * M + 1);
    for (int a = d - 2; a >= 0; --a) {
        m[a] = static_cast<std::int64_t>(index % side) - M;
        index /= side;
    }
    return m;
}

std::vector<double> dual_sequence(const ExtremizerSpec& spec) {
    spec.validate();
    const double e = 0.25 * (spec.d - 1);
    const double k = static_cast<double>(spec.kappa);
    const double top = std::pow(k, 0.5 * (spec.d - 1));
    std::vector<double> c(spec.transverse_count());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double m2 = static_cast<double>(spec.transverse(i).norm2());
        c[i] = top / (std::pow(1.0 + k * k + m2, e) * std::pow(1.0 + m2, e));
    }
    return c;
}

FourierDensityMatrix extremizer_gamma(const ExtremizerSpec& spec) {
    const auto c = dual_sequence(spec);
    const int d = spec.d;
    const double a = 0.5 * (d - 1);
    const double k = static_cast<double>(spec.kappa);
    DensityBuilder b(2, spec.form, std::max(spec.kappa, spec.M));
    b.reserve(c.size());
    std::vector<std::int32_t> key(static_cast<std::size_t>(4 * d), 0);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const LatticePoint m = spec.transverse(i);
        const double m2 = static_cast<double>(m.norm2());
        // slot layout: xi_1 = (kappa, -m), xi_2 = 0, xi'_1 = 0, xi'_2 = (0, -m)
        key[0] = static_cast<std::int32_t>(spec.kappa);
        for (int t = 1; t < d; ++t) {
            key[static_cast<std::size_t>(t)] = static_cast<std::int32_t>(-m[t - 1]);
            key[static_cast<std::size_t>(3 * d + t)] = static_cast<std::int32_t>(-m[t - 1]);
        }
        b.add(key, c[i] / (std::pow(1.0 + k * k + m2, 0.5 * a) * std::pow(1.0 + m2, 0.5 * a)));
    }
    return std::move(b).build();
}

// --- bumps ----------------------------------------------------------------

Mollifier::Mollifier(double half_width) : w_(half_width), norm_(1.0) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ArgumentError("mollifier half width must be positive");
    norm_ = gl_integrate([&](double x) { return value(x); }, -w_, w_, 256);
}

double Mollifier::value(double x) const {
    const double u = x / w_;
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u)) / norm_;
}

double Mollifier::transform(double xi) const {
    return gl_integrate([&](double x) { return value(x) * std::cos(xi * x); }, -w_, w_, 256);
}

double Mollifier::self_convolution(double s) const {
    if (std::abs(s) >= 2.0 * w_) return 0.0;
    return gl_integrate([&](double u) { return value(u) * value(s - u); }, std::max(-w_, s - w_), std::min(w_, s + w_),
                        128);
}

ZetaBump::ZetaBump(double delta, double mollifier_half_width)
    : delta_(delta), rho_(mollifier_half_width), m_(1.0 / (4.0 * M_PI + 2.0 * mollifier_half_width)) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ArgumentError("bump_zeta: delta must be positive");
    const double limit = delta_threshold(mollifier_half_width);
    if (delta > limit)
        throw ThresholdError("bump_zeta: delta = " + std::to_string(delta) +
                             " exceeds the admissible threshold C / m = " + std::to_string(limit));
    if (l1_mollification_error() > 1.0) throw ThresholdError("bump_zeta: mollifier too wide (L1 error above 1)");
}

double ZetaBump::plateau_constant() {
    double lo = 0.0, hi = 0.5;  // phi1_hat decreases from 2 pi to 0 on [0, 1/2]
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi1_hat(mid) >= 2.0 ? lo : hi) = mid;
    }
    return lo;
}

double ZetaBump::delta_threshold(double mollifier_half_width) {
    return plateau_constant() * (4.0 * M_PI + 2.0 * mollifier_half_width);
}

double ZetaBump::phi3(double x) const {
    const double w2 = 2.0 * rho_.half_width();
    if (std::abs(x) >= 4.0 * M_PI + w2) return 0.0;
    // integral of triangle(x - s) sigma(s) over |s| < 2w, split at the kinks of the triangle.
    std::vector<double> cuts{-w2, w2};
    for (double k : {x - 4.0 * M_PI, x, x + 4.0 * M_PI})
        if (k > -w2 && k < w2) cuts.push_back(k);
    std::sort(cuts.begin(), cuts.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        s += gl_integrate([&](double u) { return triangle(x - u) * rho_.self_convolution(u); }, cuts[i], cuts[i + 1],
                          128);
    return s;
}

double ZetaBump::value(double t) const {
    if (std::abs(t) >= delta_) return 0.0;
    const double md = m_ * delta_;
    return phi3(t / md) / md;
}

double ZetaBump::transform(double xi) const {
    const double s = m_ * delta_ * xi;
    const double v = phi1_hat(s) * rho_.transform(s);
    return v * v;
}

double ZetaBump::l1_mollification_error() const {
    // Both edges of phi1 contribute integral_0^w u rho(u) du.
    return 2.0 * gl_integrate([&](double u) { return u * rho_.value(u); }, 0.0, rho_.half_width(), 256);
}

ZetaBump bump_zeta(double delta) { return ZetaBump(delta); }

double GaussianBump::value(double t) const { return std::exp(1.0 - t * t); }

double GaussianBump::transform(double xi) const { return std::exp(1.0) * std::sqrt(M_PI) * std::exp(-0.25 * xi * xi); }

GaussianBump bump_psi() { return {}; }

BumpCheck verify_bump(const ZetaBump& zeta, std::int64_t grid_points, double xi_max, std::int64_t time_samples,
                      double nonneg_tol) {
    if (grid_points < 2 || time_samples < 2 || !(xi_max > 0.0)) throw ArgumentError("verify_bump: bad resolution");
    if (time_samples % 2) ++time_samples;
    const double delta = zeta.delta();
    const double h = 2.0 * delta / static_cast<double>(time_samples);
    std::vector<double> t(static_cast<std::size_t>(time_samples) + 1), wz(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = -delta + h * static_cast<double>(i);
        const double simpson = (i == 0 || i + 1 == t.size()) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        wz[i] = simpson * h / 3.0 * zeta.value(t[i]);
    }
    auto quad_transform = [&](double xi) {
        CompensatedSum s;
        for (std::size_t i = 0; i < t.size(); ++i) s.add(wz[i] * std::cos(xi * t[i]));
        return s.value();
    };

    BumpCheck out;
    out.min_transform = INFINITY;
    for (std::int64_t g = 0; g < grid_points; ++g) {
        const double xi = -xi_max + 2.0 * xi_max * static_cast<double>(g) / static_cast<double>(grid_points - 1);
        const double v = quad_transform(xi);
        out.min_transform = std::min(out.min_transform, v);
        out.max_closed_form_gap = std::max(out.max_closed_form_gap, std::abs(v - zeta.transform(xi)));
    }
    out.min_on_unit = INFINITY;
    for (int g = 0; g <= 200; ++g) out.min_on_unit = std::min(out.min_on_unit, quad_transform(-1.0 + 0.01 * g));
    for (int g = 0; g <= 1000; ++g) {
        const double s = delta * (1.0 + 0.001 * g);
        out.support_max_outside = std::max({out.support_max_outside, std::abs(zeta.value(s)), std::abs(zeta.value(-s))});
    }
    out.support_ok = out.support_max_outside == 0.0;
    out.nonnegative_ok = out.min_transform >= -nonneg_tol;
    out.lower_bound_ok = out.min_on_unit >= 1.0;
    return out;
}

// --- ratio experiment -----------------------------------------------------

RatioReport ratio_experiment(const std::vector<std::int64_t>& kappas, double alpha, double delta,
                             const QuadraticForm& form, int d, const RatioOptions& options) {
    if (kappas.size() < 2) throw ArgumentError("ratio_experiment: need at least two kappa values");
    if (!(delta > 0.0)) throw ArgumentError("ratio_experiment: delta must be positive");
    if (options.m_factor < 0) throw ArgumentError("ratio_experiment: m_factor must be nonnegative");
    RatioReport rep;
    for (auto kappa : kappas) {
        ExtremizerSpec spec;
        spec.kappa = kappa;
        spec.M = options.m_factor == 0 ? kappa * kappa : options.m_factor * kappa;
        spec.d = d;
        spec.form = form;
        spec.validate();
        const auto gamma = extremizer_gamma(spec);

        RatioRow row;
        row.kappa = kappa;
        row.M = spec.M;
        row.ln_kappa = std::log(static_cast<double>(kappa));
        row.data_norm = hk_alpha_norm(gamma, alpha);
        SpacetimeOptions o;
        o.quadrature = options.quadrature;
        o.sign = CollisionSign::full;
        row.ratio = spacetime_norm(gamma, 1, alpha, delta, o) / row.data_norm;
        o.sign = CollisionSign::plus;
        row.b_plus_part = spacetime_norm(gamma, 1, alpha, delta, o) / row.data_norm;
        o.sign = CollisionSign::minus;
        row.b_minus_part = spacetime_norm(gamma, 1, alpha, delta, o) / row.data_norm;
        row.ratio_sq = row.ratio * row.ratio;
        rep.rows.push_back(row);
    }
    std::vector<double> x, y;
    double lo = INFINITY, hi = 0.0;
    for (const auto& r : rep.rows) {
        x.push_back(r.ln_kappa);
        y.push_back(r.ratio_sq);
        lo = std::min(lo, r.b_minus_part);
        hi = std::max(hi, r.b_minus_part);
    }
    rep.fit = fit_line(x, y);
    rep.b_minus_variation = lo > 0.0 ? (hi - lo) / lo : INFINITY;
    return rep;
}

}  // namespace gplab
