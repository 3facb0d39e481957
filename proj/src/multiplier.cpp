#include "gplab/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>

#include "gplab/errors.hpp"
#include "gplab/expsum.hpp"
#include "gplab/numeric.hpp"

namespace gplab {

namespace {

constexpr std::size_t kOuterBlocks = 64;

void require_dim(const QuadraticForm& form, const LatticePoint& x, const char* what) {
    if (x.dim() != form.dim())
        throw ArgumentError(std::string(what) + ": lattice point has dimension " + std::to_string(x.dim()) +
                            ", form has " + std::to_string(form.dim()));
}

// Calls visit(x) for every x in the box [lo, hi] whose linear value c.x can lie
// in [vlo, vhi]. The solved axis gets a one-point margin on each side, so
// callers must re-check their exact predicate.
template <class F>
void for_each_slab_candidate(int d, const double* c, double vlo, double vhi, const std::int64_t* lo,
                             const std::int64_t* hi, F&& visit) {
    for (int i = 0; i < d; ++i)
        if (lo[i] > hi[i]) return;
    int a = 0;
    for (int i = 1; i < d; ++i)
        if (std::abs(c[i]) > std::abs(c[a])) a = i;
    LatticePoint x(d);
    for (int i = 0; i < d; ++i) x[i] = lo[i];
    const bool degenerate = c[a] == 0.0;
    if (degenerate && !(vlo <= 0.0 && 0.0 <= vhi)) return;
    for (;;) {
        if (degenerate) {
            for (std::int64_t v = lo[a]; v <= hi[a]; ++v) {
                x[a] = v;
                visit(x);
            }
        } else {
            double rest = 0.0;
            for (int i = 0; i < d; ++i)
                if (i != a) rest += c[i] * static_cast<double>(x[i]);
            double t1 = (vlo - rest) / c[a];
            double t2 = (vhi - rest) / c[a];
            if (t1 > t2) std::swap(t1, t2);
            const double flo = static_cast<double>(lo[a]);
            const double fhi = static_cast<double>(hi[a]);
            if (!(t2 < flo - 2.0 || t1 > fhi + 2.0)) {
                const std::int64_t s = std::max(lo[a], static_cast<std::int64_t>(std::floor(std::max(t1, flo - 2.0))) - 1);
                const std::int64_t e = std::min(hi[a], static_cast<std::int64_t>(std::ceil(std::min(t2, fhi + 2.0))) + 1);
                for (std::int64_t v = s; v <= e; ++v) {
                    x[a] = v;
                    visit(x);
                }
            }
        }
        int i = d - 1;
        for (; i >= 0; --i) {
            if (i == a) continue;
            if (x[i] < hi[i]) {
                ++x[i];
                break;
            }
            x[i] = lo[i];
        }
        if (i < 0) break;
    }
}

// Lexicographic decoding of index k in the box [-R, R]^d, shifted by `center`.
LatticePoint box_point(std::int64_t k, int d, std::int64_t R, const LatticePoint& center) {
    LatticePoint x(d);
    const std::int64_t w = 2 * R + 1;
    for (int i = d - 1; i >= 0; --i) {
        x[i] = center[i] + (k % w) - R;
        k /= w;
    }
    return x;
}

std::int64_t ipow(std::int64_t b, int e) {
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace

void MultiplierQuery::validate() const {
    if (truncation < 1) throw ArgumentError("MultiplierQuery: truncation R must be >= 1");
    if (!(alpha > 0.0)) throw ArgumentError("MultiplierQuery: alpha must be > 0");
    if (!std::isfinite(tau)) throw ArgumentError("MultiplierQuery: tau must be finite");
    require_dim(form, p, "MultiplierQuery");
}

double multiplier_phase(Representation rep, const QuadraticForm& form, double tau, const LatticePoint& p,
                        const LatticePoint& m, const LatticePoint& n) {
    if (rep == Representation::original) return tau + q_form(form, p - n - m) + q_form(form, n) - q_form(form, m);
    return tau + q_form(form, p) - 2.0 * q_bilinear(form, n, m);
}

double multiplier_weight(Representation rep, double alpha, const LatticePoint& p, const LatticePoint& m,
                         const LatticePoint& n) {
    const double num = 1.0 + static_cast<double>(p.norm2());
    double den;
    const LatticePoint w = p - n - m;
    if (rep == Representation::original)
        den = (1.0 + static_cast<double>(w.norm2())) * (1.0 + static_cast<double>(n.norm2())) *
              (1.0 + static_cast<double>(m.norm2()));
    else
        den = (1.0 + static_cast<double>((m - p).norm2())) * (1.0 + static_cast<double>((n - p).norm2())) *
              (1.0 + static_cast<double>(w.norm2()));
    // <x>^{2a} = (1 + |x|^2)^a
    return std::pow(num, alpha) / std::pow(den, alpha);
}

double multiplier_summand(Representation rep, const QuadraticForm& form, double tau, double alpha,
                          const LatticePoint& p, const LatticePoint& m, const LatticePoint& n) {
    if (!in_unit_window(multiplier_phase(rep, form, tau, p, m, n))) return 0.0;
    return multiplier_weight(rep, alpha, p, m, n);
}

MNPair original_to_polarized(const LatticePoint& p, const LatticePoint& m, const LatticePoint& n) {
    return {m + n, p - n};
}

MNPair polarized_to_original(const LatticePoint& p, const LatticePoint& m, const LatticePoint& n) {
    return {m + n - p, p - n};
}

double multiplier_sum(const MultiplierQuery& q) {
    q.validate();
    const int d = q.form.dim();
    const std::int64_t R = q.truncation;
    const std::int64_t outer = ipow(2 * R + 1, d);
    const LatticePoint origin(d);
    const double target = q.tau + q_form(q.form, q.p);
    const double vlo = target - 1.0 - 2.0 * kWindowTol;
    const double vhi = target + 2.0 * kWindowTol;

    auto block_sum = [&](std::size_t blk) {
        const std::int64_t k0 = outer * static_cast<std::int64_t>(blk) / static_cast<std::int64_t>(kOuterBlocks);
        const std::int64_t k1 = outer * static_cast<std::int64_t>(blk + 1) / static_cast<std::int64_t>(kOuterBlocks);
        CompensatedSum acc;
        std::vector<double> c(static_cast<std::size_t>(d));
        std::vector<std::int64_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
        for (std::int64_t k = k0; k < k1; ++k) {
            const LatticePoint outer_pt = box_point(k, d, R, origin);
            if (q.representation == Representation::polarized) {
                // outer m, solve the window 2Q(n, m) in [vlo, vhi] for n.
                const LatticePoint& m = outer_pt;
                if (m.is_zero()) continue;
                for (int i = 0; i < d; ++i) {
                    c[i] = 2.0 * q.form.theta_sq(i) * static_cast<double>(m[i]);
                    lo[i] = -R;
                    hi[i] = R;
                }
                for_each_slab_candidate(d, c.data(), vlo, vhi, lo.data(), hi.data(), [&](const LatticePoint& n) {
                    if (n.is_zero()) return;
                    acc.add(multiplier_summand(Representation::polarized, q.form, q.tau, q.alpha, q.p, m, n));
                });
            } else {
                // outer n; through the change of variables the window is linear in
                // m' = m + n with coefficient 2 theta^2 (p - n).
                const LatticePoint& n = outer_pt;
                const LatticePoint np = q.p - n;
                for (int i = 0; i < d; ++i) {
                    c[i] = 2.0 * q.form.theta_sq(i) * static_cast<double>(np[i]);
                    lo[i] = n[i] - R;
                    hi[i] = n[i] + R;
                }
                for_each_slab_candidate(d, c.data(), vlo, vhi, lo.data(), hi.data(), [&](const LatticePoint& mp) {
                    const LatticePoint m = mp - n;
                    acc.add(multiplier_summand(Representation::original, q.form, q.tau, q.alpha, q.p, m, n));
                });
            }
        }
        return acc.value();
    };
    const auto partial = map_blocks<double>(kOuterBlocks, q.threads, block_sum);
    CompensatedSum total;
    for (double v : partial) total.add(v);
    return total.value();
}

EnumerationResult enumerate_E(double tau, const LatticePoint& p, const DyadicIndex& j, const QuadraticForm& form,
                              std::int64_t R) {
    require_dim(form, p, "enumerate_E");
    if (j.j1 < 0 || j.j2 < 0 || j.j3 < 0) throw ArgumentError("enumerate_E: shell exponents must be >= 0");
    if (j.max() > 40) throw ArgumentError("enumerate_E: shell exponent too large");
    const int d = form.dim();
    EnumerationResult out;
    const std::int64_t rm = (std::int64_t{1} << j.j1) - 1;  // |m - p| < 2^j1
    const std::int64_t rn = (std::int64_t{1} << j.j2) - 1;
    std::vector<std::int64_t> mlo(d), mhi(d), nlo(d), nhi(d);
    for (int i = 0; i < d; ++i) {
        mlo[i] = p[i] - rm;
        mhi[i] = p[i] + rm;
        nlo[i] = p[i] - rn;
        nhi[i] = p[i] + rn;
        if (R > 0) {
            if (mlo[i] < -R || mhi[i] > R || nlo[i] < -R || nhi[i] > R) out.clipped = true;
            mlo[i] = std::max(mlo[i], -R);
            mhi[i] = std::min(mhi[i], R);
            nlo[i] = std::max(nlo[i], -R);
            nhi[i] = std::min(nhi[i], R);
        }
    }
    const double target = tau + q_form(form, p);
    const double vlo = target - 1.0 - 2.0 * kWindowTol;
    const double vhi = target + 2.0 * kWindowTol;
    std::vector<double> c(static_cast<std::size_t>(d));
    std::vector<double> zero(static_cast<std::size_t>(d), 0.0);
    for_each_slab_candidate(d, zero.data(), 0.0, 0.0, mlo.data(), mhi.data(), [&](const LatticePoint& m) {
        if (m.is_zero() || shell_of(m - p) != j.j1) return;
        for (int i = 0; i < d; ++i) c[i] = 2.0 * form.theta_sq(i) * static_cast<double>(m[i]);
        for_each_slab_candidate(d, c.data(), vlo, vhi, nlo.data(), nhi.data(), [&](const LatticePoint& n) {
            if (n.is_zero() || shell_of(n - p) != j.j2 || shell_of(p - n - m) != j.j3) return;
            if (!in_unit_window(multiplier_phase(Representation::polarized, form, tau, p, m, n))) return;
            out.pairs.emplace_back(m, n);
        });
    });
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

double count_exponent(int d, double epsilon) { return static_cast<double>(d - 1) + epsilon; }

std::vector<CountRecord> dyadic_bound_report(double tau, const LatticePoint& p, const QuadraticForm& form,
                                             int j_max_cap, double epsilon) {
    require_dim(form, p, "dyadic_bound_report");
    if (j_max_cap < 0 || j_max_cap > 20) throw ArgumentError("dyadic_bound_report: j_max_cap must be in [0, 20]");
    const int d = form.dim();
    const int w = j_max_cap + 1;
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(w * w * w), 0);
    const std::int64_t r = (std::int64_t{1} << j_max_cap) - 1;
    std::vector<std::int64_t> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        lo[i] = p[i] - r;
        hi[i] = p[i] + r;
    }
    const double target = tau + q_form(form, p);
    const double vlo = target - 1.0 - 2.0 * kWindowTol;
    const double vhi = target + 2.0 * kWindowTol;
    std::vector<double> c(static_cast<std::size_t>(d));
    std::vector<double> zero(static_cast<std::size_t>(d), 0.0);
    for_each_slab_candidate(d, zero.data(), 0.0, 0.0, lo.data(), hi.data(), [&](const LatticePoint& m) {
        if (m.is_zero()) return;
        const int j1 = shell_of(m - p);
        if (j1 > j_max_cap) return;
        for (int i = 0; i < d; ++i) c[i] = 2.0 * form.theta_sq(i) * static_cast<double>(m[i]);
        for_each_slab_candidate(d, c.data(), vlo, vhi, lo.data(), hi.data(), [&](const LatticePoint& n) {
            if (n.is_zero()) return;
            const int j2 = shell_of(n - p);
            if (j2 > j_max_cap) return;
            const int j3 = shell_of(p - n - m);
            if (j3 > j_max_cap) return;
            if (!in_unit_window(multiplier_phase(Representation::polarized, form, tau, p, m, n))) return;
            ++counts[static_cast<std::size_t>((j1 * w + j2) * w + j3)];
        });
    });
    const double cexp = count_exponent(d, epsilon);
    std::vector<CountRecord> out;
    out.reserve(counts.size());
    for (int a = 0; a < w; ++a)
        for (int b = 0; b < w; ++b)
            for (int e = 0; e < w; ++e) {
                CountRecord rec;
                rec.j = {a, b, e};
                rec.count = counts[static_cast<std::size_t>((a * w + b) * w + e)];
                rec.bound = std::exp2(cexp * (rec.j.min() + rec.j.med()));
                rec.ratio = static_cast<double>(rec.count) / rec.bound;
                out.push_back(rec);
            }
    return out;
}

double forcing_threshold(const QuadraticForm& form) { return 2.0 / form.theta_sq(0); }

void require_forcing(const QuadraticForm& form, double kappa) {
    const double thr = forcing_threshold(form);
    if (!(kappa > thr)) {
        std::ostringstream os;
        os.precision(12);
        os << "kappa = " << kappa << " is not above the forcing threshold 2/theta_1^2 = " << thr;
        throw PreconditionError(os.str());
    }
}

namespace {

// Partial sums in fixed-size chunks, chunk totals compensated: fast and
// accurate to a few ulps for the long positive series below.
template <class F>
double chunked_sum(std::int64_t first, std::int64_t last, F&& f) {
    CompensatedSum total;
    constexpr std::int64_t kChunk = 4096;
    for (std::int64_t s = first; s <= last; s += kChunk) {
        const std::int64_t e = std::min(last, s + kChunk - 1);
        double part = 0.0;
        for (std::int64_t i = s; i <= e; ++i) part += f(i);
        total.add(part);
    }
    return total.value();
}

double slice_direct(std::int64_t kappa, std::int64_t M, int d) {
    const double k2 = static_cast<double>(kappa) * static_cast<double>(kappa);
    const double e = 0.5 * (d - 1);
    const double num = std::pow(static_cast<double>(kappa), d - 1);
    auto f = [&](double r2) {
        const double den = (1.0 + k2 + r2) * (1.0 + r2);
        if (d == 2) return num / std::sqrt(den);
        if (d == 3) return num / den;
        return num / std::pow(den, e);
    };
    if (d == 2) {
        return f(0.0) + 2.0 * chunked_sum(1, M, [&](std::int64_t m) {
                   const double md = static_cast<double>(m);
                   return f(md * md);
               });
    }
    // Nonnegative orthant with multiplicity 2^(number of nonzero coordinates).
    const int t = d - 1;
    std::vector<std::int64_t> x(static_cast<std::size_t>(t), 0);
    CompensatedSum total;
    for (;;) {
        double r2_head = 0.0;
        double mult_head = 1.0;
        for (int i = 0; i + 1 < t; ++i) {
            const double v = static_cast<double>(x[i]);
            r2_head += v * v;
            if (x[i] != 0) mult_head *= 2.0;
        }
        total.add(mult_head * (f(r2_head) + 2.0 * chunked_sum(1, M, [&](std::int64_t m) {
                                    const double md = static_cast<double>(m);
                                    return f(r2_head + md * md);
                                })));
        int i = t - 2;
        while (i >= 0 && x[i] == M) {
            x[i] = 0;
            --i;
        }
        if (i < 0) break;
        ++x[i];
    }
    return total.value();
}

// sum_{b=-M}^{M} 1/(c + b^2).
long double row_sum(long double c, std::int64_t M) {
    // The asymptotic tail is only trusted once the first omitted term is far out.
    if (M < 64) {
        long double s = 1.0L / c;
        for (std::int64_t b = 1; b <= M; ++b) s += 2.0L / (c + static_cast<long double>(b) * b);
        return s;
    }
    const long double pi = std::numbers::pi_v<long double>;
    const long double s = std::sqrt(c);
    const long double arg = pi * s;
    const long double coth = arg > 40.0L ? 1.0L : 1.0L / std::tanh(arg);
    const long double full = pi * coth / s;
    // Tail sum_{b >= A} g(b), g(x) = 1/(c + x^2), by Euler-Maclaurin;
    // g^(k)(x) = Im[(-1)^k k! (x - i s)^{-(k+1)}] / s.
    const long double A = static_cast<long double>(M + 1);
    const std::complex<long double> z(A, -s);
    const std::complex<long double> inv = 1.0L / z;
    auto deriv = [&](int k, long double fact) {
        std::complex<long double> w = inv;
        for (int i = 0; i < k; ++i) w *= inv;
        return ((k % 2 ? -1.0L : 1.0L) * fact * w).imag() / s;
    };
    const long double integral = std::atan(s / A) / s;
    const long double g = 1.0L / (c + A * A);
    const long double tail = integral + 0.5L * g - deriv(1, 1.0L) / 12.0L + deriv(3, 6.0L) / 720.0L -
                             deriv(5, 120.0L) / 30240.0L;
    return full - 2.0L * tail;
}

double slice_rows_3d(std::int64_t kappa, std::int64_t M) {
    // kappa^2 / ((1+kappa^2+r^2)(1+r^2)) = 1/(1+r^2) - 1/(1+kappa^2+r^2)
    const long double k2 = static_cast<long double>(kappa) * static_cast<long double>(kappa);
    auto row = [&](std::int64_t a) {
        const long double a2 = static_cast<long double>(a) * static_cast<long double>(a);
        return row_sum(1.0L + a2, M) - row_sum(1.0L + k2 + a2, M);
    };
    long double total = row(0);
    for (std::int64_t a = 1; a <= M; ++a) total += 2.0L * row(a);
    return static_cast<double>(total);
}

}  // namespace

double endpoint_slice_sum(std::int64_t kappa, const QuadraticForm& form, std::int64_t M, int d, SliceMethod method) {
    if (d < 2 || d != form.dim()) throw ArgumentError("endpoint_slice_sum: d must be >= 2 and match the form");
    if (kappa < 2) throw ArgumentError("endpoint_slice_sum: kappa must be >= 2");
    if (M < kappa) throw ArgumentError("endpoint_slice_sum: M must be >= kappa");
    require_forcing(form, static_cast<double>(kappa));
    if (method == SliceMethod::automatic) {
        const double terms = std::pow(static_cast<double>(M + 1), d - 1);
        method = (d == 3 && terms > 5e7) ? SliceMethod::row_closed_form : SliceMethod::direct;
    }
    if (method == SliceMethod::row_closed_form) {
        if (d != 3) throw ArgumentError("endpoint_slice_sum: row_closed_form is implemented for d = 3");
        return slice_rows_3d(kappa, M);
    }
    return slice_direct(kappa, M, d);
}

bool PhaseBoxes::empty() const {
    for (std::size_t i = 0; i < eta_lo.size(); ++i)
        if (eta_lo[i] > eta_hi[i] || etap_lo[i] > etap_hi[i]) return true;
    return false;
}

PhaseBoxes phase_boxes(const LatticePoint& p, const DyadicIndex& j) {
    const int d = p.dim();
    PhaseBoxes b;
    b.eta_lo.resize(d);
    b.eta_hi.resize(d);
    b.etap_lo.resize(d);
    b.etap_hi.resize(d);
    const std::int64_t r0 = std::int64_t{1} << (std::max(j.j1, j.j2) + 1);
    const std::int64_t rp = std::int64_t{1} << (std::max(j.j2, j.j3) + 2);
    const std::int64_t rm = std::int64_t{1} << (std::max(j.j1, j.j3) + 2);
    const std::int64_t s3 = std::int64_t{1} << j.j3;
    const std::int64_t s12 = std::int64_t{1} << (std::max(j.j1, j.j2) + 1);
    for (int i = 0; i < d; ++i) {
        // eta = n - m lies in the boxes around 0, p and -p.
        b.eta_lo[i] = std::max({-r0, p[i] - rp, -p[i] - rm});
        b.eta_hi[i] = std::min({r0, p[i] + rp, -p[i] + rm});
        // eta' = n + m = p - (p - n - m) lies in the boxes around p and 2p.
        b.etap_lo[i] = std::max(p[i] - s3, 2 * p[i] - s12);
        b.etap_hi[i] = std::min(p[i] + s3, 2 * p[i] + s12);
    }
    return b;
}

double phase_count_fourier_bound(double tau, const LatticePoint& p, const DyadicIndex& j, const QuadraticForm& form,
                                 const TimeBump& bump, std::int64_t samples) {
    require_dim(form, p, "phase_count_fourier_bound");
    const PhaseBoxes box = phase_boxes(p, j);
    if (box.empty()) return 0.0;
    const int d = form.dim();
    const double shift = tau + q_form(form, p);
    // Largest angular frequency of the integrand.
    double qmax_eta = 0.0, qmax_etap = 0.0;
    for (int i = 0; i < d; ++i) {
        auto sq = [](std::int64_t v) { return static_cast<double>(v) * static_cast<double>(v); };
        qmax_eta += form.theta_sq(i) * std::max(sq(box.eta_lo[i]), sq(box.eta_hi[i]));
        qmax_etap += form.theta_sq(i) * std::max(sq(box.etap_lo[i]), sq(box.etap_hi[i]));
    }
    const double wmax = 0.5 * (qmax_eta + qmax_etap) + std::abs(shift);
    const double T = bump.half_support();
    const auto need = std::max<std::int64_t>(
        16384, static_cast<std::int64_t>(std::ceil(8.0 * wmax * 2.0 * T / (2.0 * std::numbers::pi))));
    if (samples <= 0) samples = need;
    if (samples < need)
        throw ResolutionError("phase_count_fourier_bound: " + std::to_string(samples) +
                              " time samples requested, at least " + std::to_string(need) + " required");
    const double h = 2.0 * T / static_cast<double>(samples);
    CompensatedSum acc;
    for (std::int64_t k = 0; k <= samples; ++k) {
        const double t = -T + h * static_cast<double>(k);
        const double wt = bump.value(t);
        if (wt == 0.0) continue;
        std::complex<double> prod = 1.0;
        for (int i = 0; i < d; ++i) {
            const double half = 0.5 * form.theta_sq(i);
            const ExpSumSpec se{.b = box.eta_lo[i], .n = box.eta_hi[i] - box.eta_lo[i] + 1, .scale = half};
            const ExpSumSpec sp{.b = box.etap_lo[i], .n = box.etap_hi[i] - box.etap_lo[i] + 1, .scale = half};
            prod *= partial_sum(sp, t) * std::conj(partial_sum(se, t));
        }
        prod *= std::polar(1.0, -shift * t);
        const double edge = (k == 0 || k == samples) ? 0.5 : 1.0;
        acc.add(edge * wt * prod.real());
    }
    return acc.value() * h;
}

double phase_count_spectral(double tau, const LatticePoint& p, const DyadicIndex& j, const QuadraticForm& form,
                            const TimeBump& bump) {
    require_dim(form, p, "phase_count_spectral");
    const PhaseBoxes box = phase_boxes(p, j);
    if (box.empty()) return 0.0;
    const int d = form.dim();
    const double shift = tau + q_form(form, p);
    std::vector<double> qe, qp;
    std::vector<double> zero(static_cast<std::size_t>(d), 0.0);
    for_each_slab_candidate(d, zero.data(), 0.0, 0.0, box.eta_lo.data(), box.eta_hi.data(),
                            [&](const LatticePoint& x) { qe.push_back(q_form(form, x)); });
    for_each_slab_candidate(d, zero.data(), 0.0, 0.0, box.etap_lo.data(), box.etap_hi.data(),
                            [&](const LatticePoint& x) { qp.push_back(q_form(form, x)); });
    CompensatedSum acc;
    for (double a : qp)
        for (double b : qe) acc.add(bump.transform(shift - 0.5 * (a - b)));
    return acc.value();
}

}  // namespace gplab
