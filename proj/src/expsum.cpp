#include "gplab/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gplab/errors.hpp"
#include "gplab/numeric.hpp"

namespace gplab {

namespace {

using i128 = __int128;
constexpr long double kTwoPiL = 6.283185307179586476925286766559L;

// exp(i * x) with x reduced modulo 2*pi in extended precision first.
std::complex<double> cis(long double x) {
    const long double r = std::fmod(x, kTwoPiL);
    return {static_cast<double>(std::cos(r)), static_cast<double>(std::sin(r))};
}

// Sum of exp(i*scale*t*(b+r)^2) over r in [0, N), by the phasor recursion
// z_{r+1} = z_r w_r, w_{r+1} = w_r exp(2i*scale*t), dropping the global phase
// exp(i*scale*t*b^2) when `with_global_phase` is false.
std::complex<double> weyl_sum(std::int64_t b, std::int64_t n, double scale, double t, bool with_global_phase) {
    const long double st = static_cast<long double>(scale) * t;
    std::complex<double> z = with_global_phase ? cis(st * static_cast<long double>(b) * b) : 1.0;
    std::complex<double> w = cis(st * (2.0L * static_cast<long double>(b) + 1.0L));
    const std::complex<double> dw = cis(2.0L * st);
    std::complex<double> acc = 0.0;
    // Re-anchor every 64 terms to keep the recursion error at a few ulps.
    for (std::int64_t r = 0; r < n; ++r) {
        if (r % 64 == 0 && r > 0) {
            const long double m = static_cast<long double>(b) + r;
            z = with_global_phase ? cis(st * m * m) : cis(st * (2.0L * b * r + static_cast<long double>(r) * r));
            w = cis(st * (2.0L * m + 1.0L));
        }
        acc += z;
        z *= w;
        w *= dw;
    }
    return acc;
}

double pow_abs(std::complex<double> z, double p) {
    const double a2 = std::norm(z);
    if (p == 4.0) return a2 * a2;
    if (p == 6.0) return a2 * a2 * a2;
    if (p == 2.0) return a2;
    return std::pow(a2, 0.5 * p);
}

bool is_even_integer(double p) { return p >= 2.0 && std::floor(p) == p && static_cast<long long>(p) % 2 == 0; }

double whole_periods(const ExpSumSpec& spec) {
    return spec.length() / (2.0 * std::numbers::pi);
}

bool lifted_applicable(const ExpSumSpec& spec, double p) {
    const double k = whole_periods(spec);
    return spec.scale == 1.0 && is_even_integer(p) && k >= 1.0 - 1e-12 && std::abs(k - std::nearbyint(k)) < 1e-12;
}

}  // namespace

void ExpSumSpec::validate() const {
    if (n < 1) throw ArgumentError("ExpSumSpec: N must be >= 1");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("ExpSumSpec: scale must be positive");
    if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1))
        throw ArgumentError("ExpSumSpec: time interval must be nonempty and finite");
    if (std::abs(b) > (std::int64_t{1} << 40) || n > (std::int64_t{1} << 30))
        throw OverflowError("ExpSumSpec: |b| or N too large for the phase arithmetic");
}

std::complex<double> partial_sum(const ExpSumSpec& spec, double t) {
    spec.validate();
    return weyl_sum(spec.b, spec.n, spec.scale, t, true);
}

std::int64_t required_samples(const ExpSumSpec& spec, double p) {
    spec.validate();
    const i128 lo = spec.b;
    const i128 hi = spec.b + spec.n - 1;
    i128 min_sq = 0;
    if (lo > 0) min_sq = lo * lo;
    else if (hi < 0) min_sq = hi * hi;
    const i128 max_sq = std::max(lo * lo, hi * hi);
    const double spread = static_cast<double>(max_sq - min_sq);
    const double need = 8.0 * p * spec.scale * spread * spec.length() / (2.0 * std::numbers::pi);
    if (need > 9e18) return std::numeric_limits<std::int64_t>::max();
    return std::max<std::int64_t>(16, static_cast<std::int64_t>(std::ceil(need)));
}

double lp_time_norm(const ExpSumSpec& spec, double p, std::int64_t samples) {
    spec.validate();
    if (!(p >= 1.0)) throw ArgumentError("lp_time_norm: p must be >= 1");
    const std::int64_t need = required_samples(spec, p);
    if (samples < need)
        throw ResolutionError("lp_time_norm: " + std::to_string(samples) + " samples requested, at least " +
                              std::to_string(need) + " required");
    const double h = spec.length() / static_cast<double>(samples);
    CompensatedSum acc;
    for (std::int64_t i = 0; i <= samples; ++i) {
        const double t = spec.t0 + h * static_cast<double>(i);
        const double w = (i == 0 || i == samples) ? 0.5 : 1.0;
        acc.add(w * pow_abs(weyl_sum(spec.b, spec.n, spec.scale, t, false), p));
    }
    return acc.value() * h;
}

double lp_time_norm_lifted(const ExpSumSpec& spec, int p) {
    spec.validate();
    if (!lifted_applicable(spec, p))
        throw ArgumentError("lp_time_norm_lifted: needs scale = 1, even p and a window of whole 2*pi periods");
    const std::int64_t q = p / 2;
    const std::int64_t n = spec.n;
    const std::int64_t b = spec.b;
    // Frequencies of F(t,u) = |sum_r exp(i(u r + t r^2))|^p lie in |a| <= At, |c| <= Au.
    const std::int64_t at = q * (n - 1) * (n - 1);
    const std::int64_t au = q * (n - 1);
    // Only the Fourier modes on the line a + 2 b c = 0 contribute.
    std::vector<std::int64_t> cs;
    std::int64_t max_a = 0;
    std::int64_t max_c = 0;
    for (std::int64_t c = -au; c <= au; ++c) {
        const i128 a = -static_cast<i128>(2) * b * c;
        if (a >= -at && a <= at) {
            cs.push_back(c);
            max_a = std::max(max_a, static_cast<std::int64_t>(a < 0 ? -a : a));
            max_c = std::max(max_c, c < 0 ? -c : c);
        }
    }
    // Grid sizes that keep every wanted coefficient free of aliases: a sample
    // grid of size K folds frequency f onto f mod K.
    const std::int64_t kt = at + max_a + 1;
    const std::int64_t ku = au + max_c + 1;
    if (static_cast<double>(kt) * static_cast<double>(ku) * static_cast<double>(n) > 5e11)
        throw ResolutionError("lp_time_norm_lifted: lifted grid too large for N = " + std::to_string(n));
    std::vector<std::complex<double>> u_phase(cs.size() * static_cast<std::size_t>(ku));
    for (std::size_t ci = 0; ci < cs.size(); ++ci)
        for (std::int64_t l = 0; l < ku; ++l) {
            const std::int64_t e = ((cs[ci] * l) % ku + ku) % ku;
            u_phase[ci * ku + l] = cis(-kTwoPiL * e / ku);
        }
    std::vector<std::complex<double>> acc(cs.size(), 0.0);
    std::vector<double> row(static_cast<std::size_t>(ku));
    std::vector<std::complex<double>> wr(static_cast<std::size_t>(n));
    for (std::int64_t j = 0; j < kt; ++j) {
        // t_j = 2 pi j / kt, reduced exactly via j r^2 mod kt.
        for (std::int64_t r = 0; r < n; ++r) {
            const std::int64_t e = static_cast<std::int64_t>((static_cast<i128>(j) * r * r) % kt);
            wr[r] = cis(kTwoPiL * e / kt);
        }
        for (std::int64_t l = 0; l < ku; ++l) {
            const std::complex<double> step = cis(kTwoPiL * l / ku);
            std::complex<double> s = 0.0;
            std::complex<double> z = 1.0;
            for (std::int64_t r = 0; r < n; ++r) {
                if (r % 64 == 0 && r > 0) z = cis(kTwoPiL * static_cast<long double>((l * r) % ku) / ku);
                s += wr[r] * z;
                z *= step;
            }
            row[l] = pow_abs(s, p);
        }
        for (std::size_t ci = 0; ci < cs.size(); ++ci) {
            std::complex<double> g = 0.0;
            const std::complex<double>* ph = &u_phase[ci * ku];
            for (std::int64_t l = 0; l < ku; ++l) g += row[l] * ph[l];
            // exp(i 2 b c t_j) with the exponent reduced modulo kt in integers.
            const i128 e = ((static_cast<i128>(2) * b * cs[ci] * j) % kt + kt) % kt;
            acc[ci] += g * cis(kTwoPiL * static_cast<long double>(e) / kt);
        }
    }
    std::complex<double> total = 0.0;
    for (const auto& a : acc) total += a;
    const double periods = std::nearbyint(whole_periods(spec));
    return periods * 2.0 * std::numbers::pi * total.real() / (static_cast<double>(kt) * static_cast<double>(ku));
}

double lp_time_norm(const ExpSumSpec& spec, double p, LpMethod method) {
    spec.validate();
    switch (method) {
        case LpMethod::trapezoid:
            return lp_time_norm(spec, p, required_samples(spec, p));
        case LpMethod::lifted:
            return lp_time_norm_lifted(spec, static_cast<int>(p));
        case LpMethod::automatic:
            break;
    }
    const double direct_cost = static_cast<double>(required_samples(spec, p)) * static_cast<double>(spec.n);
    if (lifted_applicable(spec, p)) {
        const double q = p / 2.0;
        const double nn = static_cast<double>(spec.n - 1);
        double max_c = q * nn;
        if (spec.b != 0) max_c = std::min(max_c, std::floor(q * nn * nn / (2.0 * std::abs(static_cast<double>(spec.b)))));
        const double valid_c = 2.0 * max_c + 1.0;
        const double kt = q * nn * nn + 2.0 * std::abs(static_cast<double>(spec.b)) * max_c + 1.0;
        const double ku = q * nn + max_c + 1.0;
        const double lifted_cost = kt * ku * (static_cast<double>(spec.n) + valid_c);
        if (lifted_cost < direct_cost) return lp_time_norm_lifted(spec, static_cast<int>(p));
    }
    return lp_time_norm(spec, p, required_samples(spec, p));
}

std::uint64_t l4_pair_count(std::int64_t b, std::int64_t n) {
    if (n < 1) throw ArgumentError("l4_plancherel: N must be >= 1");
    if (n > (std::int64_t{1} << 15))
        throw OverflowError("l4_plancherel: N = " + std::to_string(n) + " exceeds the exact counting range");
    const i128 top = static_cast<i128>(b < 0 ? -b : b) + n;
    if (top * top > static_cast<i128>(std::numeric_limits<std::int64_t>::max() / 2))
        throw OverflowError("l4_plancherel: quadratic frequencies do not fit 64-bit integers");
    std::vector<std::int64_t> diffs;
    diffs.reserve(static_cast<std::size_t>(n * n));
    for (std::int64_t m1 = b; m1 < b + n; ++m1)
        for (std::int64_t m2 = b; m2 < b + n; ++m2) diffs.push_back(m1 * m1 - m2 * m2);
    std::sort(diffs.begin(), diffs.end());
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < diffs.size();) {
        std::size_t j = i;
        while (j < diffs.size() && diffs[j] == diffs[i]) ++j;
        const std::uint64_t r = j - i;
        total += r * r;
        i = j;
    }
    return total;
}

double l4_plancherel(std::int64_t b, std::int64_t n) {
    return 2.0 * std::numbers::pi * static_cast<double>(l4_pair_count(b, n));
}

std::int64_t divisor_count(std::int64_t l, std::int64_t b, std::int64_t n) {
    if (n < 1) throw ArgumentError("divisor_count: N must be >= 1");
    std::int64_t count = 0;
    for (std::int64_t k1 = -n; k1 < n; ++k1)
        for (std::int64_t k2 = 0; k2 < 2 * n; ++k2) {
            if (static_cast<i128>(k1) * (static_cast<i128>(k2) + 2 * static_cast<i128>(b)) != l) continue;
            // Back-substitution m1 = b + (k1+k2)/2, m2 = b + (k2-k1)/2 must land in [b, b+N).
            if (((k1 + k2) & 1) != 0) continue;
            const std::int64_t u = (k1 + k2) / 2;
            const std::int64_t v = (k2 - k1) / 2;
            if (u >= 0 && u < n && v >= 0 && v < n) ++count;
        }
    return count;
}

std::int64_t max_divisor_count(std::int64_t b, std::int64_t n, bool exclude_diagonal) {
    if (n < 1) throw ArgumentError("max_divisor_count: N must be >= 1");
    std::vector<i128> diffs;
    for (std::int64_t m1 = b; m1 < b + n; ++m1)
        for (std::int64_t m2 = b; m2 < b + n; ++m2) {
            const i128 l = static_cast<i128>(m1) * m1 - static_cast<i128>(m2) * m2;
            if (!(exclude_diagonal && l == 0)) diffs.push_back(l);
        }
    std::sort(diffs.begin(), diffs.end());
    std::int64_t best = 0;
    for (std::size_t i = 0; i < diffs.size();) {
        std::size_t j = i;
        while (j < diffs.size() && diffs[j] == diffs[i]) ++j;
        best = std::max<std::int64_t>(best, static_cast<std::int64_t>(j - i));
        i = j;
    }
    return best;
}

}  // namespace gplab
