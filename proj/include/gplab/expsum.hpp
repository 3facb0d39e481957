#pragma once

#include <complex>
#include <cstdint>
#include <numbers>

namespace gplab {

// S(t) = sum_{m=b}^{b+N-1} exp(i * scale * t * m^2) over the time window [t0, t1].
struct ExpSumSpec {
    std::int64_t b = 0;
    std::int64_t n = 1;
    double scale = 1.0;
    double t0 = 0.0;
    double t1 = 2.0 * std::numbers::pi;

    void validate() const;
    double length() const { return t1 - t0; }
};

std::complex<double> partial_sum(const ExpSumSpec& spec, double t);

// Smallest trapezoid sample count accepted by lp_time_norm: eight samples per
// period of the highest angular frequency of |S|^p, taken as p * scale * (spread of m^2).
std::int64_t required_samples(const ExpSumSpec& spec, double p);

// integral over the window of |S(t)|^p by composite trapezoid with `samples`
// subintervals. Throws ResolutionError when samples < required_samples.
double lp_time_norm(const ExpSumSpec& spec, double p, std::int64_t samples);

// Same integral for scale = 1, even integer p and a window of whole periods 2*pi,
// evaluated exactly (up to rounding) by lifting t -> (t, 2bt) onto the 2-torus,
// where |S|^p is a trigonometric polynomial sampled without aliasing.
// Cost does not depend on |b|, which makes |b| ~ 10^6 tractable.
double lp_time_norm_lifted(const ExpSumSpec& spec, int p);

enum class LpMethod { automatic, trapezoid, lifted };

// Picks the cheaper exact-enough route when method is automatic.
double lp_time_norm(const ExpSumSpec& spec, double p, LpMethod method);

// 2*pi * sum_l r(l)^2, r(l) = #{(m1, m2) in [b, b+N)^2 : m1^2 - m2^2 = l}, exact integer count.
double l4_plancherel(std::int64_t b, std::int64_t n);
// The integer sum_l r(l)^2 itself.
std::uint64_t l4_pair_count(std::int64_t b, std::int64_t n);

// S_{l,b}(N), counted over the substituted box k1 = m1 - m2, k2 = m1 + m2 - 2b.
std::int64_t divisor_count(std::int64_t l, std::int64_t b, std::int64_t n);

// max over l of S_{l,b}(N); l = 0 (the diagonal, always N) can be excluded.
std::int64_t max_divisor_count(std::int64_t b, std::int64_t n, bool exclude_diagonal);

}  // namespace gplab
