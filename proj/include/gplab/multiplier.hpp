#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gplab/bump.hpp"
#include "gplab/torus.hpp"

namespace gplab {

// Membership tolerance for the closed window [0, 1].
inline constexpr double kWindowTol = 1e-9;

inline bool in_unit_window(double v) { return v >= -kWindowTol && v <= 1.0 + kWindowTol; }

// original:  delta(tau + Q(p-n-m) + Q(n) - Q(m)) <p>^2a / (<p-n-m><n><m>)^2a
// polarized: delta(tau + Q(p) - 2Q(n,m))         <p>^2a / (<m-p><n-p><p-n-m>)^2a
enum class Representation { original, polarized };

struct MultiplierQuery {
    double tau = 0.0;
    LatticePoint p;
    double alpha = 1.0;
    QuadraticForm form = QuadraticForm::identity(2);
    std::int64_t truncation = 1;
    Representation representation = Representation::polarized;
    unsigned threads = 1;

    void validate() const;
};

using MNPair = std::pair<LatticePoint, LatticePoint>;  // (m, n)

// Argument of the window function for one (m, n) term.
double multiplier_phase(Representation rep, const QuadraticForm& form, double tau, const LatticePoint& p,
                        const LatticePoint& m, const LatticePoint& n);
// Bracket weight of one (m, n) term.
double multiplier_weight(Representation rep, double alpha, const LatticePoint& p, const LatticePoint& m,
                         const LatticePoint& n);
// weight if the phase lies in the window, else 0.
double multiplier_summand(Representation rep, const QuadraticForm& form, double tau, double alpha,
                          const LatticePoint& p, const LatticePoint& m, const LatticePoint& n);

// Change of variables carrying original-form terms onto equal polarized-form
// terms: (m, n) -> (m + n, p - n), with inverse (m', n') -> (m' + n' - p, p - n').
MNPair original_to_polarized(const LatticePoint& p, const LatticePoint& m, const LatticePoint& n);
MNPair polarized_to_original(const LatticePoint& p, const LatticePoint& m, const LatticePoint& n);

// Truncated double sum over |m|_inf, |n|_inf <= R. The polarized form skips
// m = 0 and n = 0.
double multiplier_sum(const MultiplierQuery& q);

struct EnumerationResult {
    std::vector<MNPair> pairs;  // sorted by (m, n)
    bool clipped = false;       // a shell reaches beyond the sup-norm bound R
};

// E_{tau,p}(j): m, n != 0, window on tau + Q(p) - 2Q(n,m), and
// m - p in shell j1, n - p in shell j2, p - n - m in shell j3.
// R <= 0 means no extra clipping.
EnumerationResult enumerate_E(double tau, const LatticePoint& p, const DyadicIndex& j, const QuadraticForm& form,
                              std::int64_t R = 0);

struct CountRecord {
    DyadicIndex j;
    std::uint64_t count = 0;
    double bound = 1.0;
    double ratio = 0.0;
};

// Counting exponent c in 2^{c (j_min + j_med)}: (d - 1) + epsilon.
double count_exponent(int d, double epsilon);

// One record per triple with j_max <= cap, lexicographic in (j1, j2, j3).
std::vector<CountRecord> dyadic_bound_report(double tau, const LatticePoint& p, const QuadraticForm& form,
                                             int j_max_cap, double epsilon);

// kappa must exceed 2 / theta_1^2 for the window to force m_1 = 0.
double forcing_threshold(const QuadraticForm& form);
void require_forcing(const QuadraticForm& form, double kappa);

enum class SliceMethod { automatic, direct, row_closed_form };

// sum over m in [-M, M]^{d-1} of kappa^{d-1} / ((1+kappa^2+|m|^2)(1+|m|^2))^{(d-1)/2}.
// row_closed_form (d = 3 only) sums each row through the lattice-sum identity
// sum_{b in Z} 1/(c+b^2) = pi coth(pi sqrt c)/sqrt c minus an Euler-Maclaurin tail.
double endpoint_slice_sum(std::int64_t kappa, const QuadraticForm& form, std::int64_t M, int d,
                          SliceMethod method = SliceMethod::automatic);

struct PhaseBoxes {
    std::vector<std::int64_t> eta_lo, eta_hi;    // box for eta = n - m
    std::vector<std::int64_t> etap_lo, etap_hi;  // box for eta' = n + m
    bool empty() const;
};

PhaseBoxes phase_boxes(const LatticePoint& p, const DyadicIndex& j);

// Upper bound for #E_{tau,p}(j): integral over t of
// [sum_{eta, eta'} exp(i t (Q(eta') - Q(eta)) / 2)] exp(-i t (tau + Q(p))) bump(t) dt
// with eta, eta' over the localization boxes; evaluated by trapezoid in t with
// per-axis Weyl sums. samples <= 0 selects the oversampling rule automatically.
double phase_count_fourier_bound(double tau, const LatticePoint& p, const DyadicIndex& j, const QuadraticForm& form,
                                 const TimeBump& bump, std::int64_t samples = 0);

// Same quantity evaluated on the frequency side:
// sum_{eta, eta'} bump_hat(tau + Q(p) - (Q(eta') - Q(eta)) / 2).
double phase_count_spectral(double tau, const LatticePoint& p, const DyadicIndex& j, const QuadraticForm& form,
                            const TimeBump& bump);

}  // namespace gplab
