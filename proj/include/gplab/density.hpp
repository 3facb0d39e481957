#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "gplab/torus.hpp"

namespace gplab {

using cplx = std::complex<double>;

// classical: keys are frequencies on Z^d (torus T^d).
// general:   keys are indices n of the frequencies theta * n on the general torus.
enum class Frame { classical, general };

// Order-k density matrix stored by its Fourier coefficients on pairs
// (xi_1..xi_k ; xi'_1..xi'_k). Entries are kept sorted by key, so iteration
// order is deterministic. Keys are flat int32 arrays of length 2*k*d:
// unprimed slots first, then primed slots, d components each.
class FourierDensityMatrix {
public:
    FourierDensityMatrix(int order, QuadraticForm form, std::int64_t cutoff, Frame frame = Frame::classical);

    int order() const { return order_; }
    int dim() const { return form_.dim(); }
    std::int64_t cutoff() const { return cutoff_; }
    Frame frame() const { return frame_; }
    const QuadraticForm& form() const { return form_; }
    int key_length() const { return 2 * order_ * dim(); }

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    std::span<const std::int32_t> key(std::size_t i) const {
        return {keys_.data() + i * static_cast<std::size_t>(key_length()), static_cast<std::size_t>(key_length())};
    }
    cplx value(std::size_t i) const { return values_[i]; }
    const std::vector<cplx>& values() const { return values_; }

    // Coefficient at a key, 0 when not stored.
    cplx at(std::span<const std::int32_t> key) const;
    cplx at(const std::vector<LatticePoint>& xi, const std::vector<LatticePoint>& xi_prime) const;

    // Slot s (0-based) of entry i; primed selects the second argument.
    LatticePoint slot(std::size_t i, int s, bool primed) const;
    // Physical frequency of that slot: the index itself (classical) or theta * index (general).
    std::vector<double> frequency(std::size_t i, int s, bool primed) const;

    // Same support with replaced values.
    FourierDensityMatrix with_values(std::vector<cplx> values) const;

private:
    friend class DensityBuilder;
    int order_;
    QuadraticForm form_;
    std::int64_t cutoff_;
    Frame frame_;
    std::vector<std::int32_t> keys_;
    std::vector<cplx> values_;
};

// Accumulates (key, value) contributions; duplicates are summed in insertion order.
class DensityBuilder {
public:
    DensityBuilder(int order, QuadraticForm form, std::int64_t cutoff, Frame frame = Frame::classical);

    void reserve(std::size_t n);
    void add(std::span<const std::int32_t> key, cplx v);
    void add(const std::vector<LatticePoint>& xi, const std::vector<LatticePoint>& xi_prime, cplx v);
    std::size_t pending() const { return values_.size(); }

    // Sorts, merges duplicate keys and drops entries that are exactly zero.
    FourierDensityMatrix build() &&;

private:
    FourierDensityMatrix proto_;
    std::vector<std::int32_t> keys_;
    std::vector<cplx> values_;
};

// Per-entry multiplier prod <xi_j>^alpha prod <xi'_j>^alpha.
FourierDensityMatrix apply_S(const FourierDensityMatrix& gamma, double alpha);

// Coefficient times exp(-i t (Q(xi) - Q(xi'))).
FourierDensityMatrix free_evolve(const FourierDensityMatrix& gamma, double t);

// Q(xi_vec) - Q(xi'_vec) of entry i as per-axis integer sums: returns D with
// phase = sum_a theta_a^2 D_a, exact in the integer part.
std::vector<std::int64_t> phase_axes(const FourierDensityMatrix& gamma, std::size_t i);
double phase_of(const FourierDensityMatrix& gamma, std::size_t i);

enum class CollisionSign { plus, minus, full };

// B_{j,k+1} on an order k+1 matrix (j is 1-based, 1 <= j <= k). plus and minus
// return B+ and B- themselves; full returns B+ - B-. Output cutoff is 3x input.
FourierDensityMatrix collision(const FourierDensityMatrix& gamma, int j, CollisionSign sign = CollisionSign::full);

// Applies the slot permutation perm (perm[s] = source slot of new slot s) to both arguments.
FourierDensityMatrix permute_slots(const FourierDensityMatrix& gamma, std::span<const int> perm);

// Hermitian adjoint: (xi ; xi') -> conj coefficient at (xi' ; xi).
FourierDensityMatrix adjoint(const FourierDensityMatrix& gamma);

// a + s * b on the union of supports. Orders, dims and frames must match.
FourierDensityMatrix add_scaled(const FourierDensityMatrix& a, const FourierDensityMatrix& b, cplx s);
FourierDensityMatrix scaled(const FourierDensityMatrix& a, cplx s);

// max |a - b| over the union of supports.
double max_abs_difference(const FourierDensityMatrix& a, const FourierDensityMatrix& b);

// Weighted l2 norm of the coefficients (normalization constant 1).
double hk_alpha_norm(const FourierDensityMatrix& gamma, double alpha);

struct HierarchySequence {
    std::vector<FourierDensityMatrix> entries;  // entries[k-1] has order k
    QuadraticForm form = QuadraticForm::identity(1);

    void validate() const;
    int max_order() const { return static_cast<int>(entries.size()); }
};

// sum_k xi^k * hk_alpha_norm(entry k).
double h_alpha_xi_norm(const HierarchySequence& seq, double alpha, double xi);

// Single-particle state as (frequency, coefficient) modes.
using SingleParticleState = std::vector<std::pair<LatticePoint, cplx>>;

// coefficient(xi ; xi') = prod phi(xi_j) prod conj phi(xi'_j). Entries whose
// product modulus falls below `threshold` are dropped. cutoff <= 0 takes the
// largest |component| among the modes.
FourierDensityMatrix factorized(const SingleParticleState& phi, int k, const QuadraticForm& form,
                                double threshold = 0.0, std::int64_t cutoff = 0);

// `entries` draws with uniform slots in [-cutoff, cutoff]^d and standard complex
// normal values from CounterRng(seed, stream); colliding keys are summed.
FourierDensityMatrix random_sparse_density(std::uint64_t seed, std::uint64_t stream, int k, const QuadraticForm& form,
                                           std::int64_t cutoff, int entries, Frame frame = Frame::classical);

enum class RescaleDirection { to_general, to_classical };

// Re-indexes through rescale_freq and multiplies by 1/(theta_1...theta_d)^{2k}
// (to_general) or its inverse.
FourierDensityMatrix rescale_density(const FourierDensityMatrix& gamma, RescaleDirection direction);

// True when every simultaneous slot permutation leaves the coefficients
// unchanged (relative tolerance on the largest coefficient). All k! permutations
// for k <= 5, otherwise 100 random ones from the given seed.
bool symmetry_check(const FourierDensityMatrix& gamma, double tol = 1e-12, std::uint64_t seed = 1);

enum class TimeQuadrature { trapezoid, exact };

struct SpacetimeOptions {
    CollisionSign sign = CollisionSign::full;
    TimeQuadrature quadrature = TimeQuadrature::trapezoid;
    std::int64_t time_samples = 0;  // trapezoid only; <= 0 selects the oversampling rule
};

// Smallest accepted trapezoid sample count: 8 samples per period of the
// widest phase spread feeding a single output coefficient.
std::int64_t spacetime_required_samples(const FourierDensityMatrix& gamma0, int j, double T,
                                        CollisionSign sign = CollisionSign::full);

// || S^{(k,alpha)} B_{j,k+1} U(t) gamma0 ||_{L^2([0,T] x coefficients)}.
// trapezoid: composite trapezoid in t (ResolutionError when undersampled).
// exact: closed-form integral of exp(-i t (w_g - w_h)) over [0, T] for every
// pair of phase groups meeting in one output coefficient.
double spacetime_norm(const FourierDensityMatrix& gamma0, int j, double alpha, double T,
                      const SpacetimeOptions& options = {});

struct TrajectoryPoint {
    double t = 0.0;
    HierarchySequence seq;
};

// verbatim: U(t) inside the time integral; standard: U(t - s).
enum class DuhamelVariant { verbatim, standard };

struct DuhamelResidual {
    double max_norm = 0.0;
    std::vector<double> per_time;  // sum_{k<K} xi^k ||S^{(k,alpha)} r_k(t_i)||
};

// r_k(t) = gamma_k(t) - U(t) gamma_k(0) + i b0 integral_0^t U(.) B^{(k+1)} gamma_{k+1}(s) ds,
// B^{(k+1)} = sum_{j<=k} B_{j,k+1}, time integral by trapezoid over the samples.
DuhamelResidual duhamel_residual_report(const std::vector<TrajectoryPoint>& traj, double b0, double alpha, double xi,
                                        DuhamelVariant variant = DuhamelVariant::standard);
double duhamel_residual(const std::vector<TrajectoryPoint>& traj, double b0, double alpha, double xi,
                        DuhamelVariant variant = DuhamelVariant::standard);

// Line-based text format; see docs/density-format.md.
void write_density(std::ostream& os, const FourierDensityMatrix& gamma);
FourierDensityMatrix read_density(std::istream& is);

}  // namespace gplab
