#include "gplab/density.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "gplab/errors.hpp"
#include "gplab/numeric.hpp"

namespace gplab {

namespace {

using Key = std::span<const std::int32_t>;

int compare_keys(Key a, Key b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return -1;
        if (a[i] > b[i]) return 1;
    }
    return 0;
}

bool key_less(Key a, Key b) { return compare_keys(a, b) < 0; }

void require_compatible(const FourierDensityMatrix& a, const FourierDensityMatrix& b, const char* what) {
    if (a.order() != b.order() || !(a.form() == b.form()) || a.frame() != b.frame())
        throw ArgumentError(std::string(what) + ": matrices differ in order, form or frame");
}

// (1 + |frequency|^2) of one slot, with the physical frequency of the frame.
double bracket_sq(const FourierDensityMatrix& g, const std::int32_t* slot) {
    double s = 1.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double v = static_cast<double>(slot[a]);
        s += (g.frame() == Frame::general ? g.form().theta_sq(a) : 1.0) * v * v;
    }
    return s;
}

double entry_weight(const FourierDensityMatrix& g, std::size_t i, double alpha) {
    if (alpha == 0.0) return 1.0;
    const Key k = g.key(i);
    double w = 1.0;
    for (int s = 0; s < 2 * g.order(); ++s)
        w *= std::pow(bracket_sq(g, k.data() + static_cast<std::ptrdiff_t>(s) * g.dim()), 0.5 * alpha);
    return w;
}

double phase_from_axes(const QuadraticForm& form, std::span<const std::int64_t> D) {
    double w = 0.0;
    for (int a = 0; a < form.dim(); ++a) w += form.theta_sq(a) * static_cast<double>(D[static_cast<std::size_t>(a)]);
    return w;
}

void axes_of_key(int order, int d, Key k, std::int64_t* D) {
    for (int a = 0; a < d; ++a) D[a] = 0;
    for (int s = 0; s < order; ++s)
        for (int a = 0; a < d; ++a) {
            const std::int64_t x = k[static_cast<std::size_t>(s * d + a)];
            const std::int64_t y = k[static_cast<std::size_t>((order + s) * d + a)];
            D[a] += x * x - y * y;
        }
}

std::int32_t narrow(std::int64_t v) {
    if (v > INT32_MAX || v < INT32_MIN) throw OverflowError("density key component exceeds int32 range");
    return static_cast<std::int32_t>(v);
}

// Output key of B+ (plus) or B- (minus) for slot j (0-based) of an order k+1 key.
void collision_key(Key in, int k, int d, int j, bool plus, std::int32_t* out) {
    const int K = k + 1;
    const std::int32_t* x = in.data();
    const std::int32_t* y = in.data() + static_cast<std::ptrdiff_t>(K) * d;
    std::copy(x, x + static_cast<std::ptrdiff_t>(k) * d, out);
    std::copy(y, y + static_cast<std::ptrdiff_t>(k) * d, out + static_cast<std::ptrdiff_t>(k) * d);
    for (int a = 0; a < d; ++a) {
        const std::int64_t xe = x[K * d - d + a];
        const std::int64_t ye = y[K * d - d + a];
        if (plus) {
            auto& c = out[j * d + a];
            c = narrow(c + xe - ye);
        } else {
            auto& c = out[(k + j) * d + a];
            c = narrow(c - xe + ye);
        }
    }
}

// K(D) = integral_0^T exp(-i t D) dt.
cplx time_kernel(double delta, double T) {
    const double x = 0.5 * T * delta;
    const double sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    return T * sinc * std::polar(1.0, -x);
}

void format_double(std::ostream& os, double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, r.ptr - buf);
}

}  // namespace

// --- FourierDensityMatrix -------------------------------------------------

FourierDensityMatrix::FourierDensityMatrix(int order, QuadraticForm form, std::int64_t cutoff, Frame frame)
    : order_(order), form_(std::move(form)), cutoff_(cutoff), frame_(frame) {
    if (order < 1) throw ArgumentError("density matrix order must be positive");
    if (cutoff < 1) throw ArgumentError("density matrix cutoff must be positive");
    if (cutoff > INT32_MAX) throw OverflowError("density matrix cutoff exceeds int32 range");
}

cplx FourierDensityMatrix::at(Key key) const {
    if (static_cast<int>(key.size()) != key_length()) throw ArgumentError("density key has wrong length");
    std::size_t lo = 0, hi = size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        const int c = compare_keys(this->key(mid), key);
        if (c == 0) return values_[mid];
        if (c < 0)
            lo = mid + 1;
        else
            hi = mid;
    }
    return {0.0, 0.0};
}

cplx FourierDensityMatrix::at(const std::vector<LatticePoint>& xi, const std::vector<LatticePoint>& xi_prime) const {
    if (static_cast<int>(xi.size()) != order_ || static_cast<int>(xi_prime.size()) != order_)
        throw ArgumentError("density key has wrong number of slots");
    std::vector<std::int32_t> k;
    k.reserve(static_cast<std::size_t>(key_length()));
    for (const auto* side : {&xi, &xi_prime})
        for (const auto& p : *side) {
            if (p.dim() != dim()) throw ArgumentError("density key has wrong dimension");
            for (int a = 0; a < dim(); ++a) {
                if (std::abs(p[a]) > cutoff_) return {0.0, 0.0};
                k.push_back(static_cast<std::int32_t>(p[a]));
            }
        }
    return at(Key(k));
}

LatticePoint FourierDensityMatrix::slot(std::size_t i, int s, bool primed) const {
    const Key k = key(i);
    LatticePoint p(dim());
    const int base = ((primed ? order_ : 0) + s) * dim();
    for (int a = 0; a < dim(); ++a) p[a] = k[static_cast<std::size_t>(base + a)];
    return p;
}

std::vector<double> FourierDensityMatrix::frequency(std::size_t i, int s, bool primed) const {
    const LatticePoint p = slot(i, s, primed);
    if (frame_ == Frame::general) return unrescale_freq(form_, p);
    std::vector<double> out(static_cast<std::size_t>(dim()));
    for (int a = 0; a < dim(); ++a) out[static_cast<std::size_t>(a)] = static_cast<double>(p[a]);
    return out;
}

FourierDensityMatrix FourierDensityMatrix::with_values(std::vector<cplx> values) const {
    if (values.size() != values_.size()) throw ArgumentError("with_values: size mismatch");
    FourierDensityMatrix out = *this;
    out.values_ = std::move(values);
    return out;
}

// --- DensityBuilder -------------------------------------------------------

DensityBuilder::DensityBuilder(int order, QuadraticForm form, std::int64_t cutoff, Frame frame)
    : proto_(order, std::move(form), cutoff, frame) {}

void DensityBuilder::reserve(std::size_t n) {
    keys_.reserve(n * static_cast<std::size_t>(proto_.key_length()));
    values_.reserve(n);
}

void DensityBuilder::add(Key key, cplx v) {
    if (static_cast<int>(key.size()) != proto_.key_length()) throw ArgumentError("density key has wrong length");
    for (auto c : key)
        if (std::abs(static_cast<std::int64_t>(c)) > proto_.cutoff())
            throw ArgumentError("density key component " + std::to_string(c) + " exceeds cutoff " +
                                std::to_string(proto_.cutoff()));
    keys_.insert(keys_.end(), key.begin(), key.end());
    values_.push_back(v);
}

void DensityBuilder::add(const std::vector<LatticePoint>& xi, const std::vector<LatticePoint>& xi_prime, cplx v) {
    const int k = proto_.order(), d = proto_.dim();
    if (static_cast<int>(xi.size()) != k || static_cast<int>(xi_prime.size()) != k)
        throw ArgumentError("density key has wrong number of slots");
    std::vector<std::int32_t> key;
    key.reserve(static_cast<std::size_t>(proto_.key_length()));
    for (const auto* side : {&xi, &xi_prime})
        for (const auto& p : *side) {
            if (p.dim() != d) throw ArgumentError("density key has wrong dimension");
            for (int a = 0; a < d; ++a) {
                if (std::abs(p[a]) > proto_.cutoff())
                    throw ArgumentError("density key component exceeds cutoff " + std::to_string(proto_.cutoff()));
                key.push_back(static_cast<std::int32_t>(p[a]));
            }
        }
    add(Key(key), v);
}

FourierDensityMatrix DensityBuilder::build() && {
    const auto L = static_cast<std::size_t>(proto_.key_length());
    const std::size_t n = values_.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto key_at = [&](std::size_t i) { return Key(keys_.data() + i * L, L); };
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return key_less(key_at(a), key_at(b)); });

    FourierDensityMatrix out = std::move(proto_);
    out.keys_.reserve(n * L);
    out.values_.reserve(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t e = i + 1;
        cplx v = values_[perm[i]];
        while (e < n && compare_keys(key_at(perm[e]), key_at(perm[i])) == 0) v += values_[perm[e++]];
        if (v != cplx{0.0, 0.0}) {
            const Key k = key_at(perm[i]);
            out.keys_.insert(out.keys_.end(), k.begin(), k.end());
            out.values_.push_back(v);
        }
        i = e;
    }
    keys_.clear();
    values_.clear();
    return out;
}

// --- pointwise operators --------------------------------------------------

FourierDensityMatrix apply_S(const FourierDensityMatrix& gamma, double alpha) {
    std::vector<cplx> v(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) v[i] = gamma.value(i) * entry_weight(gamma, i, alpha);
    return gamma.with_values(std::move(v));
}

std::vector<std::int64_t> phase_axes(const FourierDensityMatrix& gamma, std::size_t i) {
    std::vector<std::int64_t> D(static_cast<std::size_t>(gamma.dim()));
    axes_of_key(gamma.order(), gamma.dim(), gamma.key(i), D.data());
    return D;
}

double phase_of(const FourierDensityMatrix& gamma, std::size_t i) {
    std::int64_t D[kMaxDim];
    axes_of_key(gamma.order(), gamma.dim(), gamma.key(i), D);
    return phase_from_axes(gamma.form(), {D, static_cast<std::size_t>(gamma.dim())});
}

FourierDensityMatrix free_evolve(const FourierDensityMatrix& gamma, double t) {
    std::vector<cplx> v(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) v[i] = gamma.value(i) * std::polar(1.0, -t * phase_of(gamma, i));
    return gamma.with_values(std::move(v));
}

FourierDensityMatrix collision(const FourierDensityMatrix& gamma, int j, CollisionSign sign) {
    if (gamma.order() < 2) throw ArgumentError("collision: input order must be at least 2");
    const int k = gamma.order() - 1;
    if (j < 1 || j > k) throw ArgumentError("collision: slot index j must lie in 1.." + std::to_string(k));
    const int d = gamma.dim();
    DensityBuilder b(k, gamma.form(), 3 * gamma.cutoff(), gamma.frame());
    b.reserve(gamma.size() * (sign == CollisionSign::full ? 2 : 1));
    std::vector<std::int32_t> out(static_cast<std::size_t>(2 * k * d));
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        if (sign != CollisionSign::minus) {
            collision_key(gamma.key(i), k, d, j - 1, true, out.data());
            b.add(out, gamma.value(i));
        }
        if (sign != CollisionSign::plus) {
            collision_key(gamma.key(i), k, d, j - 1, false, out.data());
            b.add(out, sign == CollisionSign::full ? -gamma.value(i) : gamma.value(i));
        }
    }
    return std::move(b).build();
}

FourierDensityMatrix permute_slots(const FourierDensityMatrix& gamma, std::span<const int> perm) {
    const int k = gamma.order(), d = gamma.dim();
    if (static_cast<int>(perm.size()) != k) throw ArgumentError("permute_slots: permutation has wrong length");
    std::vector<int> seen(static_cast<std::size_t>(k), 0);
    for (int p : perm) {
        if (p < 0 || p >= k || seen[static_cast<std::size_t>(p)]++) throw ArgumentError("permute_slots: not a permutation");
    }
    DensityBuilder b(k, gamma.form(), gamma.cutoff(), gamma.frame());
    b.reserve(gamma.size());
    std::vector<std::int32_t> out(static_cast<std::size_t>(2 * k * d));
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const Key in = gamma.key(i);
        for (int side = 0; side < 2; ++side)
            for (int s = 0; s < k; ++s)
                std::copy_n(in.data() + (side * k + perm[static_cast<std::size_t>(s)]) * d, d,
                            out.data() + (side * k + s) * d);
        b.add(out, gamma.value(i));
    }
    return std::move(b).build();
}

FourierDensityMatrix adjoint(const FourierDensityMatrix& gamma) {
    const auto half = static_cast<std::size_t>(gamma.order() * gamma.dim());
    DensityBuilder b(gamma.order(), gamma.form(), gamma.cutoff(), gamma.frame());
    b.reserve(gamma.size());
    std::vector<std::int32_t> out(2 * half);
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const Key in = gamma.key(i);
        std::copy_n(in.data() + half, half, out.data());
        std::copy_n(in.data(), half, out.data() + half);
        b.add(out, std::conj(gamma.value(i)));
    }
    return std::move(b).build();
}

FourierDensityMatrix add_scaled(const FourierDensityMatrix& a, const FourierDensityMatrix& b, cplx s) {
    require_compatible(a, b, "add_scaled");
    DensityBuilder out(a.order(), a.form(), std::max(a.cutoff(), b.cutoff()), a.frame());
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        int c = 0;
        if (i == a.size())
            c = 1;
        else if (j == b.size())
            c = -1;
        else
            c = compare_keys(a.key(i), b.key(j));
        if (c < 0) {
            out.add(a.key(i), a.value(i));
            ++i;
        } else if (c > 0) {
            out.add(b.key(j), s * b.value(j));
            ++j;
        } else {
            out.add(a.key(i), a.value(i) + s * b.value(j));
            ++i;
            ++j;
        }
    }
    return std::move(out).build();
}

FourierDensityMatrix scaled(const FourierDensityMatrix& a, cplx s) {
    std::vector<cplx> v(a.values());
    for (auto& x : v) x *= s;
    return a.with_values(std::move(v));
}

double max_abs_difference(const FourierDensityMatrix& a, const FourierDensityMatrix& b) {
    require_compatible(a, b, "max_abs_difference");
    double m = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        int c = 0;
        if (i == a.size())
            c = 1;
        else if (j == b.size())
            c = -1;
        else
            c = compare_keys(a.key(i), b.key(j));
        if (c < 0)
            m = std::max(m, std::abs(a.value(i++)));
        else if (c > 0)
            m = std::max(m, std::abs(b.value(j++)));
        else
            m = std::max(m, std::abs(a.value(i++) - b.value(j++)));
    }
    return m;
}

double hk_alpha_norm(const FourierDensityMatrix& gamma, double alpha) {
    CompensatedSum s;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const double w = entry_weight(gamma, i, alpha);
        s.add(w * w * std::norm(gamma.value(i)));
    }
    return std::sqrt(s.value());
}

// --- sequences and factorized states -------------------------------------

void HierarchySequence::validate() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.order() != static_cast<int>(i) + 1)
            throw ArgumentError("hierarchy entry " + std::to_string(i + 1) + " has order " + std::to_string(e.order()));
        if (!(e.form() == form)) throw ArgumentError("hierarchy entry has a different quadratic form");
        if (e.cutoff() != entries.front().cutoff()) throw ArgumentError("hierarchy entries have different cutoffs");
        if (e.frame() != entries.front().frame()) throw ArgumentError("hierarchy entries have different frames");
    }
}

double h_alpha_xi_norm(const HierarchySequence& seq, double alpha, double xi) {
    if (!(xi > 0.0)) throw ArgumentError("h_alpha_xi_norm: xi must be positive");
    seq.validate();
    double s = 0.0, w = 1.0;
    for (const auto& e : seq.entries) {
        w *= xi;
        s += w * hk_alpha_norm(e, alpha);
    }
    return s;
}

FourierDensityMatrix factorized(const SingleParticleState& phi, int k, const QuadraticForm& form, double threshold,
                                std::int64_t cutoff) {
    if (k < 1) throw ArgumentError("factorized: order must be positive");
    const int d = form.dim();
    std::vector<std::pair<LatticePoint, cplx>> modes;
    for (const auto& m : phi) {
        if (m.first.dim() != d) throw ArgumentError("factorized: mode dimension differs from the form");
        if (m.second != cplx{0.0, 0.0}) modes.push_back(m);
    }
    std::int64_t auto_cut = 1;
    for (const auto& m : modes) auto_cut = std::max(auto_cut, m.first.sup_norm());
    if (cutoff <= 0) cutoff = auto_cut;
    if (auto_cut > cutoff) throw ArgumentError("factorized: a mode exceeds the cutoff");
    // Descending modulus, so a failing threshold test ends the loop at each level.
    std::stable_sort(modes.begin(), modes.end(),
                     [](const auto& a, const auto& b) { return std::abs(a.second) > std::abs(b.second); });
    for (std::size_t i = 1; i < modes.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (modes[i].first == modes[j].first) throw ArgumentError("factorized: repeated mode " + modes[i].first.str());

    DensityBuilder b(k, form, cutoff);
    if (modes.empty()) return std::move(b).build();
    const double top = std::abs(modes.front().second);
    const int slots = 2 * k;
    std::vector<std::int32_t> key(static_cast<std::size_t>(slots * d));
    std::vector<double> top_pow(static_cast<std::size_t>(slots) + 1, 1.0);
    for (int s = 1; s <= slots; ++s) top_pow[static_cast<std::size_t>(s)] = top_pow[static_cast<std::size_t>(s) - 1] * top;

    auto rec = [&](auto&& self, int s, cplx acc) -> void {
        if (s == slots) {
            if (std::abs(acc) >= threshold) b.add(key, acc);
            return;
        }
        const bool primed = s >= k;
        for (const auto& [p, c] : modes) {
            const double bound = std::abs(acc) * std::abs(c) * top_pow[static_cast<std::size_t>(slots - s - 1)];
            if (bound < threshold) break;
            for (int a = 0; a < d; ++a) key[static_cast<std::size_t>(s * d + a)] = static_cast<std::int32_t>(p[a]);
            self(self, s + 1, acc * (primed ? std::conj(c) : c));
        }
    };
    rec(rec, 0, cplx{1.0, 0.0});
    return std::move(b).build();
}

FourierDensityMatrix random_sparse_density(std::uint64_t seed, std::uint64_t stream, int k, const QuadraticForm& form,
                                           std::int64_t cutoff, int entries, Frame frame) {
    if (k < 1 || cutoff < 0 || entries < 0) throw ArgumentError("random_sparse_density: need k >= 1, cutoff >= 0, entries >= 0");
    CounterRng rng(seed, stream);
    const int d = form.dim();
    DensityBuilder b(k, form, cutoff, frame);
    b.reserve(static_cast<std::size_t>(entries));
    std::vector<std::int32_t> key(static_cast<std::size_t>(2 * k * d));
    for (int e = 0; e < entries; ++e) {
        for (auto& c : key) c = static_cast<std::int32_t>(rng.uniform_int(-cutoff, cutoff));
        const double re = rng.normal();
        b.add(key, {re, rng.normal()});
    }
    return std::move(b).build();
}

FourierDensityMatrix rescale_density(const FourierDensityMatrix& gamma, RescaleDirection direction) {
    const bool to_general = direction == RescaleDirection::to_general;
    if ((gamma.frame() == Frame::general) == to_general)
        throw ArgumentError(std::string("rescale_density: matrix is already in the ") +
                            (to_general ? "general" : "classical") + " frame");
    const int k = gamma.order(), d = gamma.dim();
    const double factor = std::pow(gamma.form().theta_product(), 2.0 * k);
    const double scale = to_general ? 1.0 / factor : factor;
    DensityBuilder b(k, gamma.form(), gamma.cutoff(), to_general ? Frame::general : Frame::classical);
    b.reserve(gamma.size());
    std::vector<std::int32_t> key(static_cast<std::size_t>(gamma.key_length()));
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        for (int s = 0; s < 2 * k; ++s) {
            const LatticePoint p = gamma.slot(i, s % k, s >= k);
            LatticePoint q(d);
            if (to_general) {
                // The general-frame index of the physical frequency theta * p.
                q = rescale_freq(gamma.form(), unrescale_freq(gamma.form(), p));
            } else {
                const auto f = gamma.frequency(i, s % k, s >= k);
                q = rescale_freq(gamma.form(), f);
            }
            for (int a = 0; a < d; ++a) key[static_cast<std::size_t>(s * d + a)] = static_cast<std::int32_t>(q[a]);
        }
        b.add(key, gamma.value(i) * scale);
    }
    return std::move(b).build();
}

bool symmetry_check(const FourierDensityMatrix& gamma, double tol, std::uint64_t seed) {
    const int k = gamma.order(), d = gamma.dim();
    if (k == 1 || gamma.empty()) return true;
    double top = 0.0;
    for (const auto& v : gamma.values()) top = std::max(top, std::abs(v));
    const double limit = tol * top;

    std::vector<std::int32_t> key(static_cast<std::size_t>(gamma.key_length()));
    auto invariant_under = [&](const std::vector<int>& perm) {
        for (std::size_t i = 0; i < gamma.size(); ++i) {
            const Key in = gamma.key(i);
            for (int side = 0; side < 2; ++side)
                for (int s = 0; s < k; ++s)
                    std::copy_n(in.data() + (side * k + perm[static_cast<std::size_t>(s)]) * d, d,
                                key.data() + (side * k + s) * d);
            if (std::abs(gamma.at(key) - gamma.value(i)) > limit) return false;
        }
        return true;
    };

    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    if (k <= 5) {
        while (std::next_permutation(perm.begin(), perm.end()))
            if (!invariant_under(perm)) return false;
        return true;
    }
    CounterRng rng(seed);
    for (int r = 0; r < 100; ++r) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = k - 1; i > 0; --i)
            std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(rng.uniform_int(0, i))]);
        if (!invariant_under(perm)) return false;
    }
    return true;
}

// --- spacetime norm -------------------------------------------------------

namespace {

// Contributions of U(t) gamma0 to the outputs of B_{j,k+1}, grouped by output
// key and then by the exact integer phase vector.
struct PhaseGroup {
    cplx amplitude;
    double omega;
};

struct OutputGroups {
    std::vector<double> weight_sq;             // per output key
    std::vector<std::size_t> offsets;          // groups of output o: [offsets[o], offsets[o+1])
    std::vector<PhaseGroup> groups;
};

OutputGroups group_contributions(const FourierDensityMatrix& g, int j, double alpha, CollisionSign sign) {
    if (g.order() < 2) throw ArgumentError("spacetime_norm: input order must be at least 2");
    const int k = g.order() - 1, d = g.dim();
    if (j < 1 || j > k) throw ArgumentError("spacetime_norm: slot index j must lie in 1.." + std::to_string(k));
    const std::size_t L = static_cast<std::size_t>(2 * k * d);
    const std::size_t R = L + static_cast<std::size_t>(d);

    // Record: output key followed by the input phase axes.
    std::vector<std::int32_t> recs;
    std::vector<cplx> vals;
    std::vector<double> omegas;
    const std::size_t per = sign == CollisionSign::full ? 2 : 1;
    recs.reserve(g.size() * per * R);
    std::vector<std::int32_t> out(L);
    std::int64_t D[kMaxDim];
    for (std::size_t i = 0; i < g.size(); ++i) {
        axes_of_key(g.order(), d, g.key(i), D);
        const double w = phase_from_axes(g.form(), {D, static_cast<std::size_t>(d)});
        for (int pm = 0; pm < 2; ++pm) {
            const bool plus = pm == 0;
            if ((plus && sign == CollisionSign::minus) || (!plus && sign == CollisionSign::plus)) continue;
            collision_key(g.key(i), k, d, j - 1, plus, out.data());
            recs.insert(recs.end(), out.begin(), out.end());
            for (int a = 0; a < d; ++a) recs.push_back(narrow(D[a]));
            vals.push_back(!plus && sign == CollisionSign::full ? -g.value(i) : g.value(i));
            omegas.push_back(w);
        }
    }
    const std::size_t n = vals.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto rec = [&](std::size_t i, std::size_t len) { return Key(recs.data() + i * R, len); };
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return key_less(rec(a, R), rec(b, R)); });

    FourierDensityMatrix shape(k, g.form(), 3 * g.cutoff(), g.frame());
    OutputGroups og;
    og.offsets.push_back(0);
    for (std::size_t i = 0; i < n;) {
        std::size_t e = i;
        while (e < n && compare_keys(rec(perm[e], L), rec(perm[i], L)) == 0) {
            std::size_t f = e;
            cplx a{0.0, 0.0};
            while (f < n && compare_keys(rec(perm[f], R), rec(perm[e], R)) == 0) a += vals[perm[f++]];
            if (a != cplx{0.0, 0.0}) og.groups.push_back({a, omegas[perm[e]]});
            e = f;
        }
        const std::int32_t* kp = recs.data() + perm[i] * R;
        double w2 = 1.0;
        if (alpha != 0.0)
            for (int s = 0; s < 2 * k; ++s) w2 *= std::pow(bracket_sq(shape, kp + s * d), alpha);
        og.weight_sq.push_back(w2);
        og.offsets.push_back(og.groups.size());
        i = e;
    }
    return og;
}

}  // namespace

std::int64_t spacetime_required_samples(const FourierDensityMatrix& gamma0, int j, double T, CollisionSign sign) {
    const OutputGroups og = group_contributions(gamma0, j, 0.0, sign);
    double spread = 0.0;
    for (std::size_t o = 0; o + 1 < og.offsets.size(); ++o) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t g = og.offsets[o]; g < og.offsets[o + 1]; ++g) {
            lo = std::min(lo, og.groups[g].omega);
            hi = std::max(hi, og.groups[g].omega);
        }
        if (hi > lo) spread = std::max(spread, hi - lo);
    }
    const double need = 8.0 * spread * std::abs(T) / (2.0 * M_PI);
    return std::max<std::int64_t>(8, static_cast<std::int64_t>(std::ceil(need)));
}

double spacetime_norm(const FourierDensityMatrix& gamma0, int j, double alpha, double T,
                      const SpacetimeOptions& options) {
    if (!(T > 0.0) || !std::isfinite(T)) throw ArgumentError("spacetime_norm: T must be positive");
    if (gamma0.order() < 2) throw ArgumentError("spacetime_norm: input order must be at least 2");
    const OutputGroups og = group_contributions(gamma0, j, alpha, options.sign);
    const std::size_t n_out = og.weight_sq.size();

    if (options.quadrature == TimeQuadrature::exact) {
        CompensatedSum total;
        for (std::size_t o = 0; o < n_out; ++o) {
            const std::size_t b = og.offsets[o], e = og.offsets[o + 1];
            double s = 0.0;
            for (std::size_t g = b; g < e; ++g) {
                s += std::norm(og.groups[g].amplitude) * T;
                for (std::size_t h = g + 1; h < e; ++h)
                    s += 2.0 * std::real(og.groups[g].amplitude * std::conj(og.groups[h].amplitude) *
                                         time_kernel(og.groups[g].omega - og.groups[h].omega, T));
            }
            total.add(og.weight_sq[o] * s);
        }
        return std::sqrt(std::max(0.0, total.value()));
    }

    const std::int64_t need = spacetime_required_samples(gamma0, j, T, options.sign);
    const std::int64_t n = options.time_samples > 0 ? options.time_samples : need;
    if (n < need)
        throw ResolutionError("spacetime_norm: " + std::to_string(n) + " time intervals requested, at least " +
                              std::to_string(need) + " needed");
    const double h = T / static_cast<double>(n);
    CompensatedSum total;
    for (std::int64_t i = 0; i <= n; ++i) {
        const double t = h * static_cast<double>(i);
        double s = 0.0;
        for (std::size_t o = 0; o < n_out; ++o) {
            cplx c{0.0, 0.0};
            for (std::size_t g = og.offsets[o]; g < og.offsets[o + 1]; ++g)
                c += og.groups[g].amplitude * std::polar(1.0, -t * og.groups[g].omega);
            s += og.weight_sq[o] * std::norm(c);
        }
        total.add((i == 0 || i == n ? 0.5 : 1.0) * h * s);
    }
    return std::sqrt(std::max(0.0, total.value()));
}

// --- Duhamel residual -----------------------------------------------------

DuhamelResidual duhamel_residual_report(const std::vector<TrajectoryPoint>& traj, double b0, double alpha, double xi,
                                        DuhamelVariant variant) {
    if (traj.empty()) throw ArgumentError("duhamel_residual: empty trajectory");
    if (traj.front().t != 0.0) throw ArgumentError("duhamel_residual: trajectory must start at t = 0");
    for (std::size_t i = 1; i < traj.size(); ++i)
        if (!(traj[i].t > traj[i - 1].t)) throw ArgumentError("duhamel_residual: times must be strictly ascending");
    const int K = traj.front().seq.max_order();
    if (K < 2) throw ArgumentError("duhamel_residual: need at least two hierarchy levels");
    for (const auto& p : traj) {
        p.seq.validate();
        if (p.seq.max_order() != K) throw ArgumentError("duhamel_residual: trajectory points differ in K_max");
    }

    DuhamelResidual out;
    out.per_time.assign(traj.size(), 0.0);
    const cplx ib0{0.0, b0};
    double xik = 1.0;
    for (int k = 1; k < K; ++k) {
        xik *= xi;
        const auto& g0 = traj.front().seq.entries[static_cast<std::size_t>(k - 1)];
        std::optional<FourierDensityMatrix> integral, prev;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const double t = traj[i].t;
            const auto& upper = traj[i].seq.entries[static_cast<std::size_t>(k)];
            FourierDensityMatrix bg = collision(upper, 1);
            for (int j = 2; j <= k; ++j) bg = add_scaled(bg, collision(upper, j), 1.0);
            if (variant == DuhamelVariant::standard) bg = free_evolve(bg, -t);
            if (!integral) {
                integral = scaled(bg, 0.0);
            } else {
                const double h = 0.5 * (t - traj[i - 1].t);
                integral = add_scaled(add_scaled(*integral, *prev, h), bg, h);
            }
            prev = std::move(bg);
            const auto& gk = traj[i].seq.entries[static_cast<std::size_t>(k - 1)];
            FourierDensityMatrix r = add_scaled(gk, free_evolve(g0, t), -1.0);
            r = add_scaled(r, free_evolve(*integral, t), ib0);
            out.per_time[i] += xik * hk_alpha_norm(r, alpha);
        }
    }
    for (double v : out.per_time) out.max_norm = std::max(out.max_norm, v);
    return out;
}

double duhamel_residual(const std::vector<TrajectoryPoint>& traj, double b0, double alpha, double xi,
                        DuhamelVariant variant) {
    return duhamel_residual_report(traj, b0, alpha, xi, variant).max_norm;
}

// --- serialization --------------------------------------------------------

void write_density(std::ostream& os, const FourierDensityMatrix& gamma) {
    os << "gplab-density 1\n";
    os << "d " << gamma.dim() << "\n";
    os << "k " << gamma.order() << "\n";
    os << "cutoff " << gamma.cutoff() << "\n";
    os << "frame " << (gamma.frame() == Frame::general ? "general" : "classical") << "\n";
    os << "theta";
    for (double t : gamma.form().theta()) {
        os << ' ';
        format_double(os, t);
    }
    os << "\nentries " << gamma.size() << "\n";
    const int half = gamma.order() * gamma.dim();
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const Key k = gamma.key(i);
        for (int s = 0; s < 2 * half; ++s) {
            if (s == half) os << " ;";
            if (s > 0) os << ' ';
            os << k[static_cast<std::size_t>(s)];
        }
        os << " ; ";
        format_double(os, gamma.value(i).real());
        os << " ; ";
        format_double(os, gamma.value(i).imag());
        os << '\n';
    }
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& msg) {
    throw ArgumentError("read_density: line " + std::to_string(line) + ": " + msg);
}

template <class T>
T parse_number(std::string_view s, int line) {
    T v{};
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) parse_fail(line, "bad number '" + std::string(s) + "'");
    return v;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

}  // namespace

FourierDensityMatrix read_density(std::istream& is) {
    int line_no = 0;
    std::string line;
    auto next = [&](const char* tag) {
        if (!std::getline(is, line)) parse_fail(line_no + 1, std::string("missing '") + tag + "' line");
        ++line_no;
        auto w = split_ws(line);
        if (w.empty() || w[0] != tag) parse_fail(line_no, std::string("expected '") + tag + "'");
        return w;
    };
    auto magic = next("gplab-density");
    if (magic.size() != 2 || magic[1] != "1") parse_fail(line_no, "unsupported format version");
    const auto wd = next("d");
    const auto wk = next("k");
    const auto wc = next("cutoff");
    const auto wf = next("frame");
    const auto wt = next("theta");
    const auto we = next("entries");
    if (wd.size() != 2 || wk.size() != 2 || wc.size() != 2 || wf.size() != 2 || we.size() != 2)
        parse_fail(line_no, "malformed header");
    const int d = parse_number<int>(wd[1], 2);
    const int k = parse_number<int>(wk[1], 3);
    const auto cutoff = parse_number<std::int64_t>(wc[1], 4);
    Frame frame = Frame::classical;
    if (wf[1] == "general")
        frame = Frame::general;
    else if (wf[1] != "classical")
        parse_fail(5, "unknown frame '" + wf[1] + "'");
    if (d < 1 || d > kMaxDim || static_cast<int>(wt.size()) != d + 1) parse_fail(6, "theta needs d values");
    std::vector<double> theta;
    for (int a = 0; a < d; ++a) theta.push_back(parse_number<double>(wt[static_cast<std::size_t>(a) + 1], 6));
    const auto n = parse_number<std::size_t>(we[1], 7);

    DensityBuilder b(k, QuadraticForm(std::move(theta)), cutoff, frame);
    b.reserve(n);
    const std::size_t half = static_cast<std::size_t>(k * d);
    std::vector<std::int32_t> key(2 * half);
    for (std::size_t e = 0; e < n; ++e) {
        if (!std::getline(is, line)) parse_fail(line_no + 1, "expected " + std::to_string(n) + " entries");
        ++line_no;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        for (std::string f; std::getline(ls, f, ';');) fields.push_back(f);
        if (fields.size() != 4) parse_fail(line_no, "entry needs 4 ';'-separated fields");
        const auto x = split_ws(fields[0]), y = split_ws(fields[1]), re = split_ws(fields[2]), im = split_ws(fields[3]);
        if (x.size() != half || y.size() != half || re.size() != 1 || im.size() != 1)
            parse_fail(line_no, "entry has wrong field sizes");
        for (std::size_t i = 0; i < half; ++i) {
            key[i] = parse_number<std::int32_t>(x[i], line_no);
            key[half + i] = parse_number<std::int32_t>(y[i], line_no);
        }
        try {
            b.add(key, {parse_number<double>(re[0], line_no), parse_number<double>(im[0], line_no)});
        } catch (const ArgumentError& err) {
            parse_fail(line_no, err.what());
        }
    }
    return std::move(b).build();
}

}  // namespace gplab
