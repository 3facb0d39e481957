#include "gplab/torus.hpp"

#include <bit>
#include <sstream>

namespace gplab {

namespace {

void check_dim(int d) {
    if (d < 1 || d > kMaxDim)
        throw ArgumentError("lattice dimension " + std::to_string(d) + " outside [1, " +
                            std::to_string(kMaxDim) + "]");
}

void check_same_dim(int a, int b, const char* what) {
    if (a != b)
        throw ArgumentError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
}

}  // namespace

LatticePoint::LatticePoint(int d) : d_(d) { check_dim(d); }

LatticePoint::LatticePoint(std::initializer_list<std::int64_t> coords)
    : d_(static_cast<int>(coords.size())) {
    check_dim(d_);
    std::copy(coords.begin(), coords.end(), c_.begin());
}

LatticePoint LatticePoint::from(std::span<const std::int64_t> coords) {
    LatticePoint p(static_cast<int>(coords.size()));
    std::copy(coords.begin(), coords.end(), p.c_.begin());
    return p;
}

LatticePoint LatticePoint::from(std::span<const std::int32_t> coords) {
    LatticePoint p(static_cast<int>(coords.size()));
    std::copy(coords.begin(), coords.end(), p.c_.begin());
    return p;
}

std::int64_t LatticePoint::norm2() const {
    std::int64_t s = 0;
    for (int i = 0; i < d_; ++i) s += c_[i] * c_[i];
    return s;
}

std::int64_t LatticePoint::sup_norm() const {
    std::int64_t s = 0;
    for (int i = 0; i < d_; ++i) s = std::max(s, c_[i] < 0 ? -c_[i] : c_[i]);
    return s;
}

std::string LatticePoint::str() const {
    std::ostringstream os;
    os << '(';
    for (int i = 0; i < d_; ++i) os << (i ? "," : "") << c_[i];
    os << ')';
    return os.str();
}

LatticePoint& LatticePoint::operator+=(const LatticePoint& o) {
    check_same_dim(d_, o.d_, "lattice addition");
    for (int i = 0; i < d_; ++i) c_[i] += o.c_[i];
    return *this;
}

LatticePoint& LatticePoint::operator-=(const LatticePoint& o) {
    check_same_dim(d_, o.d_, "lattice subtraction");
    for (int i = 0; i < d_; ++i) c_[i] -= o.c_[i];
    return *this;
}

LatticePoint operator-(LatticePoint a) {
    for (int i = 0; i < a.d_; ++i) a.c_[i] = -a.c_[i];
    return a;
}

bool operator==(const LatticePoint& a, const LatticePoint& b) {
    return a.d_ == b.d_ && std::equal(a.c_.begin(), a.c_.begin() + a.d_, b.c_.begin());
}

std::strong_ordering operator<=>(const LatticePoint& a, const LatticePoint& b) {
    if (auto c = a.d_ <=> b.d_; c != 0) return c;
    return std::lexicographical_compare_three_way(a.c_.begin(), a.c_.begin() + a.d_, b.c_.begin(),
                                                  b.c_.begin() + b.d_);
}

QuadraticForm::QuadraticForm(std::vector<double> theta) : theta_(std::move(theta)) {
    check_dim(dim());
    for (std::size_t j = 0; j < theta_.size(); ++j) {
        if (!std::isfinite(theta_[j]) || theta_[j] <= 0.0)
            throw ArgumentError("theta_" + std::to_string(j + 1) + " must be positive and finite");
        theta_sq_.push_back(theta_[j] * theta_[j]);
    }
}

QuadraticForm QuadraticForm::identity(int d) {
    return QuadraticForm(std::vector<double>(static_cast<std::size_t>(d), 1.0));
}

double QuadraticForm::theta_product() const {
    double p = 1.0;
    for (double t : theta_) p *= t;
    return p;
}

double q_bilinear(const QuadraticForm& form, const LatticePoint& xi, const LatticePoint& eta) {
    check_same_dim(form.dim(), xi.dim(), "q_bilinear");
    check_same_dim(form.dim(), eta.dim(), "q_bilinear");
    double s = 0.0;
    for (int j = 0; j < form.dim(); ++j)
        s += form.theta_sq(j) * static_cast<double>(xi[j] * eta[j]);
    return s;
}

double q_form(const QuadraticForm& form, const LatticePoint& xi) { return q_bilinear(form, xi, xi); }

double jp_bracket(const LatticePoint& xi) { return std::sqrt(1.0 + static_cast<double>(xi.norm2())); }

double jp_bracket(std::span<const double> x) {
    double s = 1.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double jp_bracket_pow(const LatticePoint& xi, double s) {
    return std::pow(1.0 + static_cast<double>(xi.norm2()), 0.5 * s);
}

int shell_of_norm2(std::int64_t n2) {
    if (n2 < 0) throw ArgumentError("shell_of: negative squared norm");
    return (std::bit_width(static_cast<std::uint64_t>(n2)) + 1) / 2;
}

int shell_of(const LatticePoint& xi) { return shell_of_norm2(xi.norm2()); }

bool shell_member(const LatticePoint& xi, int j) {
    if (j < 0) throw ArgumentError("shell_member: j must be nonnegative");
    return shell_of(xi) == j;
}

LatticePoint rescale_freq(const QuadraticForm& form, std::span<const double> xi_general) {
    check_same_dim(form.dim(), static_cast<int>(xi_general.size()), "rescale_freq");
    LatticePoint out(form.dim());
    for (int j = 0; j < form.dim(); ++j) {
        const double q = xi_general[static_cast<std::size_t>(j)] / form.theta()[static_cast<std::size_t>(j)];
        const double r = std::nearbyint(q);
        if (!std::isfinite(q) || std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q))) {
            std::ostringstream os;
            os.precision(17);
            os << "rescale_freq: component " << j + 1 << " = " << xi_general[static_cast<std::size_t>(j)]
               << " is not on the theta_" << j + 1 << "*Z lattice";
            throw LatticeError(os.str());
        }
        out[j] = static_cast<std::int64_t>(r);
    }
    return out;
}

std::vector<double> unrescale_freq(const QuadraticForm& form, const LatticePoint& xi) {
    check_same_dim(form.dim(), xi.dim(), "unrescale_freq");
    std::vector<double> out(static_cast<std::size_t>(form.dim()));
    for (int j = 0; j < form.dim(); ++j)
        out[static_cast<std::size_t>(j)] = form.theta()[static_cast<std::size_t>(j)] * static_cast<double>(xi[j]);
    return out;
}

std::vector<LatticePoint> enumerate_ball(const LatticePoint& center, double radius, BallNorm norm) {
    std::vector<LatticePoint> out;
    for_each_in_ball(center, radius, norm, [&](const LatticePoint& p) { out.push_back(p); });
    return out;
}

}  // namespace gplab
