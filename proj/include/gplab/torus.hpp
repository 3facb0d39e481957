#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "gplab/errors.hpp"

namespace gplab {

inline constexpr int kMaxDim = 8;

// Integer frequency on Z^d. Fixed capacity so that hot lattice loops never
// allocate.
class LatticePoint {
public:
    LatticePoint() = default;
    explicit LatticePoint(int d);
    LatticePoint(std::initializer_list<std::int64_t> coords);
    static LatticePoint from(std::span<const std::int64_t> coords);
    static LatticePoint from(std::span<const std::int32_t> coords);

    int dim() const { return d_; }
    std::int64_t operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
    std::int64_t& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
    std::span<const std::int64_t> coords() const { return {c_.data(), static_cast<std::size_t>(d_)}; }

    std::int64_t norm2() const;
    double norm() const { return std::sqrt(static_cast<double>(norm2())); }
    std::int64_t sup_norm() const;
    bool is_zero() const { return norm2() == 0; }
    std::string str() const;

    LatticePoint& operator+=(const LatticePoint& o);
    LatticePoint& operator-=(const LatticePoint& o);
    friend LatticePoint operator+(LatticePoint a, const LatticePoint& b) { return a += b; }
    friend LatticePoint operator-(LatticePoint a, const LatticePoint& b) { return a -= b; }
    friend LatticePoint operator-(LatticePoint a);
    friend bool operator==(const LatticePoint& a, const LatticePoint& b);
    friend std::strong_ordering operator<=>(const LatticePoint& a, const LatticePoint& b);

private:
    std::array<std::int64_t, kMaxDim> c_{};
    int d_ = 0;
};

// theta = (theta_1, ..., theta_d); Q(xi, eta) = sum theta_j^2 xi^j eta^j.
class QuadraticForm {
public:
    explicit QuadraticForm(std::vector<double> theta);
    static QuadraticForm identity(int d);

    int dim() const { return static_cast<int>(theta_.size()); }
    const std::vector<double>& theta() const { return theta_; }
    double theta_sq(int j) const { return theta_sq_[static_cast<std::size_t>(j)]; }
    const std::vector<double>& theta_sq() const { return theta_sq_; }
    double theta_product() const;

    bool operator==(const QuadraticForm& o) const { return theta_ == o.theta_; }

private:
    std::vector<double> theta_;
    std::vector<double> theta_sq_;
};

double q_bilinear(const QuadraticForm& form, const LatticePoint& xi, const LatticePoint& eta);
double q_form(const QuadraticForm& form, const LatticePoint& xi);

// <x> = sqrt(1 + |x|^2)
double jp_bracket(const LatticePoint& xi);
double jp_bracket(std::span<const double> x);
// <x>^s computed as (1 + |x|^2)^(s/2) without the intermediate sqrt.
double jp_bracket_pow(const LatticePoint& xi, double s);

// Dyadic shells: j = 0 is |x| < 1, j >= 1 is 2^(j-1) <= |x| < 2^j.
bool shell_member(const LatticePoint& xi, int j);
int shell_of(const LatticePoint& xi);
int shell_of_norm2(std::int64_t n2);

// Division by theta componentwise, for frequencies of the general torus.
LatticePoint rescale_freq(const QuadraticForm& form, std::span<const double> xi_general);
std::vector<double> unrescale_freq(const QuadraticForm& form, const LatticePoint& xi);

enum class BallNorm { euclidean, sup };

// Visits every lattice point with |x - center| <= radius in lexicographic order.
template <class F>
void for_each_in_ball(const LatticePoint& center, double radius, BallNorm norm, F&& visit) {
    if (!(radius >= 0.0)) throw ArgumentError("enumerate_ball: radius must be nonnegative");
    const int d = center.dim();
    const auto r = static_cast<std::int64_t>(std::floor(radius));
    const double r2 = radius * radius;
    LatticePoint offset(d);
    for (int i = 0; i < d; ++i) offset[i] = -r;
    for (;;) {
        bool inside = true;
        if (norm == BallNorm::euclidean) inside = static_cast<double>(offset.norm2()) <= r2;
        if (inside) visit(center + offset);
        int i = d - 1;
        while (i >= 0 && offset[i] == r) {
            offset[i] = -r;
            --i;
        }
        if (i < 0) break;
        ++offset[i];
    }
}

std::vector<LatticePoint> enumerate_ball(const LatticePoint& center, double radius, BallNorm norm);

struct DyadicIndex {
    int j1 = 0;
    int j2 = 0;
    int j3 = 0;

    int min() const { return std::min({j1, j2, j3}); }
    int max() const { return std::max({j1, j2, j3}); }
    int med() const { return j1 + j2 + j3 - min() - max(); }
    bool operator==(const DyadicIndex&) const = default;
};

}  // namespace gplab
