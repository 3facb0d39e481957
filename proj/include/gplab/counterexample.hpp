#pragma once

#include <cstdint>
#include <vector>

#include "gplab/bump.hpp"
#include "gplab/density.hpp"
#include "gplab/numeric.hpp"
#include "gplab/torus.hpp"

namespace gplab {

// Endpoint family: frequency p = (kappa, 0, ..., 0), transverse indices
// m in [-M, M]^{d-1}, enumerated lexicographically.
struct ExtremizerSpec {
    std::int64_t kappa = 16;
    std::int64_t M = 256;
    int d = 2;
    QuadraticForm form = QuadraticForm::identity(2);

    void validate() const;  // forcing threshold, M >= kappa, d matches the form
    std::size_t transverse_count() const;
    LatticePoint transverse(std::size_t index) const;  // (d-1)-dimensional m
};

// c_m = kappa^{(d-1)/2} / ((1 + kappa^2 + |m|^2)^{(d-1)/4} (1 + |m|^2)^{(d-1)/4})
std::vector<double> dual_sequence(const ExtremizerSpec& spec);

// Order 2, coefficient c_m / (<(kappa, -m)>^a <(0, -m)>^a), a = (d-1)/2, at
// ((kappa, -m), 0 ; 0, (0, -m)); zero elsewhere.
FourierDensityMatrix extremizer_gamma(const ExtremizerSpec& spec);

// Unit-height C-infinity bump exp(-1 / (1 - (x/w)^2)) on (-w, w), normalized to integral 1.
class Mollifier {
public:
    explicit Mollifier(double half_width);
    double half_width() const { return w_; }
    double value(double x) const;
    double transform(double xi) const;  // Gauss-Legendre quadrature
    // (rho * rho)(s)
    double self_convolution(double s) const;

private:
    double w_;
    double norm_;
};

// zeta(t) = phi3(t / (m delta)) / (m delta) with phi3 = phi2 * phi2(-.),
// phi2 = phi1 * rho, phi1 = (1/2) 1_[-2pi, 2pi]. Hence
// zeta_hat(xi) = (phi1_hat(s) rho_hat(s))^2 at s = m delta xi, phi1_hat(s) = sin(2 pi s)/s,
// and supp zeta = [-delta, delta] with m = 1 / (4 pi + 2w).
class ZetaBump final : public TimeBump {
public:
    static constexpr double kDefaultMollifierHalfWidth = 0.05;

    explicit ZetaBump(double delta, double mollifier_half_width = kDefaultMollifierHalfWidth);

    double value(double t) const override;
    double transform(double xi) const override;
    double half_support() const override { return delta_; }

    double delta() const { return delta_; }
    double scale() const { return m_; }
    // Largest C with phi1_hat >= 2 on [-C, C].
    static double plateau_constant();
    // Largest admissible delta: C / (m delta) >= 1.
    static double delta_threshold(double mollifier_half_width = kDefaultMollifierHalfWidth);
    const Mollifier& mollifier() const { return rho_; }
    // phi3 on the unscaled axis.
    double phi3(double x) const;
    // || phi1 * rho - phi1 ||_{L^1}
    double l1_mollification_error() const;

private:
    double delta_;
    Mollifier rho_;
    double m_;
};

ZetaBump bump_zeta(double delta);

// psi(t) = e * exp(-t^2), psi_hat(xi) = e sqrt(pi) exp(-xi^2 / 4).
class GaussianBump final : public TimeBump {
public:
    double value(double t) const override;
    double transform(double xi) const override;
    double half_support() const override { return 6.5; }
};

GaussianBump bump_psi();

struct BumpCheck {
    double support_max_outside = 0.0;  // max |zeta| sampled outside [-delta, delta]
    double min_transform = 0.0;        // min of the quadrature transform on the grid
    double min_on_unit = 0.0;          // min of the quadrature transform on [-1, 1]
    double max_closed_form_gap = 0.0;  // max |quadrature - closed form| on the grid
    bool support_ok = false;
    bool nonnegative_ok = false;
    bool lower_bound_ok = false;
    bool pass() const { return support_ok && nonnegative_ok && lower_bound_ok; }
};

// Samples zeta on [-delta, delta] (time_samples intervals), integrates its
// transform by Simpson's rule on `grid_points` points over [-xi_max, xi_max],
// and probes the support at points beyond delta.
BumpCheck verify_bump(const ZetaBump& zeta, std::int64_t grid_points = 10000, double xi_max = 50.0,
                      std::int64_t time_samples = 4000, double nonneg_tol = 1e-9);

struct RatioRow {
    std::int64_t kappa = 0;
    std::int64_t M = 0;
    double ln_kappa = 0.0;
    double data_norm = 0.0;  // hk_alpha_norm(gamma, alpha)
    double ratio = 0.0;      // full spacetime norm / data norm
    double ratio_sq = 0.0;
    double b_plus_part = 0.0;
    double b_minus_part = 0.0;
};

struct RatioReport {
    std::vector<RatioRow> rows;
    LinearFit fit;                  // ratio_sq against ln kappa
    double b_minus_variation = 0.0;  // (max - min) / min of b_minus_part
};

struct RatioOptions {
    // M = m_factor * kappa; 0 selects M = kappa^2.
    std::int64_t m_factor = 0;
    TimeQuadrature quadrature = TimeQuadrature::exact;
};

RatioReport ratio_experiment(const std::vector<std::int64_t>& kappas, double alpha, double delta,
                             const QuadraticForm& form, int d, const RatioOptions& options = {});

}  // namespace gplab
