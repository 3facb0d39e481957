#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include <json.hpp>

#include "gplab/density.hpp"
#include "gplab/torus.hpp"

namespace gplab {

// Fourier coefficients of a field on the classical torus, dense over
// [-n/2, n/2)^d in FFT storage order (axis 0 slowest, index i <-> frequency i or i - n).
// phi(x) = sum_xi a_xi exp(i xi.x); mass is sum |a_xi|^2.
class SpectralField {
public:
    SpectralField(int d, int n_grid, QuadraticForm form, double b0);
    static SpectralField from_modes(int n_grid, const QuadraticForm& form, double b0, const SingleParticleState& modes);

    int dim() const { return d_; }
    int grid() const { return n_; }
    std::size_t size() const { return a_.size(); }
    const QuadraticForm& form() const { return form_; }
    double b0() const { return b0_; }

    std::vector<cplx>& coeffs() { return a_; }
    const std::vector<cplx>& coeffs() const { return a_; }
    LatticePoint frequency(std::size_t flat) const;
    std::size_t index_of(const LatticePoint& xi) const;  // ArgumentError outside the grid band
    cplx at(const LatticePoint& xi) const { return a_[index_of(xi)]; }
    cplx& at(const LatticePoint& xi) { return a_[index_of(xi)]; }

    // Nonzero modes in storage order.
    SingleParticleState to_modes() const;

private:
    int d_;
    int n_;
    QuadraticForm form_;
    double b0_;
    std::vector<cplx> a_;
};

double mass(const SpectralField& f);
// sum Q(xi)|a_xi|^2 + (b0/2) n^-d sum_x |phi(x)|^4
double energy(const SpectralField& f);
// Share of the mass carried by modes with some |xi_i| >= n/3.
double high_band_fraction(const SpectralField& f);

// Strang splitting NL(dt/2) L(dt) NL(dt/2) for i phi_t + Delta_Q phi = b0 |phi|^2 phi.
// Owns FFTW plans for one grid shape; plans use FFTW_ESTIMATE so results do
// not depend on planner timing.
class StrangStepper {
public:
    StrangStepper(const SpectralField& shape, double dt);
    ~StrangStepper();
    StrangStepper(const StrangStepper&) = delete;
    StrangStepper& operator=(const StrangStepper&) = delete;

    void step(SpectralField& f);
    double dt() const { return dt_; }

private:
    struct Plans;
    std::unique_ptr<Plans> plans_;
    double dt_;
    int d_, n_;
    std::vector<cplx> linear_;  // exp(-i Q(xi) dt) per storage index
    void nonlinear_half(SpectralField& f);
};

SpectralField step_strang(const SpectralField& f, double dt);

struct NlsTrajectory {
    std::vector<double> times;
    std::vector<SpectralField> states;
    std::vector<double> mass;
    std::vector<double> energy;
    std::vector<double> high_band;  // largest high-band fraction seen since the previous record
};

// n = T/dt steps (dt must divide T to 1e-9 relative); records t = 0, every
// stride-th step, and t = T.
NlsTrajectory evolve(const SpectralField& f0, double T, double dt, int stride);

inline constexpr double kFactorizedThreshold = 1e-14;

// Evolves, then maps each recorded state through factorized() for k = 1..k_max.
std::vector<TrajectoryPoint> factorized_trajectory(const SpectralField& f0, double T, double dt, int k_max, int stride,
                                                   double threshold = kFactorizedThreshold);
std::vector<TrajectoryPoint> factorized_trajectory(const NlsTrajectory& traj, int k_max,
                                                   double threshold = kFactorizedThreshold);

nlohmann::json nls_manifest(const NlsTrajectory& traj, double T, double dt, int stride);

// One density-matrix file per record (level `order`) plus manifest.json in dir.
void write_checkpoints(const std::filesystem::path& dir, const std::vector<TrajectoryPoint>& traj, int order,
                       const nlohmann::json& manifest);

}  // namespace gplab
