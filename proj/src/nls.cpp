#include "gplab/nls.hpp"

#include <fftw3.h>

#include <cmath>
#include <fstream>
#include <mutex>

#include "gplab/errors.hpp"
#include "gplab/numeric.hpp"

namespace gplab {

namespace {

// FFTW planning is not thread-safe.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t grid_size(int d, int n) {
    std::size_t s = 1;
    for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(n);
    return s;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

SpectralField::SpectralField(int d, int n_grid, QuadraticForm form, double b0)
    : d_(d), n_(n_grid), form_(std::move(form)), b0_(b0) {
    if (d < 1 || d > 3) throw ArgumentError("SpectralField: dimension must be 1, 2 or 3");
    if (n_grid < 2 || (n_grid & (n_grid - 1)) != 0) throw ArgumentError("SpectralField: grid must be a power of two");
    if (form_.dim() != d) throw ArgumentError("SpectralField: form dimension differs from d");
    if (!std::isfinite(b0)) throw ArgumentError("SpectralField: b0 must be finite");
    a_.assign(grid_size(d, n_grid), cplx{0.0, 0.0});
}

SpectralField SpectralField::from_modes(int n_grid, const QuadraticForm& form, double b0,
                                        const SingleParticleState& modes) {
    SpectralField f(form.dim(), n_grid, form, b0);
    for (const auto& [p, c] : modes) f.at(p) += c;
    return f;
}

LatticePoint SpectralField::frequency(std::size_t flat) const {
    LatticePoint p(d_);
    for (int a = d_ - 1; a >= 0; --a) {
        const auto i = static_cast<std::int64_t>(flat % static_cast<std::size_t>(n_));
        flat /= static_cast<std::size_t>(n_);
        p[a] = i < n_ / 2 ? i : i - n_;
    }
    return p;
}

std::size_t SpectralField::index_of(const LatticePoint& xi) const {
    if (xi.dim() != d_) throw ArgumentError("SpectralField: frequency dimension differs from d");
    std::size_t flat = 0;
    for (int a = 0; a < d_; ++a) {
        if (xi[a] < -n_ / 2 || xi[a] >= n_ / 2)
            throw ArgumentError("SpectralField: frequency " + xi.str() + " outside the grid band");
        flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(xi[a] < 0 ? xi[a] + n_ : xi[a]);
    }
    return flat;
}

SingleParticleState SpectralField::to_modes() const {
    SingleParticleState out;
    for (std::size_t i = 0; i < a_.size(); ++i)
        if (a_[i] != cplx{0.0, 0.0}) out.emplace_back(frequency(i), a_[i]);
    return out;
}

double mass(const SpectralField& f) {
    CompensatedSum s;
    for (const auto& c : f.coeffs()) s.add(std::norm(c));
    return s.value();
}

double high_band_fraction(const SpectralField& f) {
    const std::int64_t edge = (f.grid() + 2) / 3;  // smallest integer >= n/3
    double hi = 0.0, total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double m = std::norm(f.coeffs()[i]);
        total += m;
        const LatticePoint p = f.frequency(i);
        for (int a = 0; a < f.dim(); ++a)
            if (std::abs(p[a]) >= edge) {
                hi += m;
                break;
            }
    }
    return total > 0.0 ? hi / total : 0.0;
}

double energy(const SpectralField& f) {
    CompensatedSum kin;
    for (std::size_t i = 0; i < f.size(); ++i) kin.add(q_form(f.form(), f.frequency(i)) * std::norm(f.coeffs()[i]));
    if (f.b0() == 0.0) return kin.value();
    std::vector<cplx> phi = f.coeffs();
    std::vector<int> dims(static_cast<std::size_t>(f.dim()), f.grid());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft(f.dim(), dims.data(), as_fftw(phi.data()), as_fftw(phi.data()), FFTW_BACKWARD,
                             FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    CompensatedSum pot;
    for (const auto& v : phi) pot.add(std::norm(v) * std::norm(v));
    return kin.value() + 0.5 * f.b0() * pot.value() / static_cast<double>(f.size());
}

struct StrangStepper::Plans {
    std::vector<cplx> work;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

StrangStepper::StrangStepper(const SpectralField& shape, double dt)
    : plans_(std::make_unique<Plans>()), dt_(dt), d_(shape.dim()), n_(shape.grid()) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("StrangStepper: dt must be positive");
    plans_->work.assign(shape.size(), cplx{0.0, 0.0});
    std::vector<int> dims(static_cast<std::size_t>(d_), n_);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plans_->forward = fftw_plan_dft(d_, dims.data(), as_fftw(plans_->work.data()), as_fftw(plans_->work.data()),
                                        FFTW_FORWARD, FFTW_ESTIMATE);
        plans_->backward = fftw_plan_dft(d_, dims.data(), as_fftw(plans_->work.data()), as_fftw(plans_->work.data()),
                                         FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    linear_.resize(shape.size());
    for (std::size_t i = 0; i < shape.size(); ++i)
        linear_[i] = std::polar(1.0, -q_form(shape.form(), shape.frequency(i)) * dt);
}

StrangStepper::~StrangStepper() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plans_->forward);
    fftw_destroy_plan(plans_->backward);
}

void StrangStepper::nonlinear_half(SpectralField& f) {
    auto& w = plans_->work;
    std::copy(f.coeffs().begin(), f.coeffs().end(), w.begin());
    fftw_execute(plans_->backward);
    const double h = 0.5 * dt_ * f.b0();
    for (auto& v : w) v *= std::polar(1.0, -h * std::norm(v));
    fftw_execute(plans_->forward);
    const double inv = 1.0 / static_cast<double>(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) f.coeffs()[i] = w[i] * inv;
}

void StrangStepper::step(SpectralField& f) {
    if (f.dim() != d_ || f.grid() != n_) throw ArgumentError("StrangStepper: field shape differs from the plan");
    if (f.b0() != 0.0) nonlinear_half(f);
    for (std::size_t i = 0; i < linear_.size(); ++i) f.coeffs()[i] *= linear_[i];
    if (f.b0() != 0.0) nonlinear_half(f);
}

SpectralField step_strang(const SpectralField& f, double dt) {
    SpectralField out = f;
    StrangStepper(f, dt).step(out);
    return out;
}

NlsTrajectory evolve(const SpectralField& f0, double T, double dt, int stride) {
    if (!(T > 0.0) || !(dt > 0.0)) throw ArgumentError("evolve: T and dt must be positive");
    if (stride < 1) throw ArgumentError("evolve: record stride must be positive");
    const double steps = std::round(T / dt);
    if (steps < 1 || std::abs(steps * dt - T) > 1e-9 * T) throw ArgumentError("evolve: dt must divide T");
    const auto n = static_cast<std::int64_t>(steps);

    NlsTrajectory tr;
    SpectralField f = f0;
    double hb = high_band_fraction(f);
    auto record = [&](std::int64_t i) {
        tr.times.push_back(static_cast<double>(i) * dt);
        tr.states.push_back(f);
        tr.mass.push_back(mass(f));
        tr.energy.push_back(energy(f));
        tr.high_band.push_back(hb);
        hb = 0.0;
    };
    record(0);
    StrangStepper stepper(f, dt);
    for (std::int64_t i = 1; i <= n; ++i) {
        stepper.step(f);
        hb = std::max(hb, high_band_fraction(f));
        if (i % stride == 0 || i == n) record(i);
    }
    return tr;
}

std::vector<TrajectoryPoint> factorized_trajectory(const NlsTrajectory& traj, int k_max, double threshold) {
    if (k_max < 1) throw ArgumentError("factorized_trajectory: k_max must be positive");
    std::vector<TrajectoryPoint> out;
    for (std::size_t r = 0; r < traj.states.size(); ++r) {
        const auto& f = traj.states[r];
        const SingleParticleState modes = f.to_modes();
        TrajectoryPoint p;
        p.t = traj.times[r];
        p.seq.form = f.form();
        for (int k = 1; k <= k_max; ++k) p.seq.entries.push_back(factorized(modes, k, f.form(), threshold, f.grid() / 2));
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<TrajectoryPoint> factorized_trajectory(const SpectralField& f0, double T, double dt, int k_max, int stride,
                                                   double threshold) {
    return factorized_trajectory(evolve(f0, T, dt, stride), k_max, threshold);
}

nlohmann::json nls_manifest(const NlsTrajectory& traj, double T, double dt, int stride) {
    if (traj.states.empty()) throw ArgumentError("nls_manifest: empty trajectory");
    const auto& f = traj.states.front();
    nlohmann::json j;
    j["T"] = T;
    j["dt"] = dt;
    j["record_stride"] = stride;
    j["d"] = f.dim();
    j["grid"] = f.grid();
    j["theta"] = f.form().theta();
    j["b0"] = f.b0();
    j["times"] = traj.times;
    j["mass"] = traj.mass;
    j["energy"] = traj.energy;
    j["high_band_fraction"] = traj.high_band;
    return j;
}

void write_checkpoints(const std::filesystem::path& dir, const std::vector<TrajectoryPoint>& traj, int order,
                       const nlohmann::json& manifest) {
    std::filesystem::create_directories(dir);
    nlohmann::json m = manifest;
    m["checkpoint_order"] = order;
    m["checkpoints"] = nlohmann::json::array();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& seq = traj[i].seq;
        if (order < 1 || order > seq.max_order()) throw ArgumentError("write_checkpoints: order not in the trajectory");
        const std::string name = "state-" + std::to_string(i) + ".density";
        std::ofstream os(dir / name);
        if (!os) throw Error("write_checkpoints: cannot open " + (dir / name).string());
        write_density(os, seq.entries[static_cast<std::size_t>(order - 1)]);
        m["checkpoints"].push_back({{"t", traj[i].t}, {"file", name}});
    }
    std::ofstream os(dir / "manifest.json");
    if (!os) throw Error("write_checkpoints: cannot open manifest");
    os << m.dump(2) << '\n';
}

}  // namespace gplab
