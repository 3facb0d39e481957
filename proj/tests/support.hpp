#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "gplab/numeric.hpp"
#include "gplab/torus.hpp"

namespace gplab::testing {

inline LatticePoint random_point(CounterRng& rng, int d, std::int64_t bound) {
    LatticePoint p(d);
    for (int i = 0; i < d; ++i) p[i] = rng.uniform_int(-bound, bound);
    return p;
}

inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1e-300, std::abs(a), std::abs(b)});
}

inline bool close_abs(std::complex<double> a, std::complex<double> b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace gplab::testing
