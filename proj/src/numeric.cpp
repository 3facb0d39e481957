#include "gplab/numeric.hpp"

#include <gsl/gsl_fit.h>

#include "gplab/errors.hpp"

namespace gplab {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ArgumentError("fit_line: need at least two (x, y) pairs");
    LinearFit f;
    double cov00 = 0, cov01 = 0, cov11 = 0, sumsq = 0;
    gsl_fit_linear(x.data(), 1, y.data(), 1, x.size(), &f.intercept, &f.slope, &cov00, &cov01, &cov11, &sumsq);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double sst = 0.0;
    for (double v : y) sst += (v - mean) * (v - mean);
    f.r2 = sst > 0.0 ? 1.0 - sumsq / sst : 1.0;
    return f;
}

}  // namespace gplab
