#pragma once

namespace gplab {

// Even, real time cutoff with real Fourier transform
// f_hat(xi) = integral f(t) exp(-i t xi) dt.
class TimeBump {
public:
    virtual ~TimeBump() = default;
    virtual double value(double t) const = 0;
    virtual double transform(double xi) const = 0;
    // f(t) is zero (or below double resolution) for |t| > half_support().
    virtual double half_support() const = 0;
};

}  // namespace gplab
