#pragma once

#include <stdexcept>
#include <string>

namespace gplab {

// Error hierarchy. The CLI maps these onto exit codes, so each distinct
// failure class gets its own type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

// A real-valued frequency that is not on the theta_j * Z lattice.
class LatticeError : public Error {
public:
    using Error::Error;
};

// Quadrature request below the oversampling requirement.
class ResolutionError : public Error {
public:
    using Error::Error;
};

class OverflowError : public Error {
public:
    using Error::Error;
};

// kappa below the forcing threshold, and similar documented preconditions.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class ThresholdError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace gplab
