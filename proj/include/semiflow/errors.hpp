#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace semiflow {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Vector/matrix shape mismatch.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// A stated precondition does not hold (e.g. growth bound not negative).
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(what) {}
};

/// Requested resolvent point too close to the spectrum.
class SpectralProximityError : public Error {
public:
    SpectralProximityError(const std::string& what, std::complex<double> nearest)
        : Error(what), nearest_eigenvalue(nearest) {}
    std::complex<double> nearest_eigenvalue;
};

/// Numerical procedure failed to reach its tolerance.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what, double achieved = -1.0)
        : Error(what), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

/// Operator assembly failed (rank deficiency, incompatible blocks, ...).
class AssemblyError : public Error {
public:
    explicit AssemblyError(const std::string& what) : Error(what) {}
};

/// Invalid experiment configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace semiflow
