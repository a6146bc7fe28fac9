#pragma once

#include <stdexcept>
#include <string>

namespace proxlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A precondition on a scalar/vector argument was violated (e.g. lambda <= 0).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The operator has an empty value at the requested point.
class DomainError : public Error {
public:
    using Error::Error;
};

/// No solver strategy exists for the requested (function, operator) pair.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// An inner solver failed to meet its certification tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// theta(0) <= 0 for a strongly implicit inclusion.
class StrongImplicitnessError : public Error {
public:
    StrongImplicitnessError(const std::string& what, double theta0)
        : Error(what), theta0_(theta0) {}

    double theta0() const noexcept { return theta0_; }

private:
    double theta0_;
};

/// Malformed catalog spec string or experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace proxlab
