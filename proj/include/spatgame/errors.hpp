#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spatgame {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or invalid argument combination (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A mixed strategy left the probability simplex beyond roundoff.
class SimplexViolation : public Error {
public:
    using Error::Error;
};

/// The multiplier 1 + h*Delta of the belief update became non-positive.
class MultiplierNegative : public Error {
public:
    using Error::Error;
};

/// An agent left the certified ball |x| <= position_bound.
class PositionBoundExceeded : public Error {
public:
    using Error::Error;
};

/// A per-step speed bound of a trajectory was violated.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

class SolverFailure : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, std::vector<double> residuals)
        : Error(what), residuals_(std::move(residuals)) {}

    const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
    std::vector<double> residuals_;
};

} // namespace spatgame
