#pragma once

#include <stdexcept>
#include <string>

namespace heat2d {

// Bad user-supplied value (sizes, bounds, divisibility, ...). CLI exit code 2.
class InvalidParameterError : public std::runtime_error {
public:
    explicit InvalidParameterError(const std::string& what) : std::runtime_error(what) {}
};

// Factorization failed or the residual check did not pass. CLI exit code 3.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double diagnostic)
        : std::runtime_error(what), diagnostic_(diagnostic) {}
    // Pivot magnitude, condition estimate, or residual, depending on the failure.
    double diagnostic() const { return diagnostic_; }

private:
    double diagnostic_ = 0.0;
};

// d^{L+} (or another small dense matrix) too close to singular to invert reliably.
class IllConditionedError : public SolverError {
public:
    IllConditionedError(const std::string& what, double cond) : SolverError(what, cond) {}
};

// File could not be read/written or has invalid contents. CLI exit code 4.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Internal consistency failure (a grid point not covered by any local domain,
// an unknown without a row, ...). Indicates a bug, not bad input.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

} // namespace heat2d
