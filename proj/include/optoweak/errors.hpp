#pragma once

#include <stdexcept>
#include <string>

namespace optoweak {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A constructed or evolved state carries more population near the truncation
// boundary than tail_tol allows.
struct TruncationError : Error {
    using Error::Error;
};

// Internal accuracy estimate of a matrix function exceeded its bound.
struct ConvergenceError : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// Post-selection probability fell below p_floor: nothing to condition on.
struct DarkPortVanished : Error {
    using Error::Error;
};

// Pre- and post-selected path states orthogonal: weak value undefined.
struct OrthogonalSelection : Error {
    using Error::Error;
};

// Every grid point of a scan was skipped.
struct EmptyScan : Error {
    using Error::Error;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_number(line) {}
    int line_number;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace optoweak
