#pragma once

#include <stdexcept>
#include <string>

namespace beamlab {

// Requested work exceeds a configured cap (truncation order, sample count).
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// The adaptive step controller failed; `time` is where integration stopped.
struct SolverError : std::runtime_error {
    double time;
    SolverError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
};

// Malformed or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Bisection endpoints do not bracket a stability transition.
struct BracketError : std::runtime_error {
    explicit BracketError(const std::string& what) : std::runtime_error(what) {}
};

// Initial data (or forcing) does not single out a prevailing mode.
struct NoPrevailingModeError : std::runtime_error {
    explicit NoPrevailingModeError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace beamlab
