// errors.hpp — Exception types shared across the toolkit
#pragma once

#include <stdexcept>
#include <string>

namespace sqz {

struct NonConvergenceError : std::runtime_error {
    double achieved_residual;
    NonConvergenceError(const std::string& msg, double residual)
        : std::runtime_error(msg), achieved_residual(residual) {}
};

struct CutoffCeilingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FixedPointDivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionTooLargeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvariantViolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroContrastError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroSlopeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContrastLossError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MeanFieldCollapseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IncompleteSweepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sqz
