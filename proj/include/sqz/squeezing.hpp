// squeezing.hpp — Wineland squeezing parameter from first/second collective
// spin moments, shared by the exact, semiclassical and master-equation paths.
#pragma once

#include <cmath>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "sqz/errors.hpp"

namespace sqz::protocols {

// First moments ⟨S⟩ and symmetrized second moments ⟨{S_i,S_j}⟩/2 (not centered).
struct SpinMoments {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
};

enum class MeanAxis { X, Y, Z };

struct SqueezingResult {
    double xi2 = 1.0;
    double theta_opt = 0.0; // angle in the transverse plane
    double contrast = 1.0;  // |⟨S_axis⟩| / (N/2)
    double db = 0.0;        // −10 log₁₀ ξ²
    std::map<std::string, double> times; // producing schedule, filled by drivers
};

inline double to_db(double xi2) { return -10.0 * std::log10(xi2); }

// ξ² = N · min_θ Var(S_θ) / ⟨S_axis⟩², minimized in closed form over the
// transverse plane. Throws ZeroContrast when the mean spin vanishes.
inline SqueezingResult squeezing_parameter(const SpinMoments& m, int N, MeanAxis axis) {
    int ax = 0, e1 = 1, e2 = 2; // transverse plane indices
    switch (axis) {
        case MeanAxis::X: ax = 0; e1 = 1; e2 = 2; break;
        case MeanAxis::Y: ax = 1; e1 = 2; e2 = 0; break;
        case MeanAxis::Z: ax = 2; e1 = 0; e2 = 1; break;
    }
    const double mean_axis = m.mean[ax];
    if (std::abs(mean_axis) < 1e-12 * N) {
        throw ZeroContrastError("squeezing_parameter: vanishing mean spin");
    }
    const double v11 = m.second(e1, e1) - m.mean[e1] * m.mean[e1];
    const double v22 = m.second(e2, e2) - m.mean[e2] * m.mean[e2];
    const double v12 = m.second(e1, e2) - m.mean[e1] * m.mean[e2];

    const double half_sum = 0.5 * (v11 + v22);
    const double half_diff = 0.5 * (v11 - v22);
    const double rad = std::sqrt(half_diff * half_diff + v12 * v12);
    const double var_min = half_sum - rad;

    SqueezingResult r;
    r.xi2 = N * var_min / (mean_axis * mean_axis);
    r.theta_opt = 0.5 * std::atan2(v12, half_diff) + 0.5 * M_PI;
    // wrap into [0, π)
    while (r.theta_opt >= M_PI) r.theta_opt -= M_PI;
    while (r.theta_opt < 0.0) r.theta_opt += M_PI;
    r.contrast = std::abs(mean_axis) / (0.5 * N);
    r.db = to_db(r.xi2);
    return r;
}

} // namespace sqz::protocols
