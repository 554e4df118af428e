// gaussian.hpp — Large-N analytics for the squeeze-and-transfer protocol:
// ideal and finite-size closed forms, the 4×4 boson-pair covariance equation
// with cavity decay and a finite Rabi pulse, the spontaneous-emission 2×2
// propagator algebra, and the analytic small-κ optimum.
#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "sqz/errors.hpp"

namespace sqz {
using cplx = std::complex<double>;
namespace gaussian {

// ξ² = e^{−2 G T_sq}
double ideal_squeezing(double G, double T_sq);

// ξ² = e^{−2GT} + e^{2GT}/(3N)
double finite_size_squeezing(double G, double T_sq, double N);

struct FiniteSizeOptimum {
    double xi2_opt;  // sqrt(4/(3N))
    double GT_opt;   // log(3N)/4
};
FiniteSizeOptimum finite_size_optimum(double N);

// Mean-field pulse dynamics: θ̇ = ω_Rabi(t) + 2 g√N α, α̇ = −κα/2 + (g√N/2) sin θ
struct MeanFieldPulse {
    std::function<double(double)> omega_rabi; // drive schedule
    double kappa = 0.0;
    double gN = 1.0; // collective coupling g√N
};

struct MeanFieldTrajectory {
    std::vector<double> t, theta, alpha;
};

// RK4 on the dt grid; breakpoints mark drive discontinuities and force a
// step boundary so the order of the scheme survives them.
MeanFieldTrajectory meanfield_pulse_trajectory(const MeanFieldPulse& pulse, double t0, double t1,
                                               double dt,
                                               const std::vector<double>& breakpoints = {});

// Second moments of (a, b, a†, b†) pairs; commutator consistency
// M₁₃ − M₃₁ = 1 and M₂₄ − M₄₂ = 1 is preserved along the evolution.
struct CovMatrix4 {
    Eigen::Matrix4cd M;
    double t = 0.0;
};

// M(0): M₁₃ = M₂₄ = 1, all else 0.
CovMatrix4 initial_covariance();

// Ṁ = F M + M Fᵀ + D with F(θ(t)) and the single-κ diffusion entry.
CovMatrix4 evolve_covariance(const CovMatrix4& M0, const std::function<double(double)>& theta,
                             double gN, double kappa, double t0, double t1, double dt);

// ξ² = M₂₄ + M₄₂ − 2|M₂₂| and the optimal quadrature angle ν ∈ {0, π/2}.
struct QuadratureSqueezing {
    double xi2;
    double nu;
};
QuadratureSqueezing squeezing_from_M(const CovMatrix4& M);

// Full protocol on the covariance level with the mean-field pulse
// co-integrated: TMS for T_sq, square drive of strength omega_rabi for
// T_drive, then free evolution for T_tr. Returns ξ² at the end.
double pulse_protocol_squeezing(double gN, double kappa, double T_sq, double omega_rabi,
                                double T_drive, double T_tr, double dt);

// Same protocol with an instantaneous π pulse (θ jumps 0 → π).
double instantaneous_pulse_squeezing(double gN, double kappa, double T_sq, double T_tr,
                                     double dt);

struct FinitePulseScan {
    std::vector<double> dT_drive; // deviations from T_π = π/ω_Rabi, units of T_π
    std::vector<double> dT_tr;    // deviations from T_tr* = (π/4)/gN, units of T_tr*
    Eigen::MatrixXd xi2;          // dT_drive × dT_tr
    double xi2_min;
    double dT_drive_min, dT_tr_min;
};

FinitePulseScan finite_pulse_scan(double gN, double kappa, double T_sq, double omega_rabi,
                                  const std::vector<double>& dT_drive,
                                  const std::vector<double>& dT_tr, double dt);

// 2×2 fluctuation propagators for the spontaneous-emission treatment:
// L over the squeezing window, M over the transfer window, with the
// mean-field inversion z_mf(t) piecewise around the instantaneous π pulse.
struct PropagatorPair {
    Eigen::Matrix2cd L;
    Eigen::Matrix2cd M;
    double gamma = 0.0, kappa = 0.0, gN = 1.0, T_sq = 0.0, T_tr = 0.0;
};

PropagatorPair spontemission_propagators(double gN, double kappa, double gamma, double T_sq,
                                         double T_tr, double dt);

// Transcribed closed forms in the propagator matrix elements:
//   ⟨(S⁻)²/N⟩  = −2 L*₁₁ L₂₁ M₁₂ M₁₁
//   ⟨S⁺S⁻/N⟩  = |M₁₁|²|L₁₁|² + |M₁₂|²|L₂₁|² − (2e^{−γT_sq}−1)|M₁₁|²
//   Var_min/(N/4), contrast, and ξ² = [Var_min/(N/4)] / contrast².
struct SpontEmissionResult {
    double var_min_norm; // Var_min / (N/4)
    double contrast;
    double xi2;
};
SpontEmissionResult spontemission_squeezing(const PropagatorPair& pair);

// Small-κ expansion of the γ=0 squeeze-and-transfer optimum;
// eps = gN·T_tr − π/4.
double cavity_analytic_squeezing(double kappa_over_gN, double eps, double GT_sq);

struct CavityOptimum {
    double xi2_opt;        // ≈ 0.4 κ/(g√N)
    double eps_opt;        // κ/(4 g√N)
    double two_GT_sq_min;  // 2 g√N T_sq ≳ log(2.5 g√N/κ)
};
CavityOptimum cavity_analytic_optimum(double kappa_over_gN);

} // namespace gaussian
} // namespace sqz
