// protocols.hpp — Protocol drivers and optimizers: squeeze-and-transfer
// (exact ion dynamics and Gaussian cavity analytics), time-reversal sensing,
// stroboscopic one-axis twisting, twist-and-turn second moments, plus the
// sensitivity estimators.
#pragma once

#include <vector>

#include "sqz/gaussian.hpp"
#include "sqz/krylov.hpp"
#include "sqz/schedule.hpp"
#include "sqz/squeezing.hpp"

namespace sqz::protocols {

using hilbert::SpinBosonState;

// ---------------------------------------------------------------- moments --

// Collective spin moments of an exact state via Sx, Sy, Sz matvecs.
SpinMoments moments_from_state(const SpinBosonState& state);

// ------------------------------------------------------- squeeze & transfer

// Sign convention of the lab-frame quench into the transfer segment.
// Calibrated against the ideal Gaussian law at large detuning: the transfer
// segment flips Omega (delta stays), and flip_g controls an additional
// g → −g. The calibrated default is flip_g = true.
struct QuenchConvention {
    bool flip_omega = true;
    bool flip_g = true;
    const char* name() const {
        return flip_g ? "omega_and_g_flip" : "omega_flip";
    }
};

struct ExactOptions {
    krylov::KrylovConfig kry;
    krylov::CutoffPolicy cutoff;
    int n_max_init = 16;
    double chunk_dt = 0.05;   // cutoff-adaptation cadence, units of 1/g
    QuenchConvention quench;
};

ProtocolSchedule make_snt_schedule(double delta_over_g, double t_sq, double t_tr,
                                   const QuenchConvention& q = {});

// Exact squeeze-and-transfer on the lab-frame ion Hamiltonian. Times in
// units of 1/g. Mean axis x, squeezing in the (y,z) plane.
SqueezingResult run_snt_ion(int N, double delta_over_g, double t_sq, double t_tr,
                            const ExactOptions& opts = {});

struct SqueezingMap {
    std::vector<double> t_sq, t_tr;
    Eigen::MatrixXd xi2; // t_sq × t_tr
    SqueezingResult best;
    std::vector<double> marginal_xi2;    // min over t_tr per t_sq
    std::vector<double> marginal_t_tr;   // argmin over t_tr per t_sq
};

// Exhaustive grid evaluation (parallel over the t_sq axis; the t_tr axis is
// a continuation of a single evolution per t_sq cell).
SqueezingMap optimize_snt(int N, double delta_over_g, const std::vector<double>& t_sq_grid,
                          const std::vector<double>& t_tr_grid, const ExactOptions& opts = {},
                          int threads = 0);

// --------------------------------------------------------- stroboscopic OAT

struct OatPoint {
    double T;
    double delta_over_g; // best stroboscopic detuning 2πn/T
    int n_strobe;
    double xi2;
    double db;
};

struct OatScan {
    std::vector<OatPoint> points; // best ξ² per T
    OatPoint best;
};

// For each protocol time T, scan δ = 2πn/T over the stroboscopic ladder
// (restricted to δ/g within [delta_min, delta_max]) with Ω = 0, and report
// the minimal ξ².
OatScan run_oat_stroboscopic(int N, const std::vector<double>& T_grid, double delta_min = 3.0,
                             double delta_max = 40.0, int max_candidates = 10,
                             const ExactOptions& opts = {}, int threads = 0);

// ------------------------------------------------------------ time reversal

struct SensitivityResult {
    double dphi2 = 0.0;   // (δφ)²
    double gain = 0.0;    // 1/(N (δφ)²)
    double db = 0.0;      // 10 log₁₀ gain
    double T1 = 0.0, T2 = 0.0;
    double mean_sy = 0.0, var_sy = 0.0, slope = 0.0;
};

struct ReversalObservables {
    double mean_sy;
    double var_sy;
};

// Forward squeezing segment for T1, instantaneous rotation exp(−iφSz),
// reversed-coupling segment for T2; observable is Sy.
ReversalObservables run_time_reversal(int N, double delta_over_g, double T1, double T2,
                                      double phi, const ExactOptions& opts = {});

// Central-difference slope at φ = 0 with step dphi.
SensitivityResult estimate_sensitivity(int N, double delta_over_g, double T1, double T2,
                                       double dphi = 1e-3, const ExactOptions& opts = {});

struct ReversalScanPoint {
    double T1, T2;
    SensitivityResult sens;
};

// Scan T2 along a continuation of the backward evolution for each (T1, φ).
std::vector<ReversalScanPoint> reversal_scan(int N, double delta_over_g,
                                             const std::vector<double>& T1_grid,
                                             const std::vector<double>& T2_grid,
                                             double dphi = 1e-3, const ExactOptions& opts = {},
                                             int threads = 0);

// Equal-time protocol (T1 = T2 = T/2 of the total duration 2·T1).
std::vector<ReversalScanPoint> reversal_scan_equal(int N, double delta_over_g,
                                                   const std::vector<double>& T1_grid,
                                                   double dphi = 1e-3,
                                                   const ExactOptions& opts = {},
                                                   int threads = 0);

// Ideal large-N closed forms: Var = N cosh[2G(T1−T2)]/4, slope = (N/2)cosh(GT2).
SensitivityResult ideal_reversal_sensitivity(double G, double T1, double T2, double N);

struct UnequalOptimum {
    double dT_opt;    // ln3/(4G)
    double n_dphi2;   // N(δφ)² ≈ 3.5 e^{−GT}
};
UnequalOptimum ideal_unequal_optimum(double G, double T);

// ------------------------------------------------------- cavity OAT / TnT --

struct CavityAnalytics {
    double xi2_oat; // 6 (CN)^{−1/3}
    double xi2_tnt; // 4.6 (CN)^{−1/2}
};
CavityAnalytics cavity_oat_tnt_analytics(double C, double N);

// ------------------------------------------------------------ twist & turn

// Mean field (s_mf = ⟨S⁻⟩, z_mf = ⟨S_z⟩) plus the four fluctuation
// correlators of (δS⁺, δS_z), integrated in dimensionless time τ = χNt.
struct TnTState {
    cplx s_mf;
    double z_mf;
    cplx pp; // ⟨δS⁺δS⁺⟩
    cplx pm; // ⟨δS⁺δS⁻⟩
    cplx pz; // ⟨δS⁺δS_z⟩
    cplx zz; // ⟨δS_z²⟩
};

struct TnTSeries {
    std::vector<double> tau;
    std::vector<double> xi2;
    std::vector<TnTState> states;
    double xi2_min;
    double tau_min;
};

// Integrate the second-moment system for collective cooperativity NC and
// inverse detuning η = κ/Δ_cav; γ/(χN) = (η + 4/η)/(NC).
TnTSeries tnt_moment_solver(double NC, double eta, double tau_max, double dtau,
                            double N_reference = 1e4);

struct TnTOptimum {
    double xi2_opt;
    double eta_opt;
    double tau_opt;
    double delta_over_kappa_opt; // 1/η_opt
};

TnTOptimum tnt_optimize(double NC, const std::vector<double>& eta_grid, double tau_max,
                        double dtau, int threads = 0);

// Constrained variant at fixed detuning Δ_cav/κ = 1.1 √(NC).
TnTOptimum tnt_fixed_detuning(double NC, double tau_max, double dtau);

} // namespace sqz::protocols
