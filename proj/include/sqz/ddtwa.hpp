// ddtwa.hpp — Dissipative discrete truncated Wigner approximation for the
// ion spin-boson model: discretely sampled spins plus a Gaussian boson
// amplitude, Stratonovich SDEs integrated by implicit midpoint with
// fixed-point iteration, ensemble statistics with jackknife errors.
#pragma once

#include <cstdint>
#include <vector>

#include "sqz/schedule.hpp"
#include "sqz/squeezing.hpp"

namespace sqz::ddtwa {

// One classical phase-space point: boson amplitude plus N spin triples.
// Per spin, sx²+sy²+sz² = 3/4 is conserved along any trajectory.
struct ClassicalState {
    cplx alpha{0.0, 0.0};
    std::vector<double> sx, sy, sz;

    explicit ClassicalState(int N = 0) : sx(N, 0.0), sy(N, 0.0), sz(N, 0.0) {}
    int size() const { return static_cast<int>(sx.size()); }
};

struct SdeConfig {
    double dt = 1e-3;
    double fp_tol = 1e-10;
    int fp_max_iter = 50;
    std::uint64_t seed = 1;
    int n_traj = 1000;
    double boson_quadrature_var = 0.25; // vacuum Wigner variance of Re α, Im α
    int jackknife_blocks = 50;
    int threads = 0;
};

struct SdeParams {
    hilbert::CouplingParams coupling;
    DissipationParams rates;
};

// Initial sample: sx = 1/2, sy/sz on the ±1/2 lattice, α Gaussian.
ClassicalState sample_initial(int N, std::uint64_t seed, std::uint64_t trajectory,
                              double boson_quadrature_var = 0.25);

// Deterministic increments per unit time (the drift of the Stratonovich SDEs).
void drift(const ClassicalState& s, const SdeParams& p, ClassicalState& out);

// Noise couplings applied to Wiener increments dW[3i..3i+2] = (dWx, dWy, dWz)
// for spin i: rotations generated by the √(2γ₊) and √(γ_z) terms.
void noise_increment(const ClassicalState& s, const SdeParams& p,
                     const std::vector<double>& dW, ClassicalState& out);

// One Stratonovich step: y' = y + F(ȳ)dt + Σ G_k(ȳ)ΔW_k at the midpoint ȳ,
// solved by fixed-point iteration. ΔW is held fixed across iterations.
// Returns the iteration count; throws FixedPointDivergence past fp_max_iter.
int step_implicit_midpoint(ClassicalState& s, const SdeParams& p,
                           const std::vector<double>& dW, double dt, double fp_tol,
                           int fp_max_iter);

struct EnsembleStats {
    std::vector<double> times;
    std::vector<protocols::SpinMoments> moments; // ensemble means
    std::vector<double> alpha_abs2;              // ⟨|α|²⟩
    std::vector<double> xi2;
    std::vector<double> xi2_err;        // jackknife standard error
    std::vector<double> mean_err[3];    // jackknife errors of ⟨S_x,y,z⟩
    int n_traj = 0;
    long fp_iters_total = 0;
    int fp_iters_max = 0;
};

// Integrate the ensemble through the schedule; trajectories draw from
// streams keyed by (seed, trajectory, step) and are reduced pairwise,
// so results are bitwise reproducible at any thread count.
EnsembleStats run_ensemble(int N, const ProtocolSchedule& schedule, const SdeParams& params,
                           const SdeConfig& cfg, const std::vector<double>& sample_times);

} // namespace sqz::ddtwa
