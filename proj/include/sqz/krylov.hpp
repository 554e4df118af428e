// krylov.hpp — Time evolution of SpinBosonState under piecewise-constant
// hermitian Hamiltonians: Lanczos approximation of exp(−iH dt)|ψ⟩ with
// adaptive substepping, plus a dynamically adapted Fock cutoff.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sqz/hilbert.hpp"
#include "sqz/schedule.hpp"

namespace sqz::krylov {

using hilbert::DickeFockBasis;
using hilbert::SparseOperator;
using hilbert::SpinBosonState;

enum class Reorth { Full, Selective, Auto };

struct KrylovConfig {
    int m_max = 30;          // max Lanczos subspace dimension
    double step_tol = 1e-9;  // per-substep error tolerance
    double dt_max = 0.0;     // max substep; 0 = uncapped
    double dt_min_factor = 1e-12; // NonConvergence below dt_total * this
    Reorth reorth = Reorth::Auto; // Auto: full below dim 1e4, selective above
};

struct KrylovDiagnostics {
    long substeps = 0;
    long matvecs = 0;
    double max_err_est = 0.0;
    long cutoff_grows = 0;
    long cutoff_shrinks = 0;
    int n_max_final = 0;

    void merge(const KrylovDiagnostics& o) {
        substeps += o.substeps;
        matvecs += o.matvecs;
        if (o.max_err_est > max_err_est) max_err_est = o.max_err_est;
        cutoff_grows += o.cutoff_grows;
        cutoff_shrinks += o.cutoff_shrinks;
        n_max_final = o.n_max_final;
    }
};

// exp(−iH dt)|ψ⟩ via the hermitian three-term recurrence; estimated error
// per substep ≤ step_tol, norm preserved to 10× step_tol.
SpinBosonState krylov_expm_apply(const SparseOperator& H, const SpinBosonState& psi, double dt,
                                 const KrylovConfig& cfg = {},
                                 KrylovDiagnostics* diag = nullptr);

struct CutoffPolicy {
    double p_tail = 1e-8;          // max population in top k_guard Fock levels
    int k_guard = 2;
    double grow_factor = 1.5;
    double shrink_threshold = 1e-10;
    int n_floor = 4;
    int n_ceiling = 2048;
};

// Population of Fock levels n_max−k_guard+1 .. n_max.
double tail_population(const SpinBosonState& state, int k_guard);

// Re-embed in a larger Fock basis when the guard-band population exceeds
// p_tail; truncate (and renormalize) when the population above a smaller
// candidate cutoff falls below shrink_threshold. Operators for the new
// basis are rebuilt by the caller.
SpinBosonState adapt_cutoff(const SpinBosonState& state, const CutoffPolicy& policy,
                            KrylovDiagnostics* diag = nullptr);

using OpBuilder = std::function<SparseOperator(const DickeFockBasis&)>;

struct Observer {
    std::string name;
    OpBuilder build;
};

// Sx, Sy, Sz, Sy², Sz², a†a
std::vector<Observer> standard_observers();

struct EvolveOptions {
    KrylovConfig krylov;
    CutoffPolicy cutoff;
    double adapt_dt = 0.0; // cutoff-adaptation cadence; 0 = every sample interval
};

struct TimeSeries {
    std::vector<double> times;
    std::vector<std::string> names;
    Eigen::MatrixXcd values; // times × observers
    SpinBosonState final_state;
    KrylovDiagnostics diag;
};

SparseOperator build_segment_hamiltonian(const DickeFockBasis& basis,
                                         const ScheduleSegment& seg);

// Applies an instantaneous collective rotation exp(−i angle S_axis).
SpinBosonState apply_rotation(const SpinBosonState& state, const RotationPulse& pulse,
                              const KrylovConfig& cfg = {});

// Advance through the schedule, adapting the cutoff between substeps and
// recording observables every sample_dt (and at segment boundaries).
TimeSeries evolve_schedule(const SpinBosonState& initial, const ProtocolSchedule& schedule,
                           const std::vector<Observer>& observers, double sample_dt,
                           const EvolveOptions& opts = {});

} // namespace sqz::krylov
