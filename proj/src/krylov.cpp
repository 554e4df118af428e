#include "sqz/krylov.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace sqz::krylov {

namespace {

constexpr double kBreakdownTol = 1e-14;

struct LanczosFactorization {
    Eigen::MatrixXcd V;       // dim × m orthonormal basis
    Eigen::VectorXd alpha;    // diagonal of T − shift·1
    Eigen::VectorXd beta;     // subdiagonal of T (m−1 entries)
    double beta_next = 0.0;   // residual norm after the last vector
    double beta0 = 0.0;       // norm of the input vector
    double shift = 0.0;       // diagonal shift ⟨v0|H|v0⟩, restored as a phase
    int m = 0;
    bool breakdown = false;
};

LanczosFactorization lanczos(const hilbert::SparseOperator& H, const Eigen::VectorXcd& v0,
                             int m_max, Reorth reorth, long* matvecs) {
    const auto dim = v0.size();
    const int m_cap = static_cast<int>(std::min<std::int64_t>(m_max, dim));
    const bool full_reorth =
        reorth == Reorth::Full || (reorth == Reorth::Auto && dim <= 10000);

    LanczosFactorization f;
    f.beta0 = v0.norm();
    f.V.resize(dim, m_cap);
    f.alpha.resize(m_cap);
    f.beta.resize(std::max(m_cap - 1, 0));

    f.V.col(0) = v0 / f.beta0;
    Eigen::VectorXcd w(dim);
    for (int j = 0; j < m_cap; ++j) {
        H.apply_raw(f.V.col(j).data(), w.data());
        ++(*matvecs);
        if (j == 0) {
            // recurrence runs on H − shift·1 so the loss-of-orthogonality
            // test sees the spectral spread, not the diagonal offset
            f.shift = f.V.col(0).dot(w).real();
        }
        w -= f.shift * f.V.col(j);
        const double pre_norm = w.norm();
        f.alpha[j] = f.V.col(j).dot(w).real();
        w -= f.alpha[j] * f.V.col(j);
        if (j > 0) w -= f.beta[j - 1] * f.V.col(j - 1);

        double nrm = w.norm();
        if (full_reorth || nrm < pre_norm / std::sqrt(2.0)) {
            // one classical Gram-Schmidt pass against the whole basis
            Eigen::VectorXcd coeffs = f.V.leftCols(j + 1).adjoint() * w;
            w -= f.V.leftCols(j + 1) * coeffs;
            nrm = w.norm();
        }

        f.m = j + 1;
        if (j + 1 == m_cap) {
            f.beta_next = nrm;
            break;
        }
        if (nrm < kBreakdownTol * std::max(1.0, std::abs(f.shift))) {
            f.beta_next = 0.0;
            f.breakdown = true;
            break;
        }
        f.beta[j] = nrm;
        f.V.col(j + 1) = w / nrm;
    }
    return f;
}

// exp(−i dt T) e1 via eigendecomposition of the real symmetric tridiagonal
// T − shift·1; the shift comes back as a global phase.
struct SmallExp {
    Eigen::MatrixXd Q;
    Eigen::VectorXd lambda;
    Eigen::VectorXd q_first; // e1ᵀ Q
    double shift = 0.0;

    Eigen::VectorXcd apply(double dt) const {
        const cplx global = std::polar(1.0, -dt * shift);
        Eigen::VectorXcd phase(lambda.size());
        for (Eigen::Index k = 0; k < lambda.size(); ++k) {
            phase[k] = global * std::polar(1.0, -dt * lambda[k]) * q_first[k];
        }
        return Q * phase;
    }
};

SmallExp decompose_tridiagonal(const LanczosFactorization& f) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(f.alpha.head(f.m), f.beta.head(std::max(f.m - 1, 0)));
    SmallExp se;
    se.Q = es.eigenvectors();
    se.lambda = es.eigenvalues();
    se.q_first = se.Q.row(0);
    se.shift = f.shift;
    return se;
}

} // namespace

SpinBosonState krylov_expm_apply(const hilbert::SparseOperator& H, const SpinBosonState& psi,
                                 double dt, const KrylovConfig& cfg, KrylovDiagnostics* diag) {
    if (!H.hermitian()) throw ConfigError("krylov_expm_apply: Hamiltonian must be hermitian");
    if (psi.amplitudes.size() != H.dim()) {
        throw ConfigError("krylov_expm_apply: dimension mismatch");
    }
    if (cfg.m_max < 2) throw ConfigError("krylov_expm_apply: m_max must be >= 2");

    SpinBosonState state = psi;
    if (dt == 0.0) return state;

    KrylovDiagnostics local;
    const double sign = dt > 0.0 ? 1.0 : -1.0;
    const double span = std::abs(dt);
    const double dt_floor = span * std::max(cfg.dt_min_factor, 1e-300);
    double t = 0.0;
    double dt_hint = (cfg.dt_max > 0.0) ? std::min(cfg.dt_max, span) : span;

    while (t < span) {
        const double remaining = span - t;
        auto fac = lanczos(H, state.amplitudes, cfg.m_max, cfg.reorth, &local.matvecs);
        auto se = decompose_tridiagonal(fac);

        double step = std::min(remaining, dt_hint * 2.0);
        if (cfg.dt_max > 0.0) step = std::min(step, cfg.dt_max);

        Eigen::VectorXcd u;
        double err = 0.0;
        while (true) {
            u = se.apply(sign * step);
            err = fac.breakdown ? 0.0 : fac.beta_next * std::abs(u[fac.m - 1]);
            if (err <= cfg.step_tol) break;
            step *= 0.5;
            if (step < dt_floor) {
                throw NonConvergenceError(
                    "krylov_expm_apply: error estimate " + std::to_string(err) +
                        " exceeds tolerance at minimal substep",
                    err);
            }
        }

        state.amplitudes = fac.beta0 * (fac.V.leftCols(fac.m) * u);
        t += step;
        dt_hint = step;
        ++local.substeps;
        if (err > local.max_err_est) local.max_err_est = err;
    }

    local.n_max_final = state.basis.n_max;
    if (diag) diag->merge(local);
    return state;
}

double tail_population(const SpinBosonState& state, int k_guard) {
    const auto& b = state.basis;
    const int n_lo = std::max(0, b.n_max - k_guard + 1);
    double pop = 0.0;
    for (int m = 0; m <= b.N; ++m) {
        for (int n = n_lo; n <= b.n_max; ++n) {
            pop += std::norm(state.amplitudes[b.flatten(m, n)]);
        }
    }
    return pop;
}

namespace {

SpinBosonState rebase(const SpinBosonState& state, int n_max_new) {
    const auto& b = state.basis;
    SpinBosonState out;
    out.basis = DickeFockBasis(b.N, n_max_new);
    out.amplitudes = Eigen::VectorXcd::Zero(out.basis.dim());
    const int n_copy = std::min(b.n_max, n_max_new);
    for (int m = 0; m <= b.N; ++m) {
        for (int n = 0; n <= n_copy; ++n) {
            out.amplitudes[out.basis.flatten(m, n)] = state.amplitudes[b.flatten(m, n)];
        }
    }
    return out;
}

} // namespace

SpinBosonState adapt_cutoff(const SpinBosonState& state, const CutoffPolicy& policy,
                            KrylovDiagnostics* diag) {
    const auto& b = state.basis;

    // per-level populations
    std::vector<double> pop(b.n_max + 1, 0.0);
    for (int m = 0; m <= b.N; ++m) {
        for (int n = 0; n <= b.n_max; ++n) {
            pop[n] += std::norm(state.amplitudes[b.flatten(m, n)]);
        }
    }
    double tail = 0.0;
    for (int n = std::max(0, b.n_max - policy.k_guard + 1); n <= b.n_max; ++n) tail += pop[n];

    if (tail > policy.p_tail) {
        if (b.n_max >= policy.n_ceiling) {
            throw CutoffCeilingError("adapt_cutoff: tail population " + std::to_string(tail) +
                                     " violates p_tail at n_ceiling");
        }
        int n_new = static_cast<int>(std::ceil(policy.grow_factor * b.n_max));
        n_new = std::max(n_new, b.n_max + policy.k_guard);
        n_new = std::min(n_new, policy.n_ceiling);
        if (diag) ++diag->cutoff_grows;
        auto out = rebase(state, n_new);
        if (diag) diag->n_max_final = out.basis.n_max;
        return out;
    }

    // shrink: smallest cutoff whose guard band and everything above it hold
    // less than shrink_threshold (strictly below p_tail, so no regrow)
    std::vector<double> pop_from(b.n_max + 2, 0.0);
    for (int n = b.n_max; n >= 0; --n) pop_from[n] = pop_from[n + 1] + pop[n];
    int candidate = b.n_max;
    for (int k = policy.n_floor; k < b.n_max; ++k) {
        const int guard_lo = std::max(0, k - policy.k_guard + 1);
        if (pop_from[guard_lo] < policy.shrink_threshold) {
            candidate = k;
            break;
        }
    }
    if (candidate <= b.n_max - 2) {
        auto out = rebase(state, candidate);
        out.amplitudes /= out.amplitudes.norm();
        if (diag) {
            ++diag->cutoff_shrinks;
            diag->n_max_final = out.basis.n_max;
        }
        return out;
    }
    if (diag) diag->n_max_final = b.n_max;
    return state;
}

std::vector<Observer> standard_observers() {
    using hilbert::SparseOperator;
    std::vector<Observer> obs;
    obs.push_back({"Sx", [](const DickeFockBasis& b) { return hilbert::build_sx(b); }});
    obs.push_back({"Sy", [](const DickeFockBasis& b) { return hilbert::build_sy(b); }});
    obs.push_back({"Sz", [](const DickeFockBasis& b) { return hilbert::build_sz(b); }});
    obs.push_back({"Sy2", [](const DickeFockBasis& b) {
                       auto sy = hilbert::build_sy(b);
                       return SparseOperator(
                           Eigen::SparseMatrix<cplx, Eigen::RowMajor>(sy.matrix() * sy.matrix()),
                           true);
                   }});
    obs.push_back({"Sz2", [](const DickeFockBasis& b) {
                       auto sz = hilbert::build_sz(b);
                       return SparseOperator(
                           Eigen::SparseMatrix<cplx, Eigen::RowMajor>(sz.matrix() * sz.matrix()),
                           true);
                   }});
    obs.push_back({"n", [](const DickeFockBasis& b) { return hilbert::build_number(b); }});
    return obs;
}

SparseOperator build_segment_hamiltonian(const DickeFockBasis& basis,
                                         const ScheduleSegment& seg) {
    switch (seg.kind) {
        case HamiltonianKind::Dicke:
            return hilbert::build_dicke_hamiltonian(basis, seg.params);
        case HamiltonianKind::TC:
            return hilbert::build_tc_atc(basis, seg.params.g, hilbert::TcVariant::TC,
                                         seg.params.sign_g);
        case HamiltonianKind::ATC:
            return hilbert::build_tc_atc(basis, seg.params.g, hilbert::TcVariant::ATC,
                                         seg.params.sign_g);
    }
    throw ConfigError("build_segment_hamiltonian: unknown kind");
}

SpinBosonState apply_rotation(const SpinBosonState& state, const RotationPulse& pulse,
                              const KrylovConfig& cfg) {
    if (pulse.angle == 0.0) return state;
    if (pulse.axis == 'z') {
        SpinBosonState out = state;
        const auto& b = state.basis;
        for (int m = 0; m <= b.N; ++m) {
            const cplx phase = std::polar(1.0, -pulse.angle * (m - 0.5 * b.N));
            for (int n = 0; n <= b.n_max; ++n) {
                out.amplitudes[b.flatten(m, n)] *= phase;
            }
        }
        return out;
    }
    hilbert::SparseOperator gen;
    if (pulse.axis == 'x') gen = hilbert::build_sx(state.basis);
    else if (pulse.axis == 'y') gen = hilbert::build_sy(state.basis);
    else throw ConfigError("apply_rotation: axis must be x, y or z");
    return krylov_expm_apply(gen, state, pulse.angle, cfg);
}

TimeSeries evolve_schedule(const SpinBosonState& initial, const ProtocolSchedule& schedule,
                           const std::vector<Observer>& observers, double sample_dt,
                           const EvolveOptions& opts) {
    schedule.validate();
    if (sample_dt <= 0.0) throw ConfigError("evolve_schedule: sample_dt must be > 0");

    TimeSeries ts;
    for (const auto& o : observers) ts.names.push_back(o.name);

    SpinBosonState state = initial;

    // observer operators, rebuilt whenever the basis changes
    int cached_nmax = -1;
    std::vector<SparseOperator> ops;
    auto sample = [&](double t) {
        if (state.basis.n_max != cached_nmax) {
            ops.clear();
            for (const auto& o : observers) ops.push_back(o.build(state.basis));
            cached_nmax = state.basis.n_max;
        }
        ts.times.push_back(t);
        Eigen::VectorXcd row(static_cast<Eigen::Index>(ops.size()));
        for (std::size_t i = 0; i < ops.size(); ++i) row[static_cast<Eigen::Index>(i)] =
            hilbert::expect(state, ops[i]);
        ts.values.conservativeResize(static_cast<Eigen::Index>(ts.times.size()), row.size());
        ts.values.row(static_cast<Eigen::Index>(ts.times.size()) - 1) = row.transpose();
    };

    const double total = schedule.total_duration();
    const double teps = 1e-12 * std::max(total, 1.0);

    sample(0.0);
    long next_sample = 1;
    double t_global = 0.0;

    for (std::size_t si = 0; si < schedule.segments.size(); ++si) {
        const auto& seg = schedule.segments[si];
        if (seg.pre_pulse) state = apply_rotation(state, *seg.pre_pulse, opts.krylov);
        if (seg.duration <= 0.0) continue;

        SparseOperator H = build_segment_hamiltonian(state.basis, seg);
        double t_seg = 0.0;
        while (t_seg < seg.duration - teps) {
            double chunk = seg.duration - t_seg;
            chunk = std::min(chunk, next_sample * sample_dt - t_global);
            if (opts.adapt_dt > 0.0) chunk = std::min(chunk, opts.adapt_dt);

            KrylovDiagnostics step_diag;
            state = krylov_expm_apply(H, state, chunk, opts.krylov, &step_diag);
            ts.diag.merge(step_diag);
            t_seg += chunk;
            t_global += chunk;

            const int old_nmax = state.basis.n_max;
            state = adapt_cutoff(state, opts.cutoff, &ts.diag);
            if (state.basis.n_max != old_nmax) {
                H = build_segment_hamiltonian(state.basis, seg);
            }

            if (std::abs(t_global - next_sample * sample_dt) <= teps) {
                sample(next_sample * sample_dt);
                ++next_sample;
            }
        }
    }

    ts.final_state = std::move(state);
    return ts;
}

} // namespace sqz::krylov
