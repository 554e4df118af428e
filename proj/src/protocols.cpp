#include "sqz/protocols.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "sqz/sweep.hpp"

namespace sqz::protocols {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// --------------------------------------------------------------- moments --

namespace {

// Caches Sx, Sy, Sz for the current basis; rebuilt when the cutoff adapts.
class MomentsCache {
public:
    SpinMoments eval(const SpinBosonState& state) {
        const auto& b = state.basis;
        if (b.N != N_ || b.n_max != n_max_) {
            sx_ = hilbert::build_sx(b);
            sy_ = hilbert::build_sy(b);
            sz_ = hilbert::build_sz(b);
            N_ = b.N;
            n_max_ = b.n_max;
        }
        Eigen::VectorXcd u[3];
        sx_.apply(state.amplitudes, u[0]);
        sy_.apply(state.amplitudes, u[1]);
        sz_.apply(state.amplitudes, u[2]);

        SpinMoments m;
        for (int i = 0; i < 3; ++i) {
            m.mean[i] = state.amplitudes.dot(u[i]).real();
            for (int j = i; j < 3; ++j) {
                // Re⟨S_i S_j⟩ = ⟨{S_i,S_j}⟩/2 for hermitian S_i, S_j
                const double v = u[i].dot(u[j]).real();
                m.second(i, j) = v;
                m.second(j, i) = v;
            }
        }
        return m;
    }

private:
    int N_ = -1, n_max_ = -1;
    hilbert::SparseOperator sx_, sy_, sz_;
};

// Chunked evolution under a fixed-parameter segment with cutoff adaptation.
class SegmentEvolver {
public:
    SegmentEvolver(SpinBosonState state, const ExactOptions& opts)
        : state_(std::move(state)), opts_(opts) {}

    void evolve(const hilbert::CouplingParams& p, double duration) {
        if (duration <= 0.0) return;
        hilbert::SparseOperator H = hilbert::build_dicke_hamiltonian(state_.basis, p);
        double t = 0.0;
        const double teps = 1e-12 * std::max(duration, 1.0);
        while (t < duration - teps) {
            const double chunk = std::min(opts_.chunk_dt, duration - t);
            state_ = krylov::krylov_expm_apply(H, state_, chunk, opts_.kry, &diag);
            t += chunk;
            const int old_nmax = state_.basis.n_max;
            state_ = krylov::adapt_cutoff(state_, opts_.cutoff, &diag);
            if (state_.basis.n_max != old_nmax) {
                H = hilbert::build_dicke_hamiltonian(state_.basis, p);
            }
        }
    }

    void rotate_z(double phi) {
        state_ = krylov::apply_rotation(state_, RotationPulse{'z', phi, true}, opts_.kry);
    }

    // exp(sign·i·H0·t) with H0 = delta a†a + omega S_x: boson phases are
    // diagonal, the spin factor is a collective x rotation (4π-periodic)
    void apply_frame(double delta, double omega, double t, int sign) {
        const auto& b = state_.basis;
        for (int m = 0; m <= b.N; ++m) {
            for (int n = 0; n <= b.n_max; ++n) {
                state_.amplitudes[b.flatten(m, n)] *= std::polar(1.0, sign * delta * t * n);
            }
        }
        double angle = std::fmod(-sign * omega * t, 4.0 * kPi);
        state_ = krylov::apply_rotation(state_, RotationPulse{'x', angle, true}, opts_.kry);
    }

    const SpinBosonState& state() const { return state_; }
    SpinMoments moments() { return cache_.eval(state_); }

    krylov::KrylovDiagnostics diag;

private:
    SpinBosonState state_;
    ExactOptions opts_;
    MomentsCache cache_;
};

hilbert::CouplingParams snt_segment1(double delta_over_g) {
    return {1.0, delta_over_g, delta_over_g, 1.0};
}

hilbert::CouplingParams snt_segment2(double delta_over_g, const QuenchConvention& q) {
    hilbert::CouplingParams p{1.0, delta_over_g, delta_over_g, 1.0};
    if (q.flip_omega) p.omega = -p.omega;
    if (q.flip_g) p.sign_g = -1.0;
    return p;
}

SpinBosonState initial_ion_state(int N, const ExactOptions& opts) {
    hilbert::DickeFockBasis basis(N, opts.n_max_init);
    return hilbert::coherent_spin_state(basis, hilbert::SpinDirection::PlusX);
}

} // namespace

SpinMoments moments_from_state(const SpinBosonState& state) {
    MomentsCache cache;
    return cache.eval(state);
}

ProtocolSchedule make_snt_schedule(double delta_over_g, double t_sq, double t_tr,
                                   const QuenchConvention& q) {
    ProtocolSchedule sched;
    sched.segments.push_back({t_sq, snt_segment1(delta_over_g), HamiltonianKind::Dicke, {}});
    sched.segments.push_back({t_tr, snt_segment2(delta_over_g, q), HamiltonianKind::Dicke, {}});
    return sched;
}

SqueezingResult run_snt_ion(int N, double delta_over_g, double t_sq, double t_tr,
                            const ExactOptions& opts) {
    if (t_sq < 0.0 || t_tr < 0.0) throw ConfigError("run_snt_ion: negative protocol time");
    SegmentEvolver ev(initial_ion_state(N, opts), opts);
    ev.evolve(snt_segment1(delta_over_g), t_sq);
    ev.evolve(snt_segment2(delta_over_g, opts.quench), t_tr);
    SqueezingResult r = squeezing_parameter(ev.moments(), N, MeanAxis::X);
    r.times["t_sq"] = t_sq;
    r.times["t_tr"] = t_tr;
    return r;
}

SqueezingMap optimize_snt(int N, double delta_over_g, const std::vector<double>& t_sq_grid,
                          const std::vector<double>& t_tr_grid, const ExactOptions& opts,
                          int threads) {
    if (t_sq_grid.empty() || t_tr_grid.empty()) throw ConfigError("optimize_snt: empty grid");
    if (!std::is_sorted(t_sq_grid.begin(), t_sq_grid.end()) ||
        !std::is_sorted(t_tr_grid.begin(), t_tr_grid.end())) {
        throw ConfigError("optimize_snt: grids must be ascending");
    }

    const std::size_t ns = t_sq_grid.size(), nt = t_tr_grid.size();

    // forward pass along the squeezing segment, snapshotting each grid point
    std::vector<SpinBosonState> snapshots;
    snapshots.reserve(ns);
    {
        SegmentEvolver ev(initial_ion_state(N, opts), opts);
        double prev = 0.0;
        for (double t_sq : t_sq_grid) {
            ev.evolve(snt_segment1(delta_over_g), t_sq - prev);
            prev = t_sq;
            snapshots.push_back(ev.state());
        }
    }

    SqueezingMap map;
    map.t_sq = t_sq_grid;
    map.t_tr = t_tr_grid;
    map.xi2.resize(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nt));

    // transfer segment: one continuation per t_sq cell, parallel across cells
    const auto seg2 = snt_segment2(delta_over_g, opts.quench);
    sweep::parallel_for(ns, threads, [&](std::size_t i) {
        SegmentEvolver ev(snapshots[i], opts);
        double prev = 0.0;
        for (std::size_t j = 0; j < nt; ++j) {
            ev.evolve(seg2, t_tr_grid[j] - prev);
            prev = t_tr_grid[j];
            const auto r = squeezing_parameter(ev.moments(), N, MeanAxis::X);
            map.xi2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.xi2;
        }
    });

    map.marginal_xi2.resize(ns);
    map.marginal_t_tr.resize(ns);
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < ns; ++i) {
        double row_best = std::numeric_limits<double>::infinity();
        std::size_t row_j = 0;
        for (std::size_t j = 0; j < nt; ++j) {
            const double x = map.xi2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (x < row_best) {
                row_best = x;
                row_j = j;
            }
        }
        map.marginal_xi2[i] = row_best;
        map.marginal_t_tr[i] = t_tr_grid[row_j];
        if (row_best < best) {
            best = row_best;
            bi = i;
            bj = row_j;
        }
    }
    map.best = run_snt_ion(N, delta_over_g, t_sq_grid[bi], t_tr_grid[bj], opts);
    return map;
}

// --------------------------------------------------------- stroboscopic OAT

OatScan run_oat_stroboscopic(int N, const std::vector<double>& T_grid, double delta_min,
                             double delta_max, int max_candidates, const ExactOptions& opts,
                             int threads) {
    struct Task {
        double T;
        int n;
        double delta;
    };
    std::vector<Task> tasks;
    for (double T : T_grid) {
        const int n_lo = std::max(1, static_cast<int>(std::ceil(delta_min * T / (2.0 * kPi))));
        const int n_hi = static_cast<int>(std::floor(delta_max * T / (2.0 * kPi)));
        if (n_hi < n_lo) continue;
        const int count = n_hi - n_lo + 1;
        const int keep = std::min(count, std::max(1, max_candidates));
        for (int k = 0; k < keep; ++k) {
            const int n = n_lo + (count - 1) * k / std::max(1, keep - 1);
            if (k > 0 && n == n_lo + (count - 1) * (k - 1) / std::max(1, keep - 1)) continue;
            tasks.push_back({T, n, 2.0 * kPi * n / T});
        }
    }

    std::vector<double> xi2(tasks.size());
    sweep::parallel_for(tasks.size(), threads, [&](std::size_t i) {
        ExactOptions o = opts;
        o.n_max_init = std::min(o.n_max_init, 8);
        SegmentEvolver ev(initial_ion_state(N, o), o);
        ev.evolve({1.0, tasks[i].delta, 0.0, 1.0}, tasks[i].T);
        xi2[i] = squeezing_parameter(ev.moments(), N, MeanAxis::X).xi2;
    });

    OatScan scan;
    scan.best.xi2 = std::numeric_limits<double>::infinity();
    for (double T : T_grid) {
        OatPoint p;
        p.T = T;
        p.xi2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (tasks[i].T == T && xi2[i] < p.xi2) {
                p.xi2 = xi2[i];
                p.delta_over_g = tasks[i].delta;
                p.n_strobe = tasks[i].n;
            }
        }
        if (!std::isfinite(p.xi2)) continue;
        p.db = to_db(p.xi2);
        scan.points.push_back(p);
        if (p.xi2 < scan.best.xi2) scan.best = p;
    }
    return scan;
}

// ------------------------------------------------------------ time reversal

namespace {

hilbert::CouplingParams reversal_forward(double delta_over_g) {
    return {1.0, delta_over_g, delta_over_g, 1.0};
}

// backward window runs the fully negated Hamiltonian (detuning, drive and
// coupling signs are all tunable), realizing exact time reversal
hilbert::CouplingParams reversal_backward(double delta_over_g) {
    return {1.0, -delta_over_g, -delta_over_g, -1.0};
}

struct SyStats {
    double mean, var;
};

SyStats sy_stats(SegmentEvolver& ev) {
    const auto m = ev.moments();
    return {m.mean[1], m.second(1, 1) - m.mean[1] * m.mean[1]};
}

// The protocol is defined in the interaction picture of H0 = δa†a + ΩSx.
// Between the windows we apply exp(−iH0·T2)·Rz(φ)·exp(+iH0·T1): the frame
// accumulated forward is unwound, the phase rotation acts in the rotated
// basis, and the frame for the reversed window is pre-loaded so that the
// composition collapses to the interaction-picture protocol exactly.
SpinBosonState start_backward_branch(const SpinBosonState& fwd, double delta_over_g,
                                     double T1, double T2, double phi,
                                     const ExactOptions& opts) {
    SegmentEvolver ev(fwd, opts);
    ev.apply_frame(delta_over_g, delta_over_g, T1, +1);
    ev.rotate_z(phi);
    ev.apply_frame(delta_over_g, delta_over_g, T2, -1);
    return ev.state();
}

} // namespace

ReversalObservables run_time_reversal(int N, double delta_over_g, double T1, double T2,
                                      double phi, const ExactOptions& opts) {
    SegmentEvolver fwd(initial_ion_state(N, opts), opts);
    fwd.evolve(reversal_forward(delta_over_g), T1);
    SegmentEvolver ev(start_backward_branch(fwd.state(), delta_over_g, T1, T2, phi, opts),
                      opts);
    ev.evolve(reversal_backward(delta_over_g), T2);
    const auto s = sy_stats(ev);
    return {s.mean, s.var};
}

namespace {

SensitivityResult sensitivity_from(double sy0, double var0, double sy_plus, double sy_minus,
                                   double dphi, int N, double T1, double T2) {
    SensitivityResult r;
    r.T1 = T1;
    r.T2 = T2;
    r.mean_sy = sy0;
    r.var_sy = var0;
    r.slope = (sy_plus - sy_minus) / (2.0 * dphi);
    if (std::abs(r.slope) < 1e-12 * N) {
        throw ZeroSlopeError("estimate_sensitivity: |slope| below threshold");
    }
    r.dphi2 = r.var_sy / (r.slope * r.slope);
    r.gain = 1.0 / (N * r.dphi2);
    r.db = 10.0 * std::log10(r.gain);
    return r;
}

} // namespace

SensitivityResult estimate_sensitivity(int N, double delta_over_g, double T1, double T2,
                                       double dphi, const ExactOptions& opts) {
    SegmentEvolver fwd(initial_ion_state(N, opts), opts);
    fwd.evolve(reversal_forward(delta_over_g), T1);

    const double phis[3] = {0.0, dphi, -dphi};
    SyStats stats[3];
    for (int k = 0; k < 3; ++k) {
        SegmentEvolver ev(
            start_backward_branch(fwd.state(), delta_over_g, T1, T2, phis[k], opts), opts);
        ev.evolve(reversal_backward(delta_over_g), T2);
        stats[k] = sy_stats(ev);
    }
    return sensitivity_from(stats[0].mean, stats[0].var, stats[1].mean, stats[2].mean, dphi, N,
                            T1, T2);
}

std::vector<ReversalScanPoint> reversal_scan(int N, double delta_over_g,
                                             const std::vector<double>& T1_grid,
                                             const std::vector<double>& T2_grid,
                                             double dphi, const ExactOptions& opts,
                                             int threads) {
    if (!std::is_sorted(T1_grid.begin(), T1_grid.end()) ||
        !std::is_sorted(T2_grid.begin(), T2_grid.end())) {
        throw ConfigError("reversal_scan: grids must be ascending");
    }
    const std::size_t n1 = T1_grid.size(), n2 = T2_grid.size();

    std::vector<SpinBosonState> forward;
    forward.reserve(n1);
    {
        SegmentEvolver ev(initial_ion_state(N, opts), opts);
        double prev = 0.0;
        for (double t1 : T1_grid) {
            ev.evolve(reversal_forward(delta_over_g), t1 - prev);
            prev = t1;
            forward.push_back(ev.state());
        }
    }

    // (T1, T2, φ) tasks; the backward frame pre-load depends on T2, so each
    // grid point runs its own reversed window
    const double phis[3] = {0.0, dphi, -dphi};
    std::vector<SyStats> stats(n1 * n2 * 3);
    sweep::parallel_for(n1 * n2 * 3, threads, [&](std::size_t task) {
        const std::size_t i = task / (n2 * 3);
        const std::size_t j = (task / 3) % n2;
        const int k = static_cast<int>(task % 3);
        SegmentEvolver ev(start_backward_branch(forward[i], delta_over_g, T1_grid[i],
                                                T2_grid[j], phis[k], opts),
                          opts);
        ev.evolve(reversal_backward(delta_over_g), T2_grid[j]);
        stats[task] = sy_stats(ev);
    });

    std::vector<ReversalScanPoint> out;
    out.reserve(n1 * n2);
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            const std::size_t base = (i * n2 + j) * 3;
            ReversalScanPoint p;
            p.T1 = T1_grid[i];
            p.T2 = T2_grid[j];
            try {
                p.sens = sensitivity_from(stats[base].mean, stats[base].var,
                                          stats[base + 1].mean, stats[base + 2].mean, dphi, N,
                                          p.T1, p.T2);
            } catch (const ZeroSlopeError&) {
                p.sens.T1 = p.T1;
                p.sens.T2 = p.T2;
                p.sens.dphi2 = std::numeric_limits<double>::infinity();
                p.sens.gain = 0.0;
                p.sens.db = -std::numeric_limits<double>::infinity();
            }
            out.push_back(p);
        }
    }
    return out;
}

std::vector<ReversalScanPoint> reversal_scan_equal(int N, double delta_over_g,
                                                   const std::vector<double>& T1_grid,
                                                   double dphi, const ExactOptions& opts,
                                                   int threads) {
    if (!std::is_sorted(T1_grid.begin(), T1_grid.end())) {
        throw ConfigError("reversal_scan_equal: grid must be ascending");
    }
    const std::size_t n1 = T1_grid.size();
    std::vector<SpinBosonState> forward;
    forward.reserve(n1);
    {
        SegmentEvolver ev(initial_ion_state(N, opts), opts);
        double prev = 0.0;
        for (double t1 : T1_grid) {
            ev.evolve(reversal_forward(delta_over_g), t1 - prev);
            prev = t1;
            forward.push_back(ev.state());
        }
    }

    const double phis[3] = {0.0, dphi, -dphi};
    std::vector<std::array<SyStats, 3>> stats(n1);
    sweep::parallel_for(n1 * 3, threads, [&](std::size_t task) {
        const std::size_t i = task / 3;
        const int k = static_cast<int>(task % 3);
        SegmentEvolver ev(start_backward_branch(forward[i], delta_over_g, T1_grid[i],
                                                T1_grid[i], phis[k], opts),
                          opts);
        ev.evolve(reversal_backward(delta_over_g), T1_grid[i]);
        stats[i][static_cast<std::size_t>(k)] = sy_stats(ev);
    });

    std::vector<ReversalScanPoint> out;
    out.reserve(n1);
    for (std::size_t i = 0; i < n1; ++i) {
        ReversalScanPoint p;
        p.T1 = p.T2 = T1_grid[i];
        p.sens = sensitivity_from(stats[i][0].mean, stats[i][0].var, stats[i][1].mean,
                                  stats[i][2].mean, dphi, N, p.T1, p.T2);
        out.push_back(p);
    }
    return out;
}

SensitivityResult ideal_reversal_sensitivity(double G, double T1, double T2, double N) {
    SensitivityResult r;
    r.T1 = T1;
    r.T2 = T2;
    r.var_sy = N * std::cosh(2.0 * G * (T1 - T2)) / 4.0;
    r.slope = 0.5 * N * std::cosh(G * T2);
    r.dphi2 = r.var_sy / (r.slope * r.slope);
    r.gain = 1.0 / (N * r.dphi2);
    r.db = 10.0 * std::log10(r.gain);
    return r;
}

UnequalOptimum ideal_unequal_optimum(double G, double T) {
    UnequalOptimum u;
    u.dT_opt = std::log(3.0) / (4.0 * G);
    u.n_dphi2 = 2.0 * (std::pow(3.0, -0.75) + std::pow(3.0, 0.25)) * std::exp(-G * T);
    return u;
}

// ------------------------------------------------------- cavity OAT / TnT --

CavityAnalytics cavity_oat_tnt_analytics(double C, double N) {
    const double cn = C * N;
    if (cn <= 0.0) throw ConfigError("cavity_oat_tnt_analytics: need C*N > 0");
    return {6.0 * std::pow(cn, -1.0 / 3.0), 4.6 / std::sqrt(cn)};
}

// ------------------------------------------------------------ twist & turn

namespace {

struct TnTParams {
    double chi, Gamma, gamma, N;
};

TnTState tnt_rhs(const TnTState& y, const TnTParams& p) {
    const double chiN = p.chi * p.N;
    const cplx i1(0.0, 1.0);
    const cplx G2 = p.Gamma - 2.0 * i1 * p.chi;
    const cplx A = G2 * std::conj(y.s_mf) + i1 * 0.5 * chiN;

    TnTState d;
    d.s_mf = i1 * 0.5 * chiN * y.z_mf + G2 * y.s_mf * y.z_mf - 0.5 * p.gamma * y.s_mf;
    d.z_mf = -0.5 * chiN * y.s_mf.imag() - p.Gamma * std::norm(y.s_mf) -
             p.gamma * (y.z_mf + 0.5 * p.N);
    d.pp = A * (2.0 * y.pz + y.s_mf) + (2.0 * G2 * y.z_mf - p.gamma) * y.pp;
    d.pm = 2.0 * (((p.Gamma + 2.0 * i1 * p.chi) * y.s_mf - i1 * 0.5 * chiN) * y.pz).real() +
           (2.0 * p.Gamma * y.z_mf - p.gamma) * y.pm;
    d.pz = A * y.zz + (G2 * y.z_mf - 1.5 * p.gamma) * y.pz +
           (i1 * 0.25 * chiN - p.Gamma * y.s_mf) * y.pp -
           (p.Gamma * std::conj(y.s_mf) + i1 * 0.25 * chiN) * y.pm;
    d.zz = -chiN * (y.pz + 0.5 * std::conj(y.s_mf)).imag() -
           4.0 * p.Gamma * (y.pz * std::conj(y.s_mf)).real() - 2.0 * p.gamma * y.zz +
           p.gamma * (y.z_mf + 0.5 * p.N) - p.Gamma * std::norm(y.s_mf);
    return d;
}

TnTState tnt_axpy(const TnTState& y, double h, const TnTState& d) {
    return {y.s_mf + h * d.s_mf, y.z_mf + h * d.z_mf, y.pp + h * d.pp,
            y.pm + h * d.pm,     y.pz + h * d.pz,     y.zz + h * d.zz};
}

// ξ² from the covariance of (Sx, Sy, Sz) fluctuations projected onto the
// plane orthogonal to the mean-field vector, normalized by |v|²/N.
double tnt_xi2(const TnTState& y, double N) {
    const double mxx = 0.5 * (y.pm.real() + y.pp.real() - y.z_mf);
    const double myy = 0.5 * (y.pm.real() - y.pp.real() - y.z_mf);
    const double mxy = 0.5 * y.pp.imag();
    const cplx pz_s = y.pz + 0.5 * std::conj(y.s_mf);
    const double mzx = pz_s.real();
    const double mzy = pz_s.imag();
    const double mzz = y.zz.real();

    Eigen::Matrix3d M;
    M << mxx, mxy, mzx,
         mxy, myy, mzy,
         mzx, mzy, mzz;

    Eigen::Vector3d v(y.s_mf.real(), y.s_mf.imag(), y.z_mf);
    const double vn = v.norm();
    if (vn < 1e-6 * 0.5 * N) {
        throw MeanFieldCollapseError("tnt_moment_solver: mean field length below threshold");
    }
    const Eigen::Vector3d n = v / vn;

    // orthonormal transverse pair
    Eigen::Vector3d e1 = n.unitOrthogonal();
    Eigen::Vector3d e2 = n.cross(e1);
    const double a = e1.dot(M * e1);
    const double b = e2.dot(M * e2);
    const double c = e1.dot(M * e2);
    const double lam_min = 0.5 * (a + b) - std::sqrt(0.25 * (a - b) * (a - b) + c * c);
    return N * lam_min / (vn * vn);
}

} // namespace

TnTSeries tnt_moment_solver(double NC, double eta, double tau_max, double dtau,
                            double N_reference) {
    if (eta <= 0.0 || NC <= 0.0) throw ConfigError("tnt_moment_solver: need eta, NC > 0");
    if (dtau <= 0.0 || tau_max <= 0.0) {
        throw ConfigError("tnt_moment_solver: need positive tau range");
    }

    TnTParams p;
    p.N = N_reference;
    p.chi = 1.0 / p.N; // χN = 1 so t = τ
    p.Gamma = eta * p.chi;
    p.gamma = (eta + 4.0 / eta) / NC; // γ/(χN)

    TnTState y;
    y.s_mf = 0.5 * p.N;
    y.z_mf = 0.0;
    y.pp = -0.25 * p.N;
    y.pm = 0.25 * p.N;
    y.pz = -0.25 * p.N;
    y.zz = 0.25 * p.N;

    TnTSeries series;
    series.xi2_min = std::numeric_limits<double>::infinity();
    series.tau_min = 0.0;

    double tau = 0.0;
    const long steps = std::lround(std::ceil(tau_max / dtau - 1e-12));
    auto record = [&](double t, const TnTState& s) {
        const double xi2 = tnt_xi2(s, p.N);
        series.tau.push_back(t);
        series.xi2.push_back(xi2);
        series.states.push_back(s);
        if (xi2 < series.xi2_min) {
            series.xi2_min = xi2;
            series.tau_min = t;
        }
    };
    record(0.0, y);
    for (long i = 0; i < steps; ++i) {
        const double h = std::min(dtau, tau_max - tau);
        const TnTState k1 = tnt_rhs(y, p);
        const TnTState k2 = tnt_rhs(tnt_axpy(y, 0.5 * h, k1), p);
        const TnTState k3 = tnt_rhs(tnt_axpy(y, 0.5 * h, k2), p);
        const TnTState k4 = tnt_rhs(tnt_axpy(y, h, k3), p);
        y.s_mf += h / 6.0 * (k1.s_mf + 2.0 * k2.s_mf + 2.0 * k3.s_mf + k4.s_mf);
        y.z_mf += h / 6.0 * (k1.z_mf + 2.0 * k2.z_mf + 2.0 * k3.z_mf + k4.z_mf);
        y.pp += h / 6.0 * (k1.pp + 2.0 * k2.pp + 2.0 * k3.pp + k4.pp);
        y.pm += h / 6.0 * (k1.pm + 2.0 * k2.pm + 2.0 * k3.pm + k4.pm);
        y.pz += h / 6.0 * (k1.pz + 2.0 * k2.pz + 2.0 * k3.pz + k4.pz);
        y.zz += h / 6.0 * (k1.zz + 2.0 * k2.zz + 2.0 * k3.zz + k4.zz);
        tau += h;
        record(tau, y);
    }
    return series;
}

TnTOptimum tnt_optimize(double NC, const std::vector<double>& eta_grid, double tau_max,
                        double dtau, int threads) {
    if (eta_grid.empty()) throw ConfigError("tnt_optimize: empty eta grid");
    std::vector<double> best_xi2(eta_grid.size());
    std::vector<double> best_tau(eta_grid.size());
    sweep::parallel_for(eta_grid.size(), threads, [&](std::size_t i) {
        const auto series = tnt_moment_solver(NC, eta_grid[i], tau_max, dtau);
        best_xi2[i] = series.xi2_min;
        best_tau[i] = series.tau_min;
    });

    TnTOptimum opt;
    opt.xi2_opt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < eta_grid.size(); ++i) {
        if (best_xi2[i] < opt.xi2_opt) {
            opt.xi2_opt = best_xi2[i];
            opt.eta_opt = eta_grid[i];
            opt.tau_opt = best_tau[i];
        }
    }
    opt.delta_over_kappa_opt = 1.0 / opt.eta_opt;
    return opt;
}

TnTOptimum tnt_fixed_detuning(double NC, double tau_max, double dtau) {
    const double eta = 1.0 / (1.1 * std::sqrt(NC));
    const auto series = tnt_moment_solver(NC, eta, tau_max, dtau);
    TnTOptimum opt;
    opt.xi2_opt = series.xi2_min;
    opt.eta_opt = eta;
    opt.tau_opt = series.tau_min;
    opt.delta_over_kappa_opt = 1.0 / eta;
    return opt;
}

} // namespace sqz::protocols
