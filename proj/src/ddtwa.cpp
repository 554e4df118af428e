#include "sqz/ddtwa.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "sqz/rng.hpp"
#include "sqz/sweep.hpp"

namespace sqz::ddtwa {

ClassicalState sample_initial(int N, std::uint64_t seed, std::uint64_t trajectory,
                              double boson_quadrature_var) {
    rng::CounterStream init(seed ^ 0xa5a5a5a5ULL, trajectory);
    ClassicalState s(N);
    const double sd = std::sqrt(boson_quadrature_var);
    s.alpha = cplx(sd * init.normal(0), sd * init.normal(1));
    for (int i = 0; i < N; ++i) {
        s.sx[i] = 0.5;
        s.sy[i] = init.coin(4 + 2 * static_cast<std::uint64_t>(i)) ? 0.5 : -0.5;
        s.sz[i] = init.coin(5 + 2 * static_cast<std::uint64_t>(i)) ? 0.5 : -0.5;
    }
    return s;
}

void drift(const ClassicalState& s, const SdeParams& p, ClassicalState& out) {
    const int N = s.size();
    out.sx.resize(N);
    out.sy.resize(N);
    out.sz.resize(N);

    const double g2 = 2.0 * p.coupling.g * p.coupling.sign_g / std::sqrt(static_cast<double>(N));
    const double omega = p.coupling.omega;
    double sz_sum = 0.0;
    for (int i = 0; i < N; ++i) sz_sum += s.sz[i];

    out.alpha = cplx(0.0, -1.0) * (p.coupling.delta * s.alpha + g2 * sz_sum);
    const double bz = g2 * 2.0 * s.alpha.real(); // g-field along z: (2g/√N)(α+α*)
    for (int i = 0; i < N; ++i) {
        out.sx[i] = -bz * s.sy[i];
        out.sy[i] = bz * s.sx[i] - omega * s.sz[i];
        out.sz[i] = omega * s.sy[i];
    }
}

void noise_increment(const ClassicalState& s, const SdeParams& p,
                     const std::vector<double>& dW, ClassicalState& out) {
    const int N = s.size();
    out.sx.assign(N, 0.0);
    out.sy.assign(N, 0.0);
    out.sz.assign(N, 0.0);
    out.alpha = cplx(0.0, 0.0); // no noise on the boson

    const double cp = std::sqrt(2.0 * p.rates.gamma_plus);
    const double cz = std::sqrt(p.rates.gamma_z);
    for (int i = 0; i < N; ++i) {
        const double wx = dW[3 * i], wy = dW[3 * i + 1], wz = dW[3 * i + 2];
        if (cp != 0.0) {
            out.sx[i] += cp * s.sz[i] * wy;
            out.sy[i] += -cp * s.sz[i] * wx;
            out.sz[i] += cp * (s.sy[i] * wx - s.sx[i] * wy);
        }
        if (cz != 0.0) {
            out.sx[i] += -cz * s.sy[i] * wz;
            out.sy[i] += cz * s.sx[i] * wz;
        }
    }
}

namespace {

struct StepWorkspace {
    ClassicalState ybar, ynext, f, gw;
};

int midpoint_step(ClassicalState& s, const SdeParams& p, const std::vector<double>& dW,
                  double dt, double fp_tol, int fp_max_iter, StepWorkspace& w) {
    const int N = s.size();
    const bool has_noise = !dW.empty();
    w.ybar = s;

    int iter = 0;
    while (true) {
        ++iter;
        drift(w.ybar, p, w.f);
        if (has_noise) noise_increment(w.ybar, p, dW, w.gw);

        w.ynext.sx.resize(N);
        w.ynext.sy.resize(N);
        w.ynext.sz.resize(N);
        w.ynext.alpha = s.alpha + dt * w.f.alpha + (has_noise ? w.gw.alpha : cplx(0.0));
        for (int i = 0; i < N; ++i) {
            w.ynext.sx[i] = s.sx[i] + dt * w.f.sx[i] + (has_noise ? w.gw.sx[i] : 0.0);
            w.ynext.sy[i] = s.sy[i] + dt * w.f.sy[i] + (has_noise ? w.gw.sy[i] : 0.0);
            w.ynext.sz[i] = s.sz[i] + dt * w.f.sz[i] + (has_noise ? w.gw.sz[i] : 0.0);
        }

        double delta = std::abs(0.5 * (s.alpha + w.ynext.alpha) - w.ybar.alpha);
        for (int i = 0; i < N; ++i) {
            delta = std::max(delta, std::abs(0.5 * (s.sx[i] + w.ynext.sx[i]) - w.ybar.sx[i]));
            delta = std::max(delta, std::abs(0.5 * (s.sy[i] + w.ynext.sy[i]) - w.ybar.sy[i]));
            delta = std::max(delta, std::abs(0.5 * (s.sz[i] + w.ynext.sz[i]) - w.ybar.sz[i]));
        }
        w.ybar.alpha = 0.5 * (s.alpha + w.ynext.alpha);
        for (int i = 0; i < N; ++i) {
            w.ybar.sx[i] = 0.5 * (s.sx[i] + w.ynext.sx[i]);
            w.ybar.sy[i] = 0.5 * (s.sy[i] + w.ynext.sy[i]);
            w.ybar.sz[i] = 0.5 * (s.sz[i] + w.ynext.sz[i]);
        }
        if (delta <= fp_tol) break;
        if (iter >= fp_max_iter) {
            throw FixedPointDivergenceError(
                "step_implicit_midpoint: fixed point did not converge (dt too large?)");
        }
    }
    s = w.ynext;
    return iter;
}

} // namespace

int step_implicit_midpoint(ClassicalState& s, const SdeParams& p, const std::vector<double>& dW,
                           double dt, double fp_tol, int fp_max_iter) {
    thread_local StepWorkspace w;
    return midpoint_step(s, p, dW, dt, fp_tol, fp_max_iter, w);
}

namespace {

void apply_pulse(ClassicalState& s, const RotationPulse& pulse) {
    const double c = std::cos(pulse.angle), sn = std::sin(pulse.angle);
    for (int i = 0; i < s.size(); ++i) {
        double x = s.sx[i], y = s.sy[i], z = s.sz[i];
        switch (pulse.axis) {
            case 'z':
                s.sx[i] = c * x + sn * y;
                s.sy[i] = -sn * x + c * y;
                break;
            case 'x':
                s.sy[i] = c * y + sn * z;
                s.sz[i] = -sn * y + c * z;
                break;
            case 'y':
                s.sz[i] = c * z + sn * x;
                s.sx[i] = -sn * z + c * x;
                break;
            default:
                throw ConfigError("ddtwa: unknown pulse axis");
        }
    }
}

constexpr int kMomentFields = 11; // Sx,Sy,Sz, XX,YY,ZZ,XY,YZ,ZX, |α|², fp_iters

void collect_moments(const ClassicalState& s, double* out) {
    double jx = 0.0, jy = 0.0, jz = 0.0;
    for (int i = 0; i < s.size(); ++i) {
        jx += s.sx[i];
        jy += s.sy[i];
        jz += s.sz[i];
    }
    out[0] = jx;
    out[1] = jy;
    out[2] = jz;
    out[3] = jx * jx;
    out[4] = jy * jy;
    out[5] = jz * jz;
    out[6] = jx * jy;
    out[7] = jy * jz;
    out[8] = jz * jx;
    out[9] = std::norm(s.alpha);
}

// pairwise sum over the trajectory axis for reproducible, drift-controlled
// reduction at any thread count
void pairwise_reduce(const std::vector<double>& data, std::size_t n_traj, std::size_t stride,
                     std::size_t lo, std::size_t hi, double* out) {
    if (hi - lo == 1) {
        for (std::size_t k = 0; k < stride; ++k) out[k] = data[lo * stride + k];
        return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<double> left(stride), right(stride);
    pairwise_reduce(data, n_traj, stride, lo, mid, left.data());
    pairwise_reduce(data, n_traj, stride, mid, hi, right.data());
    for (std::size_t k = 0; k < stride; ++k) out[k] = left[k] + right[k];
}

protocols::SpinMoments moments_from_sums(const double* sums, double inv_n) {
    protocols::SpinMoments m;
    m.mean = Eigen::Vector3d(sums[0], sums[1], sums[2]) * inv_n;
    m.second(0, 0) = sums[3] * inv_n;
    m.second(1, 1) = sums[4] * inv_n;
    m.second(2, 2) = sums[5] * inv_n;
    m.second(0, 1) = m.second(1, 0) = sums[6] * inv_n;
    m.second(1, 2) = m.second(2, 1) = sums[7] * inv_n;
    m.second(2, 0) = m.second(0, 2) = sums[8] * inv_n;
    return m;
}

double xi2_or_nan(const protocols::SpinMoments& m, int N) {
    try {
        return protocols::squeezing_parameter(m, N, protocols::MeanAxis::X).xi2;
    } catch (const ZeroContrastError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace

EnsembleStats run_ensemble(int N, const ProtocolSchedule& schedule, const SdeParams& params,
                           const SdeConfig& cfg, const std::vector<double>& sample_times) {
    schedule.validate();
    if (cfg.n_traj < 1 || cfg.dt <= 0.0) throw ConfigError("run_ensemble: bad SdeConfig");

    const bool need_xy = params.rates.gamma_plus > 0.0;
    const bool need_z = params.rates.gamma_z > 0.0;
    const bool has_noise = need_xy || need_z;

    const std::size_t n_samples = sample_times.size();
    const std::size_t n_traj = static_cast<std::size_t>(cfg.n_traj);

    // per-trajectory moment sums at each sample time
    std::vector<double> table(n_traj * n_samples * kMomentFields, 0.0);
    std::atomic<long> fp_total_all{0};
    std::atomic<int> fp_max_all{0};

    sweep::parallel_for(n_traj, cfg.threads, [&](std::size_t traj) {
        ClassicalState s =
            sample_initial(N, cfg.seed, traj, cfg.boson_quadrature_var);
        rng::CounterStream noise(cfg.seed, traj);
        StepWorkspace w;
        std::vector<double> dW(has_noise ? 3 * static_cast<std::size_t>(N) : 0, 0.0);

        long fp_total = 0;
        int fp_max = 0;
        std::uint64_t step_index = 0;
        std::size_t sample_idx = 0;
        double t = 0.0;
        const double sqrt_dt_cache = std::sqrt(cfg.dt);

        auto record_due = [&](double t_now) {
            while (sample_idx < n_samples && sample_times[sample_idx] <= t_now + 1e-9 * cfg.dt) {
                double* row = &table[(traj * n_samples + sample_idx) * kMomentFields];
                collect_moments(s, row);
                row[10] = static_cast<double>(fp_max);
                ++sample_idx;
            }
        };
        record_due(t);

        SdeParams seg_params = params;
        for (const auto& seg : schedule.segments) {
            if (seg.pre_pulse) apply_pulse(s, *seg.pre_pulse);
            seg_params.coupling = seg.params;
            double remaining = seg.duration;
            while (remaining > 1e-12 * cfg.dt) {
                const double h = std::min(cfg.dt, remaining);
                if (has_noise) {
                    const double sdt = (h == cfg.dt) ? sqrt_dt_cache : std::sqrt(h);
                    for (int i = 0; i < N; ++i) {
                        const std::uint64_t base =
                            (step_index * static_cast<std::uint64_t>(N) +
                             static_cast<std::uint64_t>(i)) * 3;
                        dW[3 * i] = need_xy ? sdt * noise.normal(base) : 0.0;
                        dW[3 * i + 1] = need_xy ? sdt * noise.normal(base + 1) : 0.0;
                        dW[3 * i + 2] = need_z ? sdt * noise.normal(base + 2) : 0.0;
                    }
                }
                const int iters = midpoint_step(s, seg_params, dW, h, cfg.fp_tol,
                                                cfg.fp_max_iter, w);
                fp_total += iters;
                fp_max = std::max(fp_max, iters);
                ++step_index;
                remaining -= h;
                t += h;
                record_due(t);
            }
        }
        record_due(t + cfg.dt); // catch a final sample at the protocol end
        if (sample_idx < n_samples) {
            throw ConfigError("run_ensemble: sample time beyond schedule duration");
        }
        fp_total_all.fetch_add(fp_total, std::memory_order_relaxed);
        int expect = fp_max_all.load(std::memory_order_relaxed);
        while (fp_max > expect && !fp_max_all.compare_exchange_weak(expect, fp_max)) {}
    });

    // deterministic pairwise reduction over trajectories
    EnsembleStats stats;
    stats.times = sample_times;
    stats.n_traj = cfg.n_traj;
    stats.fp_iters_total = fp_total_all.load();
    stats.fp_iters_max = fp_max_all.load();
    const double inv_n = 1.0 / static_cast<double>(n_traj);

    const int blocks = std::max(1, std::min<int>(cfg.jackknife_blocks,
                                                 static_cast<int>(n_traj)));
    std::vector<double> block_sums(static_cast<std::size_t>(blocks) * kMomentFields);

    for (std::size_t si = 0; si < n_samples; ++si) {
        // gather this sample's rows contiguously per trajectory
        std::vector<double> rows(n_traj * kMomentFields);
        for (std::size_t tr = 0; tr < n_traj; ++tr) {
            const double* src = &table[(tr * n_samples + si) * kMomentFields];
            std::copy(src, src + kMomentFields, &rows[tr * kMomentFields]);
        }
        std::vector<double> total(kMomentFields, 0.0);
        pairwise_reduce(rows, n_traj, kMomentFields, 0, n_traj, total.data());

        const auto m = moments_from_sums(total.data(), inv_n);
        stats.moments.push_back(m);
        stats.alpha_abs2.push_back(total[9] * inv_n);
        stats.xi2.push_back(xi2_or_nan(m, N));

        // jackknife over trajectory blocks
        std::fill(block_sums.begin(), block_sums.end(), 0.0);
        for (std::size_t tr = 0; tr < n_traj; ++tr) {
            const std::size_t b = tr * static_cast<std::size_t>(blocks) / n_traj;
            for (int k = 0; k < kMomentFields; ++k) {
                block_sums[b * kMomentFields + k] += rows[tr * kMomentFields + k];
            }
        }
        double xi2_sum = 0.0, xi2_sq = 0.0;
        double mean_sum[3] = {0, 0, 0}, mean_sq[3] = {0, 0, 0};
        int valid = 0;
        for (int b = 0; b < blocks; ++b) {
            const std::size_t lo = static_cast<std::size_t>(b) * n_traj / blocks;
            const std::size_t hi = static_cast<std::size_t>(b + 1) * n_traj / blocks;
            const double n_left = static_cast<double>(n_traj - (hi - lo));
            if (n_left <= 0) continue;
            double leave[kMomentFields];
            for (int k = 0; k < kMomentFields; ++k) {
                leave[k] = (total[k] - block_sums[static_cast<std::size_t>(b) * kMomentFields + k]) / n_left;
            }
            protocols::SpinMoments mb;
            mb.mean = Eigen::Vector3d(leave[0], leave[1], leave[2]);
            mb.second(0, 0) = leave[3];
            mb.second(1, 1) = leave[4];
            mb.second(2, 2) = leave[5];
            mb.second(0, 1) = mb.second(1, 0) = leave[6];
            mb.second(1, 2) = mb.second(2, 1) = leave[7];
            mb.second(2, 0) = mb.second(0, 2) = leave[8];
            const double xb = xi2_or_nan(mb, N);
            if (std::isfinite(xb)) {
                xi2_sum += xb;
                xi2_sq += xb * xb;
                ++valid;
            }
            for (int k = 0; k < 3; ++k) {
                mean_sum[k] += leave[k];
                mean_sq[k] += leave[k] * leave[k];
            }
        }
        if (valid > 1) {
            const double mean = xi2_sum / valid;
            const double var = (xi2_sq / valid - mean * mean) * (valid - 1);
            stats.xi2_err.push_back(std::sqrt(std::max(var, 0.0)));
        } else {
            stats.xi2_err.push_back(std::numeric_limits<double>::quiet_NaN());
        }
        for (int k = 0; k < 3; ++k) {
            const double mean = mean_sum[k] / blocks;
            const double var = (mean_sq[k] / blocks - mean * mean) * (blocks - 1);
            stats.mean_err[k].push_back(std::sqrt(std::max(var, 0.0)));
        }
    }
    return stats;
}

} // namespace sqz::ddtwa
