#include "sqz/lindblad.hpp"

#include <bit>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace sqz::lindblad {

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
    return es.eigenvalues().minCoeff();
}

namespace {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<cplx>>;

void check_dims(int N, int n_max, int N_cap, int n_cap, const char* what) {
    if (N < 1 || N > N_cap || n_max < 0 || n_max > n_cap) {
        throw DimensionTooLargeError(std::string(what) + ": need 1 <= N <= " +
                                     std::to_string(N_cap) + " and n_max <= " +
                                     std::to_string(n_cap));
    }
}

SpMat ion_hamiltonian(const ProductSpace& sp, const hilbert::CouplingParams& p) {
    const int nb = sp.n_max + 1;
    const double gc = 2.0 * p.g * p.sign_g / std::sqrt(static_cast<double>(sp.N));
    Triplets t;
    for (std::int64_t s = 0; s < sp.spin_dim(); ++s) {
        const double sz = std::popcount(static_cast<std::uint64_t>(s)) - 0.5 * sp.N;
        for (int n = 0; n < nb; ++n) {
            const auto row = sp.flatten(s, n);
            if (p.delta != 0.0) t.emplace_back(row, row, cplx(p.delta * n, 0.0));
            // omega S_x: per-site bit flips, amplitude omega/2
            if (p.omega != 0.0) {
                for (int i = 0; i < sp.N; ++i) {
                    const auto col = sp.flatten(s ^ (std::int64_t(1) << i), n);
                    t.emplace_back(row, col, cplx(0.5 * p.omega, 0.0));
                }
            }
            // (2g/√N)(a + a†) S_z
            if (gc != 0.0 && n >= 1) {
                const double v = gc * sz * std::sqrt(static_cast<double>(n));
                t.emplace_back(sp.flatten(s, n - 1), sp.flatten(s, n), cplx(v, 0.0));
                t.emplace_back(sp.flatten(s, n), sp.flatten(s, n - 1), cplx(v, 0.0));
            }
        }
    }
    SpMat H(sp.dim(), sp.dim());
    H.setFromTriplets(t.begin(), t.end());
    H.makeCompressed();
    return H;
}

SpMat cavity_hamiltonian(const ProductSpace& sp, double g_cav) {
    const int nb = sp.n_max + 1;
    Triplets t;
    for (std::int64_t s = 0; s < sp.spin_dim(); ++s) {
        for (int i = 0; i < sp.N; ++i) {
            if (s & (std::int64_t(1) << i)) continue; // need spin i down for σ⁺
            const std::int64_t s_up = s | (std::int64_t(1) << i);
            for (int n = 1; n < nb; ++n) {
                // g a S⁺ : (s,n) → (s_up, n−1), plus h.c.
                const double v = g_cav * std::sqrt(static_cast<double>(n));
                t.emplace_back(sp.flatten(s_up, n - 1), sp.flatten(s, n), cplx(v, 0.0));
                t.emplace_back(sp.flatten(s, n), sp.flatten(s_up, n - 1), cplx(v, 0.0));
            }
        }
    }
    SpMat H(sp.dim(), sp.dim());
    H.setFromTriplets(t.begin(), t.end());
    H.makeCompressed();
    return H;
}

class IonLiouvillian final : public Liouvillian {
public:
    IonLiouvillian(int N, int n_max, const hilbert::CouplingParams& coupling,
                   const DissipationParams& rates)
        : rates_(rates) {
        space_.N = N;
        space_.n_max = n_max;
        H_ = ion_hamiltonian(space_, coupling);
        // spin-pair coefficient: −γ_z/2·d_H(sr,sc) − γ₊·N
        const auto sd = space_.spin_dim();
        coeff_.resize(sd * sd);
        for (std::int64_t sr = 0; sr < sd; ++sr) {
            for (std::int64_t sc = 0; sc < sd; ++sc) {
                const int dh = std::popcount(static_cast<std::uint64_t>(sr ^ sc));
                coeff_[sr * sd + sc] = -0.5 * rates.gamma_z * dh - rates.gamma_plus * N;
            }
        }
    }

    const ProductSpace& space() const override { return space_; }

    void apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const override {
        work_.resize(rho.rows(), rho.cols());
        work_.noalias() = H_ * rho;
        out.noalias() = rho * H_;
        out -= work_;
        out *= cplx(0.0, 1.0); // −i(Hρ − ρH)

        const bool flips = rates_.gamma_plus != 0.0;
        const bool dephasing = rates_.gamma_z != 0.0;
        if (!flips && !dephasing) return;

        const int nb = space_.n_max + 1;
        const auto sd = space_.spin_dim();
        for (std::int64_t sr = 0; sr < sd; ++sr) {
            for (std::int64_t sc = 0; sc < sd; ++sc) {
                const double c = coeff_[sr * sd + sc];
                if (c != 0.0) {
                    out.block(sr * nb, sc * nb, nb, nb) += c * rho.block(sr * nb, sc * nb, nb, nb);
                }
            }
        }
        if (flips) {
            for (int i = 0; i < space_.N; ++i) {
                const std::int64_t bit = std::int64_t(1) << i;
                for (std::int64_t sr = 0; sr < sd; ++sr) {
                    for (std::int64_t sc = 0; sc < sd; ++sc) {
                        if (((sr ^ sc) & bit) != 0) continue; // need equal bits at site i
                        out.block(sr * nb, sc * nb, nb, nb) +=
                            rates_.gamma_plus * rho.block((sr ^ bit) * nb, (sc ^ bit) * nb, nb, nb);
                    }
                }
            }
        }
    }

private:
    ProductSpace space_;
    DissipationParams rates_;
    SpMat H_;
    std::vector<double> coeff_;
    mutable Eigen::MatrixXcd work_;
};

class CavityLiouvillian final : public Liouvillian {
public:
    CavityLiouvillian(int N, int n_max, double g_cav, double kappa, double gamma)
        : kappa_(kappa), gamma_(gamma) {
        space_.N = N;
        space_.n_max = n_max;
        H_ = cavity_hamiltonian(space_, g_cav);
    }

    const ProductSpace& space() const override { return space_; }

    void apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const override {
        work_.resize(rho.rows(), rho.cols());
        work_.noalias() = H_ * rho;
        out.noalias() = rho * H_;
        out -= work_;
        out *= cplx(0.0, 1.0);

        const int nb = space_.n_max + 1;
        const auto sd = space_.spin_dim();
        if (kappa_ != 0.0) {
            // κ (a ρ a† − ½{a†a, ρ})
            for (std::int64_t sr = 0; sr < sd; ++sr) {
                for (std::int64_t sc = 0; sc < sd; ++sc) {
                    auto ob = out.block(sr * nb, sc * nb, nb, nb);
                    const auto rb = rho.block(sr * nb, sc * nb, nb, nb);
                    for (int nr = 0; nr < nb; ++nr) {
                        for (int nc = 0; nc < nb; ++nc) {
                            cplx v = -0.5 * kappa_ * (nr + nc) * rb(nr, nc);
                            if (nr + 1 < nb && nc + 1 < nb) {
                                v += kappa_ * std::sqrt(double(nr + 1) * (nc + 1)) *
                                     rb(nr + 1, nc + 1);
                            }
                            ob(nr, nc) += v;
                        }
                    }
                }
            }
        }
        if (gamma_ != 0.0) {
            // γ Σ_i (σ⁻ ρ σ⁺ − ½{σ⁺σ⁻, ρ})
            for (int i = 0; i < space_.N; ++i) {
                const std::int64_t bit = std::int64_t(1) << i;
                for (std::int64_t sr = 0; sr < sd; ++sr) {
                    for (std::int64_t sc = 0; sc < sd; ++sc) {
                        const double occ = ((sr & bit) ? 0.5 : 0.0) + ((sc & bit) ? 0.5 : 0.0);
                        if (occ != 0.0) {
                            out.block(sr * nb, sc * nb, nb, nb) -=
                                gamma_ * occ * rho.block(sr * nb, sc * nb, nb, nb);
                        }
                        if (!(sr & bit) && !(sc & bit)) {
                            out.block(sr * nb, sc * nb, nb, nb) +=
                                gamma_ * rho.block((sr | bit) * nb, (sc | bit) * nb, nb, nb);
                        }
                    }
                }
            }
        }
    }

private:
    ProductSpace space_;
    double kappa_, gamma_;
    SpMat H_;
    mutable Eigen::MatrixXcd work_;
};

} // namespace

std::unique_ptr<Liouvillian> build_ion_liouvillian(int N, int n_max,
                                                   const hilbert::CouplingParams& coupling,
                                                   const DissipationParams& rates) {
    check_dims(N, n_max, 9, 8, "build_ion_liouvillian");
    return std::make_unique<IonLiouvillian>(N, n_max, coupling, rates);
}

std::unique_ptr<Liouvillian> build_cavity_liouvillian(int N, int n_max, double g_cav,
                                                      double kappa, double gamma) {
    check_dims(N, n_max, 6, 8, "build_cavity_liouvillian");
    return std::make_unique<CavityLiouvillian>(N, n_max, g_cav, kappa, gamma);
}

SpinObservables build_spin_observables(const ProductSpace& sp) {
    const int nb = sp.n_max + 1;
    Triplets tx, ty, tz, tn;
    for (std::int64_t s = 0; s < sp.spin_dim(); ++s) {
        const double sz = std::popcount(static_cast<std::uint64_t>(s)) - 0.5 * sp.N;
        for (int n = 0; n < nb; ++n) {
            const auto row = sp.flatten(s, n);
            tz.emplace_back(row, row, cplx(sz, 0.0));
            tn.emplace_back(row, row, cplx(n, 0.0));
            for (int i = 0; i < sp.N; ++i) {
                const std::int64_t flip = s ^ (std::int64_t(1) << i);
                const auto col = sp.flatten(flip, n);
                tx.emplace_back(row, col, cplx(0.5, 0.0));
                // σ_y/2: +i/2 |1⟩⟨0| − i/2 |0⟩⟨1|
                const bool row_up = (s >> i) & 1;
                ty.emplace_back(row, col, cplx(0.0, row_up ? 0.5 : -0.5));
            }
        }
    }
    const auto d = sp.dim();
    SpinObservables obs;
    auto make = [&](Triplets& t) {
        Eigen::SparseMatrix<cplx> m(d, d);
        m.setFromTriplets(t.begin(), t.end());
        m.makeCompressed();
        return m;
    };
    obs.Sx = make(tx);
    obs.Sy = make(ty);
    obs.Sz = make(tz);
    obs.number = make(tn);
    obs.Sx2 = obs.Sx * obs.Sx;
    obs.Sy2 = obs.Sy * obs.Sy;
    obs.Sz2 = obs.Sz * obs.Sz;
    obs.SySz_sym = 0.5 * (obs.Sy * obs.Sz + obs.Sz * obs.Sy).eval();
    obs.SxSy_sym = 0.5 * (obs.Sx * obs.Sy + obs.Sy * obs.Sx).eval();
    obs.SzSx_sym = 0.5 * (obs.Sz * obs.Sx + obs.Sx * obs.Sz).eval();
    return obs;
}

namespace {

double trace_expect(const Eigen::SparseMatrix<cplx>& A, const Eigen::MatrixXcd& rho) {
    cplx tr(0.0, 0.0);
    for (int k = 0; k < A.outerSize(); ++k) {
        for (Eigen::SparseMatrix<cplx>::InnerIterator it(A, k); it; ++it) {
            tr += it.value() * rho(it.col(), it.row());
        }
    }
    return tr.real();
}

} // namespace

protocols::SpinMoments moments_from_rho(const DensityMatrix& dm, const SpinObservables& obs) {
    protocols::SpinMoments m;
    m.mean[0] = trace_expect(obs.Sx, dm.rho);
    m.mean[1] = trace_expect(obs.Sy, dm.rho);
    m.mean[2] = trace_expect(obs.Sz, dm.rho);
    m.second(0, 0) = trace_expect(obs.Sx2, dm.rho);
    m.second(1, 1) = trace_expect(obs.Sy2, dm.rho);
    m.second(2, 2) = trace_expect(obs.Sz2, dm.rho);
    m.second(0, 1) = m.second(1, 0) = trace_expect(obs.SxSy_sym, dm.rho);
    m.second(1, 2) = m.second(2, 1) = trace_expect(obs.SySz_sym, dm.rho);
    m.second(2, 0) = m.second(0, 2) = trace_expect(obs.SzSx_sym, dm.rho);
    return m;
}

DensityMatrix css_x_vacuum(int N, int n_max) {
    ProductSpace sp{N, n_max};
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(sp.dim());
    const double amp = std::pow(2.0, -0.5 * N);
    for (std::int64_t s = 0; s < sp.spin_dim(); ++s) psi[sp.flatten(s, 0)] = amp;
    DensityMatrix dm;
    dm.n_spins = N;
    dm.n_max = n_max;
    dm.rho = psi * psi.adjoint();
    return dm;
}

EvolveRhoResult evolve_rho(const DensityMatrix& rho0, const Liouvillian& liouville,
                           double t_span, double dt, const std::vector<double>& sample_times) {
    if (dt <= 0.0) throw ConfigError("evolve_rho: dt must be > 0");
    const auto& sp = liouville.space();
    if (rho0.dim() != sp.dim()) throw ConfigError("evolve_rho: dimension mismatch");

    const auto obs = build_spin_observables(sp);

    EvolveRhoResult res;
    res.final_rho = rho0;
    Eigen::MatrixXcd& rho = res.final_rho.rho;
    Eigen::MatrixXcd k1, k2, k3, k4, stage;

    std::size_t sample_idx = 0;
    auto record_due = [&](double t_now) {
        while (sample_idx < sample_times.size() &&
               sample_times[sample_idx] <= t_now + 1e-9 * dt) {
            RhoSeriesPoint pt;
            pt.t = sample_times[sample_idx];
            pt.moments = moments_from_rho(res.final_rho, obs);
            pt.boson_n = trace_expect(obs.number, rho);
            pt.purity = res.final_rho.purity();
            res.series.push_back(std::move(pt));
            ++sample_idx;
        }
    };

    double t = 0.0;
    record_due(0.0);
    while (t < t_span - 1e-12 * std::max(t_span, 1.0)) {
        const double h = std::min(dt, t_span - t);
        liouville.apply(rho, k1);
        stage = rho + (0.5 * h) * k1;
        liouville.apply(stage, k2);
        stage = rho + (0.5 * h) * k2;
        liouville.apply(stage, k3);
        stage = rho + h * k3;
        liouville.apply(stage, k4);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;

        if (res.final_rho.trace_error() > 1e-6) {
            throw InvariantViolationError("evolve_rho: trace drift " +
                                          std::to_string(res.final_rho.trace_error()) +
                                          " at t = " + std::to_string(t));
        }
        record_due(t);
    }
    record_due(t + dt);
    return res;
}

} // namespace sqz::lindblad
