// lindblad.hpp — Dense small-N master-equation oracle on the full 2^N spin
// product space ⊗ truncated Fock space, with per-site jump operators and
// RK4 time stepping. Used to benchmark the semiclassical trajectories.
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sqz/schedule.hpp"
#include "sqz/squeezing.hpp"

namespace sqz::lindblad {

struct DensityMatrix {
    int n_spins = 0;
    int n_max = 0;
    Eigen::MatrixXcd rho;

    std::int64_t dim() const { return rho.rows(); }
    double trace_error() const { return std::abs(rho.trace().real() - 1.0); }
    double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const; // checked on demand
    double purity() const { return (rho * rho).trace().real(); }
};

// Full-product-space index: (spin configuration s, boson occupation n)
// with bit i of s giving the i-th spin (1 = up); index = s·(n_max+1) + n.
struct ProductSpace {
    int N = 0;
    int n_max = 0;
    std::int64_t spin_dim() const { return std::int64_t(1) << N; }
    std::int64_t dim() const { return spin_dim() * (n_max + 1); }
    std::int64_t flatten(std::int64_t s, int n) const { return s * (n_max + 1) + n; }
};

class Liouvillian {
public:
    virtual ~Liouvillian() = default;
    virtual void apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const = 0;
    virtual const ProductSpace& space() const = 0;
};

// Ion model: lab-frame spin-boson Hamiltonian plus per-site dephasing
// (γ_z/4)Σ(σ_z ρ σ_z − ρ) and balanced flips (γ₊/2)Σ(σ_x ρ σ_x + σ_y ρ σ_y − 2ρ).
std::unique_ptr<Liouvillian> build_ion_liouvillian(int N, int n_max,
                                                   const hilbert::CouplingParams& coupling,
                                                   const DissipationParams& rates);

// Cavity model: H = g_cav (a S⁺ + a† S⁻), jumps √κ a and √γ σ⁻ per site.
std::unique_ptr<Liouvillian> build_cavity_liouvillian(int N, int n_max, double g_cav,
                                                      double kappa, double gamma);

// Collective spin observables on the product space.
struct SpinObservables {
    Eigen::SparseMatrix<cplx> Sx, Sy, Sz, Sx2, Sy2, Sz2, SySz_sym, SxSy_sym, SzSx_sym, number;
};
SpinObservables build_spin_observables(const ProductSpace& space);

protocols::SpinMoments moments_from_rho(const DensityMatrix& rho, const SpinObservables& obs);

// CSS along +x (each spin (|0⟩+|1⟩)/√2) with the boson in vacuum.
DensityMatrix css_x_vacuum(int N, int n_max);

struct RhoSeriesPoint {
    double t;
    protocols::SpinMoments moments;
    double boson_n;
    double purity;
};

struct EvolveRhoResult {
    std::vector<RhoSeriesPoint> series;
    DensityMatrix final_rho;
};

// RK4 evolution with trace monitoring (InvariantViolation past 1e−6 drift).
// Samples moments at the requested times (multiples of dt recommended).
EvolveRhoResult evolve_rho(const DensityMatrix& rho0, const Liouvillian& liouville,
                           double t_span, double dt, const std::vector<double>& sample_times);

} // namespace sqz::lindblad
