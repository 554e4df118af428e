// hilbert.hpp — Truncated Dicke ⊗ Fock Hilbert space: basis indexing,
// collective spin and boson ladder operators, spin-boson Hamiltonians,
// product initial states and expectation values.
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sqz/errors.hpp"

namespace sqz {

using cplx = std::complex<double>;

namespace hilbert {

// Product basis of the maximal-spin Dicke ladder (S = N/2, dimension N+1)
// and a Fock space truncated at occupation n_max. Ladder index m ∈ {0..N}
// labels the S_z eigenvalue m − N/2; flattened index = m·(n_max+1) + n.
struct DickeFockBasis {
    int N = 0;
    int n_max = 0;

    DickeFockBasis() = default;
    DickeFockBasis(int N_, int n_max_) : N(N_), n_max(n_max_) {
        if (N < 1 || n_max < 0) throw ConfigError("DickeFockBasis: need N >= 1, n_max >= 0");
    }

    int fock_dim() const { return n_max + 1; }
    int spin_dim() const { return N + 1; }
    std::int64_t dim() const { return static_cast<std::int64_t>(N + 1) * (n_max + 1); }

    std::int64_t flatten(int m, int n) const {
        return static_cast<std::int64_t>(m) * (n_max + 1) + n;
    }
    std::pair<int, int> unflatten(std::int64_t idx) const {
        return {static_cast<int>(idx / (n_max + 1)), static_cast<int>(idx % (n_max + 1))};
    }

    bool operator==(const DickeFockBasis& o) const { return N == o.N && n_max == o.n_max; }
};

// Sparse operator on a flattened basis, stored row-major for matvec.
// Builders may install a structure-aware kernel (used by apply); the
// triplet matrix stays authoritative for dense() and algebra.
class SparseOperator {
public:
    using KernelFn = std::function<void(const cplx* x, cplx* y)>;

    SparseOperator() = default;
    SparseOperator(std::int64_t dim, const std::vector<Eigen::Triplet<cplx>>& entries,
                   bool hermitian);
    SparseOperator(Eigen::SparseMatrix<cplx, Eigen::RowMajor> mat, bool hermitian);

    std::int64_t dim() const { return mat_.rows(); }
    bool hermitian() const { return hermitian_; }
    std::int64_t nonzeros() const { return mat_.nonZeros(); }

    // y = A x; dimensions must match.
    void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;
    void apply_raw(const cplx* x, cplx* y) const;
    Eigen::VectorXcd operator*(const Eigen::VectorXcd& x) const;

    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(mat_); }
    const Eigen::SparseMatrix<cplx, Eigen::RowMajor>& matrix() const { return mat_; }

    void set_kernel(KernelFn kernel) { kernel_ = std::move(kernel); }
    bool has_kernel() const { return static_cast<bool>(kernel_); }

private:
    void verify_hermitian() const;

    Eigen::SparseMatrix<cplx, Eigen::RowMajor> mat_;
    bool hermitian_ = false;
    KernelFn kernel_;
};

// Piecewise-constant Hamiltonian parameters: H = delta a†a + omega S_x
// + (2 g sign_g/√N)(a + a†) S_z.
struct CouplingParams {
    double g = 0.0;
    double delta = 0.0;
    double omega = 0.0;
    double sign_g = 1.0;
};

struct CollectiveOps {
    SparseOperator Sx, Sy, Sz, Sp, Sm, a, adag;
};

// Collective spin operators on the S = N/2 ladder and truncated boson
// ladder, each acting as identity on the complementary factor.
// S±|m⟩: sqrt((N−m)(m+1)) and sqrt(m(N−m+1)); a|n⟩ = √n |n−1⟩.
CollectiveOps build_collective_ops(const DickeFockBasis& basis);

SparseOperator build_sx(const DickeFockBasis& basis);
SparseOperator build_sy(const DickeFockBasis& basis);
SparseOperator build_sz(const DickeFockBasis& basis);
SparseOperator build_number(const DickeFockBasis& basis); // a†a

SparseOperator build_dicke_hamiltonian(const DickeFockBasis& basis, const CouplingParams& p);

enum class TcVariant { TC, ATC };

// H_TC  = −iG/√N (a S⁺ − a† S⁻),  H_ATC = −iG/√N (a† S⁺ − a S⁻),
// multiplied by sign.
SparseOperator build_tc_atc(const DickeFockBasis& basis, double G, TcVariant variant,
                            double sign = 1.0);

struct SpinBosonState {
    DickeFockBasis basis;
    Eigen::VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }
};

enum class SpinDirection { PlusX, PlusZ, MinusZ };

// Coherent spin state along the requested axis, boson in vacuum.
// +x amplitudes are sqrt(C(N,m))/2^{N/2} on the S_z ladder.
SpinBosonState coherent_spin_state(const DickeFockBasis& basis, SpinDirection dir);

// ⟨ψ|A|ψ⟩. Real part is the physical value for hermitian A.
cplx expect(const SpinBosonState& state, const SparseOperator& op);

// ⟨ψ|A B|ψ⟩ for hermitian A, B via (Aψ)†(Bψ).
cplx expect_product(const SpinBosonState& state, const SparseOperator& a,
                    const SparseOperator& b);

} // namespace hilbert
} // namespace sqz
