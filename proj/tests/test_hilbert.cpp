#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sqz/hilbert.hpp"

#include <random>

using namespace sqz;
using namespace sqz::hilbert;

namespace {

// independent dense assembly of the same operators through Kronecker
// products of single-factor matrices
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    Eigen::MatrixXcd K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
        }
    }
    return K;
}

struct DenseFactors {
    Eigen::MatrixXcd sp, sm, sx, sy, sz; // (N+1)×(N+1) ladder matrices
    Eigen::MatrixXcd a, adag, eye_b;     // boson factor
    Eigen::MatrixXcd eye_s;

    DenseFactors(int N, int n_max) {
        const int ds = N + 1, db = n_max + 1;
        sp = Eigen::MatrixXcd::Zero(ds, ds);
        for (int m = 0; m < N; ++m) {
            sp(m + 1, m) = std::sqrt(double(N - m) * (m + 1));
        }
        sm = sp.adjoint();
        sx = 0.5 * (sp + sm);
        sy = cplx(0, -0.5) * (sp - sm);
        sz = Eigen::MatrixXcd::Zero(ds, ds);
        for (int m = 0; m <= N; ++m) sz(m, m) = m - 0.5 * N;
        a = Eigen::MatrixXcd::Zero(db, db);
        for (int n = 1; n < db; ++n) a(n - 1, n) = std::sqrt(double(n));
        adag = a.adjoint();
        eye_b = Eigen::MatrixXcd::Identity(db, db);
        eye_s = Eigen::MatrixXcd::Identity(ds, ds);
    }
};

} // namespace

TEST_CASE("basis indexing round trip is a bijection") {
    DickeFockBasis b(5, 7);
    CHECK(b.dim() == 48);
    std::vector<bool> seen(b.dim(), false);
    for (int m = 0; m <= b.N; ++m) {
        for (int n = 0; n <= b.n_max; ++n) {
            const auto idx = b.flatten(m, n);
            REQUIRE(idx >= 0);
            REQUIRE(idx < b.dim());
            CHECK(!seen[idx]);
            seen[idx] = true;
            const auto [m2, n2] = b.unflatten(idx);
            CHECK(m2 == m);
            CHECK(n2 == n);
        }
    }
}

TEST_CASE("single spin-1/2: Sz matches Pauli/2") {
    DickeFockBasis b(1, 0);
    const auto ops = build_collective_ops(b);
    const auto sz = ops.Sz.dense();
    CHECK(sz(0, 0) == cplx(-0.5, 0.0));
    CHECK(sz(1, 1) == cplx(0.5, 0.0));
    CHECK(std::abs(sz(0, 1)) == 0.0);
}

TEST_CASE("N=2: Sz eigenvalues are the spin-1 ladder") {
    DickeFockBasis b(2, 0);
    const auto sz = build_sz(b).dense();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sz);
    const auto ev = es.eigenvalues();
    CHECK(ev(0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(ev(1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(ev(2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("commutators and Casimir on the Dicke manifold") {
    for (int N : {2, 4, 6}) {
        DickeFockBasis b(N, N == 4 ? 5 : 2);
        const auto ops = build_collective_ops(b);
        const auto sx = ops.Sx.dense(), sy = ops.Sy.dense(), sz = ops.Sz.dense();

        const Eigen::MatrixXcd comm_xy = sx * sy - sy * sx - cplx(0, 1) * sz;
        const Eigen::MatrixXcd comm_yz = sy * sz - sz * sy - cplx(0, 1) * sx;
        const Eigen::MatrixXcd comm_zx = sz * sx - sx * sz - cplx(0, 1) * sy;
        CHECK(comm_xy.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(comm_yz.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(comm_zx.cwiseAbs().maxCoeff() < 1e-12);

        const double S = 0.5 * N;
        const Eigen::MatrixXcd casimir =
            sx * sx + sy * sy + sz * sz -
            S * (S + 1.0) * Eigen::MatrixXcd::Identity(b.dim(), b.dim());
        CHECK(casimir.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("boson commutator [a, adag] = 1 below the cutoff") {
    DickeFockBasis b(4, 5);
    const auto ops = build_collective_ops(b);
    const Eigen::MatrixXcd comm = ops.a.dense() * ops.adag.dense() -
                                  ops.adag.dense() * ops.a.dense();
    for (int m = 0; m <= b.N; ++m) {
        for (int n = 0; n < b.n_max; ++n) { // excludes the truncated top level
            const auto i = b.flatten(m, n);
            CHECK(std::abs(comm(i, i) - cplx(1.0, 0.0)) < 1e-12);
        }
    }
}

TEST_CASE("collective ops match dense Kronecker assembly") {
    const int N = 3, n_max = 4;
    DickeFockBasis b(N, n_max);
    DenseFactors f(N, n_max);
    const auto ops = build_collective_ops(b);
    CHECK((ops.Sx.dense() - kron(f.sx, f.eye_b)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ops.Sy.dense() - kron(f.sy, f.eye_b)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ops.Sz.dense() - kron(f.sz, f.eye_b)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ops.Sp.dense() - kron(f.sp, f.eye_b)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ops.a.dense() - kron(f.eye_s, f.a)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ops.adag.dense() - kron(f.eye_s, f.adag)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("decoupled boson Hamiltonian: g = omega = 0") {
    DickeFockBasis b(3, 6);
    const double delta = 2.5;
    const auto H = build_dicke_hamiltonian(b, {0.0, delta, 0.0, 1.0});
    const auto Hd = H.dense();
    for (int m = 0; m <= b.N; ++m) {
        for (int n = 0; n <= b.n_max; ++n) {
            CHECK(std::abs(Hd(b.flatten(m, n), b.flatten(m, n)) - cplx(delta * n, 0)) < 1e-14);
        }
    }
    CHECK((Hd - Hd.diagonal().asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("N=1, n_max=1 Hamiltonian equals the hand-assembled 4x4") {
    DickeFockBasis b(1, 1);
    const auto H = build_dicke_hamiltonian(b, {1.0, 1.0, 1.0, 1.0}).dense();
    // basis order (m,n): (0,0), (0,1), (1,0), (1,1); mz = ∓1/2
    Eigen::MatrixXcd expected(4, 4);
    expected << 0.0, -1.0, 0.5, 0.0,
                -1.0, 1.0, 0.0, 0.5,
                0.5, 0.0, 0.0, 1.0,
                0.0, 0.5, 1.0, 1.0;
    CHECK((H - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("large Hamiltonian is exactly hermitian by construction") {
    DickeFockBasis b(250, 40);
    const auto H = build_dicke_hamiltonian(b, {1.0, 5.0, 5.0, 1.0});
    CHECK(H.hermitian());
    // spot-check the hermiticity residual directly
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> diff =
        H.matrix() - Eigen::SparseMatrix<cplx, Eigen::RowMajor>(H.matrix().adjoint());
    double max_abs = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k) {
        for (Eigen::SparseMatrix<cplx, Eigen::RowMajor>::InnerIterator it(diff, k); it; ++it) {
            max_abs = std::max(max_abs, std::abs(it.value()));
        }
    }
    CHECK(max_abs == 0.0);
}

TEST_CASE("TC/ATC structure") {
    const int N = 2, n_max = 4;
    DickeFockBasis b(N, n_max);
    DenseFactors f(N, n_max);
    const double G = 1.0;

    const auto Htc = build_tc_atc(b, G, TcVariant::TC).dense();
    const auto Hatc = build_tc_atc(b, G, TcVariant::ATC).dense();

    SUBCASE("dense assembly oracle") {
        const double c = G / std::sqrt(double(N));
        const Eigen::MatrixXcd tc_expected =
            cplx(0, -c) * (kron(f.sp, f.a) - kron(f.sm, f.adag));
        const Eigen::MatrixXcd atc_expected =
            cplx(0, -c) * (kron(f.sp, f.adag) - kron(f.sm, f.a));
        CHECK((Htc - tc_expected).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((Hatc - atc_expected).cwiseAbs().maxCoeff() < 1e-14);
    }

    SUBCASE("TC conserves a†a + Sz, ATC conserves a†a − Sz") {
        const Eigen::MatrixXcd num = kron(f.eye_s, f.adag * f.a);
        const Eigen::MatrixXcd sz = kron(f.sz, f.eye_b);
        // restrict to states that cannot reach the truncated Fock edge
        const Eigen::MatrixXcd c_tc = (num + sz) * Htc - Htc * (num + sz);
        const Eigen::MatrixXcd c_atc = (num - sz) * Hatc - Hatc * (num - sz);
        for (int m = 0; m <= N; ++m) {
            for (int n = 1; n < n_max; ++n) {
                for (int m2 = 0; m2 <= N; ++m2) {
                    for (int n2 = 1; n2 < n_max; ++n2) {
                        CHECK(std::abs(c_tc(b.flatten(m, n), b.flatten(m2, n2))) < 1e-12);
                        CHECK(std::abs(c_atc(b.flatten(m, n), b.flatten(m2, n2))) < 1e-12);
                    }
                }
            }
        }
    }

    SUBCASE("sign flag negates") {
        const auto Hneg = build_tc_atc(b, G, TcVariant::TC, -1.0).dense();
        CHECK((Htc + Hneg).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("coherent spin states") {
    SUBCASE("+z puts all weight on m = N") {
        DickeFockBasis b(5, 3);
        const auto st = coherent_spin_state(b, SpinDirection::PlusZ);
        CHECK(std::abs(st.amplitudes[b.flatten(5, 0)] - cplx(1, 0)) == 0.0);
        CHECK(st.norm() == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("+x amplitudes are binomial for N=2") {
        DickeFockBasis b(2, 2);
        const auto st = coherent_spin_state(b, SpinDirection::PlusX);
        CHECK(std::abs(st.amplitudes[b.flatten(0, 0)] - cplx(0.5, 0)) < 1e-14);
        CHECK(std::abs(st.amplitudes[b.flatten(1, 0)] - cplx(1.0 / std::sqrt(2.0), 0)) < 1e-14);
        CHECK(std::abs(st.amplitudes[b.flatten(2, 0)] - cplx(0.5, 0)) < 1e-14);
    }

    SUBCASE("mean spin N/2 along the chosen axis, transverse variances N/4") {
        for (int N : {2, 7, 40}) {
            DickeFockBasis b(N, 2);
            const auto ops = build_collective_ops(b);
            const auto stx = coherent_spin_state(b, SpinDirection::PlusX);
            CHECK(expect(stx, ops.Sx).real() == doctest::Approx(0.5 * N).epsilon(1e-12));
            CHECK(std::abs(expect(stx, ops.Sy)) < 1e-12);
            const double var_y =
                (stx.amplitudes.adjoint() * (ops.Sy.matrix() * (ops.Sy * stx.amplitudes)))(0)
                    .real();
            CHECK(var_y == doctest::Approx(0.25 * N).epsilon(1e-12));

            const auto stz = coherent_spin_state(b, SpinDirection::PlusZ);
            CHECK(expect(stz, ops.Sz).real() == doctest::Approx(0.5 * N).epsilon(1e-12));
            const auto stmz = coherent_spin_state(b, SpinDirection::MinusZ);
            CHECK(expect(stmz, ops.Sz).real() == doctest::Approx(-0.5 * N).epsilon(1e-12));
        }
    }

    SUBCASE("boson factor is vacuum") {
        DickeFockBasis b(4, 3);
        const auto st = coherent_spin_state(b, SpinDirection::PlusX);
        const auto num = build_number(b);
        CHECK(std::abs(expect(st, num)) < 1e-14);
    }
}

TEST_CASE("expect") {
    DickeFockBasis b(3, 4);
    const auto ops = build_collective_ops(b);

    SUBCASE("hermitian operator gives real expectation on a random state") {
        std::mt19937 gen(42);
        std::normal_distribution<double> dist;
        SpinBosonState st;
        st.basis = b;
        st.amplitudes.resize(b.dim());
        for (Eigen::Index i = 0; i < st.amplitudes.size(); ++i) {
            st.amplitudes[i] = cplx(dist(gen), dist(gen));
        }
        st.amplitudes /= st.amplitudes.norm();
        CHECK(std::abs(expect(st, ops.Sx).imag()) < 1e-12);
        CHECK(std::abs(expect(st, ops.Sy).imag()) < 1e-12);
    }

    SUBCASE("dimension mismatch throws") {
        DickeFockBasis small(2, 1);
        const auto st = coherent_spin_state(small, SpinDirection::PlusZ);
        CHECK_THROWS_AS((void)expect(st, ops.Sx), ConfigError);
    }
}
