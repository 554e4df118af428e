#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sqz/krylov.hpp"
#include "oracles.hpp"

using namespace sqz;
using namespace sqz::hilbert;
using namespace sqz::krylov;

namespace {

SpinBosonState coherent_boson_state(const DickeFockBasis& b, double alpha_sq) {
    // spin fully up, boson in a truncated coherent state with ⟨n⟩ = |α|²
    SpinBosonState st;
    st.basis = b;
    st.amplitudes = Eigen::VectorXcd::Zero(b.dim());
    for (int n = 0; n <= b.n_max; ++n) {
        const double log_amp = -0.5 * alpha_sq + 0.5 * n * std::log(alpha_sq) -
                               0.5 * std::lgamma(n + 1.0);
        st.amplitudes[b.flatten(b.N, n)] = std::exp(log_amp);
    }
    st.amplitudes /= st.amplitudes.norm();
    return st;
}

} // namespace

TEST_CASE("eigenstate evolution: vacuum under delta a†a is stationary") {
    DickeFockBasis b(2, 5);
    const auto H = build_dicke_hamiltonian(b, {0.0, 3.0, 0.0, 1.0});
    const auto psi0 = coherent_spin_state(b, SpinDirection::PlusX);
    const auto psi1 = krylov_expm_apply(H, psi0, 1.7);
    CHECK((psi1.amplitudes - psi0.amplitudes).norm() < 1e-12); // phase is exactly 1
}

TEST_CASE("dt = 0 is the identity") {
    DickeFockBasis b(3, 4);
    const auto H = build_dicke_hamiltonian(b, {1.0, 5.0, 5.0, 1.0});
    const auto psi0 = coherent_spin_state(b, SpinDirection::PlusX);
    const auto psi1 = krylov_expm_apply(H, psi0, 0.0);
    CHECK((psi1.amplitudes - psi0.amplitudes).norm() == 0.0);
}

TEST_CASE("matches the dense expm oracle") {
    SUBCASE("small spin-boson Hamiltonian") {
        DickeFockBasis b(2, 4);
        const auto H = build_dicke_hamiltonian(b, {1.0, 5.0, 5.0, 1.0});
        const auto psi0 = coherent_spin_state(b, SpinDirection::PlusX);
        const auto expected = oracles::dense_expm_apply(H.dense(), psi0.amplitudes, 0.3);
        const auto psi1 = krylov_expm_apply(H, psi0, 0.3);
        CHECK((psi1.amplitudes - expected).norm() < 1e-8);
    }

    SUBCASE("dim close to 200, longer time") {
        DickeFockBasis b(19, 9); // dim = 200
        const auto H = build_dicke_hamiltonian(b, {1.0, 5.0, -5.0, 1.0});
        const auto psi0 = coherent_spin_state(b, SpinDirection::PlusX);
        const auto expected = oracles::dense_expm_apply(H.dense(), psi0.amplitudes, 2.0);
        const auto psi1 = krylov_expm_apply(H, psi0, 2.0);
        CHECK((psi1.amplitudes - expected).norm() < 1e-8);
        CHECK(std::abs(psi1.norm() - 1.0) < 1e-8);
    }

    SUBCASE("TC generator") {
        DickeFockBasis b(6, 8);
        const auto H = build_tc_atc(b, 1.0, TcVariant::TC);
        const auto psi0 = coherent_spin_state(b, SpinDirection::PlusZ);
        const auto expected = oracles::dense_expm_apply(H.dense(), psi0.amplitudes, 0.8);
        const auto psi1 = krylov_expm_apply(H, psi0, 0.8);
        CHECK((psi1.amplitudes - expected).norm() < 1e-8);
    }
}

TEST_CASE("unitarity and energy conservation over a long evolution") {
    DickeFockBasis b(12, 10);
    const auto H = build_dicke_hamiltonian(b, {1.0, 5.0, 5.0, 1.0});
    auto psi = coherent_spin_state(b, SpinDirection::PlusX);
    const double e0 = expect(psi, H).real();
    KrylovDiagnostics diag;
    for (int k = 0; k < 40; ++k) {
        psi = krylov_expm_apply(H, psi, 0.1, {}, &diag);
    }
    CHECK(std::abs(psi.norm() - 1.0) < 1e-6);
    // H-scale: max |diag| + max coupling row sum
    double diag_max = 0.0, row_max = 0.0;
    const auto& m = H.matrix();
    for (int r = 0; r < m.outerSize(); ++r) {
        double row = 0.0;
        for (Eigen::SparseMatrix<cplx, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it) {
            if (it.row() == it.col()) diag_max = std::max(diag_max, std::abs(it.value()));
            else row += std::abs(it.value());
        }
        row_max = std::max(row_max, row);
    }
    CHECK(std::abs(expect(psi, H).real() - e0) < 1e-6 * (diag_max + row_max));
    CHECK(diag.max_err_est <= 1e-9);
}

TEST_CASE("NonConvergence carries the achieved residual") {
    DickeFockBasis b(6, 6);
    const auto H = build_dicke_hamiltonian(b, {1.0, 40.0, 40.0, 1.0});
    const auto psi0 = coherent_spin_state(b, SpinDirection::PlusX);
    KrylovConfig cfg;
    cfg.m_max = 2;
    cfg.step_tol = 1e-16;
    cfg.dt_min_factor = 0.5; // forbid substepping below dt/2
    CHECK_THROWS_AS((void)krylov_expm_apply(H, psi0, 1.0, cfg), NonConvergenceError);
}

TEST_CASE("tail population and cutoff adaptation") {
    SUBCASE("vacuum shrinks to the floor") {
        DickeFockBasis b(3, 12);
        const auto st = coherent_spin_state(b, SpinDirection::PlusX);
        CutoffPolicy pol;
        const auto out = adapt_cutoff(st, pol);
        CHECK(out.basis.n_max == pol.n_floor);
        CHECK(std::abs(out.norm() - 1.0) < 1e-12);
    }

    SUBCASE("coherent state with mean occupation 4 under n_max = 6 grows") {
        DickeFockBasis b(1, 6);
        const auto st = coherent_boson_state(b, 4.0);
        // Poisson guard-band mass ≈ e⁻⁴(4⁵/5! + 4⁶/6!) ≈ 0.26 ≫ p_tail
        CHECK(tail_population(st, 2) > 0.1);
        CutoffPolicy pol;
        const auto out = adapt_cutoff(st, pol);
        CHECK(out.basis.n_max == 9); // ceil(1.5 × 6)
        // norm unchanged by embedding
        CHECK(std::abs(out.norm() - st.norm()) < 1e-14);
    }

    SUBCASE("growth then immediate shrink is a fixed point") {
        DickeFockBasis b(1, 6);
        const auto st = coherent_boson_state(b, 4.0);
        CutoffPolicy pol;
        const auto grown = adapt_cutoff(st, pol);
        const auto again = adapt_cutoff(grown, pol);
        CHECK(again.basis.n_max == grown.basis.n_max);
    }

    SUBCASE("ceiling violation throws") {
        DickeFockBasis b(1, 6);
        const auto st = coherent_boson_state(b, 4.0);
        CutoffPolicy pol;
        pol.n_ceiling = 6;
        CHECK_THROWS_AS((void)adapt_cutoff(st, pol), CutoffCeilingError);
    }
}

TEST_CASE("evolve_schedule") {
    const std::vector<Observer> obs = standard_observers();

    SUBCASE("empty schedule records initial observables only") {
        DickeFockBasis b(4, 4);
        const auto st = coherent_spin_state(b, SpinDirection::PlusX);
        const auto ts = evolve_schedule(st, {}, obs, 0.1);
        REQUIRE(ts.times.size() == 1);
        CHECK(ts.times[0] == 0.0);
        CHECK(ts.values(0, 0).real() == doctest::Approx(2.0)); // ⟨Sx⟩ = N/2
    }

    SUBCASE("two identical segments match one of summed duration") {
        DickeFockBasis b(6, 8);
        const auto st = coherent_spin_state(b, SpinDirection::PlusX);
        hilbert::CouplingParams p{1.0, 5.0, 5.0, 1.0};

        ProtocolSchedule one;
        one.segments.push_back({1.0, p, HamiltonianKind::Dicke, {}});
        ProtocolSchedule two;
        two.segments.push_back({0.45, p, HamiltonianKind::Dicke, {}});
        two.segments.push_back({0.55, p, HamiltonianKind::Dicke, {}});

        const auto ts1 = evolve_schedule(st, one, obs, 0.1);
        const auto ts2 = evolve_schedule(st, two, obs, 0.1);
        REQUIRE(ts1.times.size() == ts2.times.size());
        CHECK((ts1.values - ts2.values).cwiseAbs().maxCoeff() < 1e-8);
    }

    SUBCASE("squeeze-and-transfer segment agrees with the dense oracle") {
        const int N = 20;
        DickeFockBasis b(N, 14);
        const auto st = coherent_spin_state(b, SpinDirection::PlusX);
        hilbert::CouplingParams p{1.0, 5.0, 5.0, 1.0};
        ProtocolSchedule sched;
        sched.segments.push_back({0.6, p, HamiltonianKind::Dicke, {}});

        EvolveOptions opts;
        opts.cutoff.n_floor = 14; // hold the basis fixed for the dense comparison
        const auto ts = evolve_schedule(st, sched, obs, 0.2, opts);

        const auto H = build_dicke_hamiltonian(b, p).dense();
        const auto sx = build_sx(b);
        Eigen::VectorXcd psi = st.amplitudes;
        for (std::size_t k = 1; k < ts.times.size(); ++k) {
            psi = oracles::dense_expm_apply(H, st.amplitudes, ts.times[k]);
            const double sx_oracle = psi.dot(sx.matrix() * psi).real();
            CHECK(std::abs(ts.values(static_cast<Eigen::Index>(k), 0).real() - sx_oracle) <
                  1e-6);
        }
    }

    SUBCASE("instantaneous z rotation phases the ladder") {
        DickeFockBasis b(4, 2);
        const auto st = coherent_spin_state(b, SpinDirection::PlusX);
        ProtocolSchedule sched;
        ScheduleSegment seg;
        seg.duration = 0.0;
        seg.pre_pulse = RotationPulse{'z', M_PI / 2.0, true};
        sched.segments.push_back(seg);
        const auto ts = evolve_schedule(st, sched, obs, 1.0);
        // rotation about z by π/2 maps the mean spin from +x to +y
        CHECK(ts.final_state.amplitudes.size() == st.amplitudes.size());
        const auto sy = build_sy(b);
        CHECK(expect(ts.final_state, sy).real() == doctest::Approx(2.0).epsilon(1e-10));
    }
}
