#include "sqz/gaussian.hpp"

#include <cmath>

namespace sqz::gaussian {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double ideal_squeezing(double G, double T_sq) { return std::exp(-2.0 * G * T_sq); }

double finite_size_squeezing(double G, double T_sq, double N) {
    const double x = 2.0 * G * T_sq;
    return std::exp(-x) + std::exp(x) / (3.0 * N);
}

FiniteSizeOptimum finite_size_optimum(double N) {
    return {std::sqrt(4.0 / (3.0 * N)), std::log(3.0 * N) / 4.0};
}

MeanFieldTrajectory meanfield_pulse_trajectory(const MeanFieldPulse& pulse, double t0, double t1,
                                               double dt,
                                               const std::vector<double>& breakpoints) {
    if (dt <= 0.0) throw ConfigError("meanfield_pulse_trajectory: dt must be > 0");
    const auto rhs = [&](double t, double theta, double alpha, double& dtheta, double& dalpha) {
        dtheta = pulse.omega_rabi(t) + 2.0 * pulse.gN * alpha;
        dalpha = -0.5 * pulse.kappa * alpha + 0.5 * pulse.gN * std::sin(theta);
    };

    std::vector<double> stops{t1};
    for (double b : breakpoints) {
        if (b > t0 && b < t1) stops.push_back(b);
    }
    std::sort(stops.begin(), stops.end());

    MeanFieldTrajectory tr;
    double theta = 0.0, alpha = 0.0, t = t0;
    tr.t.push_back(t);
    tr.theta.push_back(theta);
    tr.alpha.push_back(alpha);
    for (double stop : stops) {
        const long steps = std::lround(std::ceil((stop - t) / dt - 1e-12));
        for (long i = 0; i < steps; ++i) {
            const double h = std::min(dt, stop - t);
            double k1t, k1a, k2t, k2a, k3t, k3a, k4t, k4a;
            // evaluate the drive on the half-open window [t, stop)
            const double right = stop - 1e-9 * h;
            rhs(t, theta, alpha, k1t, k1a);
            rhs(std::min(t + 0.5 * h, right), theta + 0.5 * h * k1t, alpha + 0.5 * h * k1a,
                k2t, k2a);
            rhs(std::min(t + 0.5 * h, right), theta + 0.5 * h * k2t, alpha + 0.5 * h * k2a,
                k3t, k3a);
            rhs(std::min(t + h, right), theta + h * k3t, alpha + h * k3a, k4t, k4a);
            theta += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
            alpha += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
            t += h;
            tr.t.push_back(t);
            tr.theta.push_back(theta);
            tr.alpha.push_back(alpha);
        }
        t = stop;
    }
    return tr;
}

CovMatrix4 initial_covariance() {
    CovMatrix4 c;
    c.M.setZero();
    c.M(0, 2) = 1.0;
    c.M(1, 3) = 1.0;
    c.t = 0.0;
    return c;
}

namespace {

// −i g√N × [coupling matrix with −iκ/(2g√N) diagonal entries]; the κ terms
// are folded in after the scaling so gN = 0 stays finite.
Eigen::Matrix4cd drift_matrix(double theta, double gN, double kappa) {
    const double s2 = std::sin(0.5 * theta) * std::sin(0.5 * theta);
    const double c2 = std::cos(0.5 * theta) * std::cos(0.5 * theta);
    Eigen::Matrix4cd F;
    F << 0.0, s2, 0.0, c2,
        s2, 0.0, c2, 0.0,
        0.0, -c2, 0.0, -s2,
        -c2, 0.0, -s2, 0.0;
    F *= cplx(0.0, -gN);
    F(0, 0) = -0.5 * kappa;
    F(2, 2) = -0.5 * kappa;
    return F;
}

Eigen::Matrix4cd diffusion_matrix(double kappa) {
    Eigen::Matrix4cd D = Eigen::Matrix4cd::Zero();
    D(0, 2) = kappa;
    return D;
}

} // namespace

CovMatrix4 evolve_covariance(const CovMatrix4& M0, const std::function<double(double)>& theta,
                             double gN, double kappa, double t0, double t1, double dt) {
    if (dt <= 0.0) throw ConfigError("evolve_covariance: dt must be > 0");
    const Eigen::Matrix4cd D = diffusion_matrix(kappa);
    const auto rhs = [&](double t, const Eigen::Matrix4cd& M) -> Eigen::Matrix4cd {
        const Eigen::Matrix4cd F = drift_matrix(theta(t), gN, kappa);
        return F * M + M * F.transpose() + D;
    };

    CovMatrix4 c = M0;
    double t = t0;
    const long steps = std::lround(std::ceil((t1 - t0) / dt - 1e-12));
    for (long i = 0; i < steps; ++i) {
        const double h = std::min(dt, t1 - t);
        const Eigen::Matrix4cd k1 = rhs(t, c.M);
        const Eigen::Matrix4cd k2 = rhs(t + 0.5 * h, c.M + 0.5 * h * k1);
        const Eigen::Matrix4cd k3 = rhs(t + 0.5 * h, c.M + 0.5 * h * k2);
        const Eigen::Matrix4cd k4 = rhs(t + h, c.M + h * k3);
        c.M += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    c.t = t;
    return c;
}

QuadratureSqueezing squeezing_from_M(const CovMatrix4& c) {
    const double m24 = c.M(1, 3).real();
    const double m42 = c.M(3, 1).real();
    const cplx m22 = c.M(1, 1);
    QuadratureSqueezing q;
    q.xi2 = m24 + m42 - 2.0 * std::abs(m22);
    // minimal quadrature: e^{2iν} anti-aligned with ⟨bb⟩
    q.nu = (m22.real() >= 0.0) ? 0.5 * kPi : 0.0;
    return q;
}

namespace {

// Joint RK4 on (θ, α, M) with a given drive; used by the pulse protocols.
struct PulseState {
    double theta, alpha;
    Eigen::Matrix4cd M;
};

void integrate_phase(PulseState& s, double omega, double gN, double kappa, double duration,
                     double dt) {
    if (duration <= 0.0) return;
    const Eigen::Matrix4cd D = diffusion_matrix(kappa);
    const auto rhs = [&](const PulseState& y, PulseState& dy) {
        dy.theta = omega + 2.0 * gN * y.alpha;
        dy.alpha = -0.5 * kappa * y.alpha + 0.5 * gN * std::sin(y.theta);
        const Eigen::Matrix4cd F = drift_matrix(y.theta, gN, kappa);
        dy.M = F * y.M + y.M * F.transpose() + D;
    };
    double t = 0.0;
    const long steps = std::lround(std::ceil(duration / dt - 1e-12));
    PulseState k1, k2, k3, k4, tmp;
    for (long i = 0; i < steps; ++i) {
        const double h = std::min(dt, duration - t);
        rhs(s, k1);
        tmp = {s.theta + 0.5 * h * k1.theta, s.alpha + 0.5 * h * k1.alpha,
               s.M + 0.5 * h * k1.M};
        rhs(tmp, k2);
        tmp = {s.theta + 0.5 * h * k2.theta, s.alpha + 0.5 * h * k2.alpha,
               s.M + 0.5 * h * k2.M};
        rhs(tmp, k3);
        tmp = {s.theta + h * k3.theta, s.alpha + h * k3.alpha, s.M + h * k3.M};
        rhs(tmp, k4);
        s.theta += h / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
        s.alpha += h / 6.0 * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha);
        s.M += h / 6.0 * (k1.M + 2.0 * k2.M + 2.0 * k3.M + k4.M);
        t += h;
    }
}

} // namespace

double pulse_protocol_squeezing(double gN, double kappa, double T_sq, double omega_rabi,
                                double T_drive, double T_tr, double dt) {
    PulseState s{0.0, 0.0, initial_covariance().M};
    integrate_phase(s, 0.0, gN, kappa, T_sq, dt);
    integrate_phase(s, omega_rabi, gN, kappa, T_drive, dt);
    integrate_phase(s, 0.0, gN, kappa, T_tr, dt);
    CovMatrix4 c{s.M, T_sq + T_drive + T_tr};
    return squeezing_from_M(c).xi2;
}

double instantaneous_pulse_squeezing(double gN, double kappa, double T_sq, double T_tr,
                                     double dt) {
    PulseState s{0.0, 0.0, initial_covariance().M};
    integrate_phase(s, 0.0, gN, kappa, T_sq, dt);
    s.theta = kPi;
    integrate_phase(s, 0.0, gN, kappa, T_tr, dt);
    CovMatrix4 c{s.M, T_sq + T_tr};
    return squeezing_from_M(c).xi2;
}

FinitePulseScan finite_pulse_scan(double gN, double kappa, double T_sq, double omega_rabi,
                                  const std::vector<double>& dT_drive,
                                  const std::vector<double>& dT_tr, double dt) {
    const double T_pi = kPi / omega_rabi;
    const double T_tr_star = 0.25 * kPi / gN;

    FinitePulseScan scan;
    scan.dT_drive = dT_drive;
    scan.dT_tr = dT_tr;
    scan.xi2.resize(static_cast<Eigen::Index>(dT_drive.size()),
                    static_cast<Eigen::Index>(dT_tr.size()));
    scan.xi2_min = std::numeric_limits<double>::infinity();
    scan.dT_drive_min = scan.dT_tr_min = 0.0;

    for (std::size_t i = 0; i < dT_drive.size(); ++i) {
        const double T_drive = T_pi * (1.0 + dT_drive[i]);
        // squeeze + drive stages are shared across the T_tr axis
        PulseState base{0.0, 0.0, initial_covariance().M};
        integrate_phase(base, 0.0, gN, kappa, T_sq, dt);
        integrate_phase(base, omega_rabi, gN, kappa, std::max(T_drive, 0.0), dt);
        double prev_T_tr = 0.0;
        PulseState s = base;
        for (std::size_t j = 0; j < dT_tr.size(); ++j) {
            const double T_tr = std::max(T_tr_star * (1.0 + dT_tr[j]), 0.0);
            integrate_phase(s, 0.0, gN, kappa, T_tr - prev_T_tr, dt);
            prev_T_tr = T_tr;
            CovMatrix4 c{s.M, 0.0};
            const double xi2 = squeezing_from_M(c).xi2;
            scan.xi2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xi2;
            if (xi2 < scan.xi2_min) {
                scan.xi2_min = xi2;
                scan.dT_drive_min = dT_drive[i];
                scan.dT_tr_min = dT_tr[j];
            }
        }
    }
    return scan;
}

namespace {

// dP/dt = G(t) P with the piecewise mean-field inversion
Eigen::Matrix2cd fluctuation_generator(double z_over_half_N, double gN, double kappa,
                                       double gamma) {
    Eigen::Matrix2cd G;
    G(0, 0) = -0.5 * gamma;
    G(0, 1) = cplx(0.0, gN * z_over_half_N);
    G(1, 0) = cplx(0.0, -gN);
    G(1, 1) = -0.5 * kappa;
    return G;
}

Eigen::Matrix2cd integrate_propagator(double gN, double kappa, double gamma,
                                      const std::function<double(double)>& z_over_half_N,
                                      double t0, double t1, double dt) {
    Eigen::Matrix2cd P = Eigen::Matrix2cd::Identity();
    const auto rhs = [&](double t, const Eigen::Matrix2cd& Y) -> Eigen::Matrix2cd {
        return fluctuation_generator(z_over_half_N(t), gN, kappa, gamma) * Y;
    };
    double t = t0;
    const long steps = std::lround(std::ceil((t1 - t0) / dt - 1e-12));
    for (long i = 0; i < steps; ++i) {
        const double h = std::min(dt, t1 - t);
        const Eigen::Matrix2cd k1 = rhs(t, P);
        const Eigen::Matrix2cd k2 = rhs(t + 0.5 * h, P + 0.5 * h * k1);
        const Eigen::Matrix2cd k3 = rhs(t + 0.5 * h, P + 0.5 * h * k2);
        const Eigen::Matrix2cd k4 = rhs(t + h, P + h * k3);
        P += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    return P;
}

} // namespace

PropagatorPair spontemission_propagators(double gN, double kappa, double gamma, double T_sq,
                                         double T_tr, double dt) {
    if (dt <= 0.0) throw ConfigError("spontemission_propagators: dt must be > 0");
    PropagatorPair pair;
    pair.gamma = gamma;
    pair.kappa = kappa;
    pair.gN = gN;
    pair.T_sq = T_sq;
    pair.T_tr = T_tr;

    // z_mf = N e^{−γt} − N/2 before the pulse
    const auto z_pre = [&](double t) { return 2.0 * std::exp(-gamma * t) - 1.0; };
    // z_mf = N(1−e^{−γT_sq}) e^{−γ(t−T_sq)} − N/2 after the pulse
    const auto z_post = [&](double t) {
        return 2.0 * (1.0 - std::exp(-gamma * T_sq)) * std::exp(-gamma * (t - T_sq)) - 1.0;
    };

    pair.L = integrate_propagator(gN, kappa, gamma, z_pre, 0.0, T_sq, dt);
    pair.M = integrate_propagator(gN, kappa, gamma, z_post, T_sq, T_sq + T_tr, dt);
    return pair;
}

SpontEmissionResult spontemission_squeezing(const PropagatorPair& pair) {
    const cplx L11 = pair.L(0, 0), L21 = pair.L(1, 0);
    const cplx M11 = pair.M(0, 0), M12 = pair.M(0, 1);
    const double eT = std::exp(-pair.gamma * pair.T_sq);
    const double contrast = 1.0 - 2.0 * (1.0 - eT) * std::exp(-pair.gamma * pair.T_tr);

    const double aM11 = std::abs(M11), aM12 = std::abs(M12);
    const double aL11 = std::abs(L11), aL21 = std::abs(L21);
    const double diff = aM11 * aL11 - aM12 * aL21;

    SpontEmissionResult r;
    r.var_min_norm = -2.0 * (2.0 * eT - 1.0) * aM11 * aM11 + contrast + 2.0 * diff * diff;
    r.contrast = contrast;
    if (contrast <= 0.0) {
        throw ContrastLossError("spontemission_squeezing: contrast " +
                                std::to_string(contrast) + " <= 0");
    }
    r.xi2 = r.var_min_norm / (contrast * contrast);
    return r;
}

double cavity_analytic_squeezing(double kappa_over_gN, double eps, double GT_sq) {
    const double u = 0.25 * kappa_over_gN;
    const double e1 = 1.0 + u - eps;
    const double br = std::exp(GT_sq) * (u - eps) + std::exp(-GT_sq);
    return kPi * kappa_over_gN / 8.0 + 1.0 - e1 * e1 + br * br;
}

CavityOptimum cavity_analytic_optimum(double kappa_over_gN) {
    CavityOptimum opt;
    opt.xi2_opt = 0.4 * kappa_over_gN;
    opt.eps_opt = 0.25 * kappa_over_gN;
    opt.two_GT_sq_min = std::log(2.5 / kappa_over_gN);
    return opt;
}

} // namespace sqz::gaussian
