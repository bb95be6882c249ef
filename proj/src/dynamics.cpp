// dynamics.cpp - closed-form and integrated normal-mode moment evolution
#include "usc/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "usc/errors.hpp"

namespace usc {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<cplx>;

MomentState from_vector(const State& x, double t) {
    MomentState s;
    s.time = t;
    s.m_pp = x[0];
    s.m_mm = x[1];
    s.m_pm = x[2];
    s.n_p = x[3];
    s.n_m = x[4];
    s.c_pm = x[5];
    return s;
}

State to_vector(const MomentState& s) { return {s.m_pp, s.m_mm, s.m_pm, s.n_p, s.n_m, s.c_pm}; }

} // namespace

Eigen::Matrix4cd MomentState::product_matrix() const {
    Eigen::Matrix4cd Q;
    const cplx one = 1.0;
    // rows/cols: A+, A-, A+', A-'
    Q << m_pp, m_pm, n_p + one, std::conj(c_pm),
         m_pm, m_mm, c_pm, n_m + one,
         n_p, c_pm, std::conj(m_pp), std::conj(m_pm),
         std::conj(c_pm), n_m, std::conj(m_pm), std::conj(m_mm);
    return Q;
}

Eigen::Matrix4cd MomentState::gram_matrix() const {
    const Eigen::Matrix4cd Q = product_matrix();
    const int dag[4] = {2, 3, 0, 1};
    Eigen::Matrix4cd R;
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) R(p, q) = Q(dag[p], q);
    return R;
}

double MomentState::min_gram_eigenvalue() const {
    const Eigen::Matrix4cd R = gram_matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es((R + R.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool MomentState::is_physical(double tol) const {
    if (std::abs(n_p.imag()) > 1e-10 || std::abs(n_m.imag()) > 1e-10) return false;
    if (n_p.real() < -1e-10 || n_m.real() < -1e-10) return false;
    return min_gram_eigenvalue() >= -tol;
}

double bose_einstein(double omega, double temperature) {
    if (omega <= 0.0) throw std::invalid_argument("Bose-Einstein occupation needs omega > 0");
    if (temperature < 0.0) throw std::invalid_argument("negative temperature");
    if (temperature == 0.0) return 0.0;
    return 1.0 / std::expm1(omega / temperature);
}

DissipationRates dissipation_rates(const ModelParams& p, const NormalModeBasis& basis) {
    p.validate();
    DissipationRates r;
    for (int j = 0; j < 2; ++j) {
        const double w = basis.omega(j);
        r.weight_sq[j] = basis.weight_sq(j);
        r.occupation[j] = bose_einstein(w, p.temperature);
        r.kappa[j] = p.gamma_a * w * r.weight_sq[j];
    }
    return r;
}

MomentState initial_moments(InitialState kind, const NormalModeBasis& basis) {
    MomentState s;
    if (kind == InitialState::PolaritonGround) return s;
    const HopfieldRow& P = basis.coeffs[PLUS];
    const HopfieldRow& M = basis.coeffs[MINUS];
    s.m_pp = P.t * P.v + P.u * P.w;
    s.m_mm = M.t * M.v + M.u * M.w;
    s.n_p = std::norm(P.v) + std::norm(P.w);
    s.n_m = std::norm(M.v) + std::norm(M.w);
    s.c_pm = std::conj(P.v) * M.v + std::conj(P.w) * M.w;
    s.m_pm = M.t * P.v + M.u * P.w;
    return s;
}

MomentState propagate_analytic(const MomentState& init, const DissipationRates& rates,
                               const NormalModeBasis& basis, double t) {
    if (t < 0.0) throw std::invalid_argument("negative time");
    if (init.steady) return init;
    const double wp = basis.omega_plus, wm = basis.omega_minus;
    const double kp = rates.kappa[PLUS], km = rates.kappa[MINUS];
    const double kbar = (kp + km) / 2.0;
    const cplx I(0.0, 1.0);
    MomentState s;
    s.time = init.time + t;
    s.m_pp = std::exp(-kp * t - 2.0 * I * wp * t) * init.m_pp;
    s.m_mm = std::exp(-km * t - 2.0 * I * wm * t) * init.m_mm;
    s.m_pm = std::exp(-kbar * t - I * (wp + wm) * t) * init.m_pm;
    // written with expm1 so that tiny kappa*t keeps full precision
    s.n_p = init.n_p * std::exp(-kp * t) - rates.occupation[PLUS] * std::expm1(-kp * t);
    s.n_m = init.n_m * std::exp(-km * t) - rates.occupation[MINUS] * std::expm1(-km * t);
    s.c_pm = std::exp(-kbar * t + I * (wp - wm) * t) * init.c_pm;
    return s;
}

Eigen::Matrix<cplx, 6, 6> moment_generator(const DissipationRates& rates, const NormalModeBasis& basis) {
    const double wp = basis.omega_plus, wm = basis.omega_minus;
    const double kp = rates.kappa[PLUS], km = rates.kappa[MINUS];
    const cplx I(0.0, 1.0);
    Eigen::Matrix<cplx, 6, 6> M = Eigen::Matrix<cplx, 6, 6>::Zero();
    M(0, 0) = -2.0 * I * wp - kp;
    M(1, 1) = -2.0 * I * wm - km;
    M(2, 2) = -(kp + km) / 2.0 - I * (wp + wm);
    M(3, 3) = -kp;
    M(4, 4) = -km;
    M(5, 5) = I * (wp - wm) - (kp + km) / 2.0;
    return M;
}

Eigen::Matrix<cplx, 6, 1> moment_source(const DissipationRates& rates) {
    Eigen::Matrix<cplx, 6, 1> Q = Eigen::Matrix<cplx, 6, 1>::Zero();
    Q(3) = rates.kappa[PLUS] * rates.occupation[PLUS];
    Q(4) = rates.kappa[MINUS] * rates.occupation[MINUS];
    return Q;
}

MomentState propagate_numeric(const MomentState& init, const DissipationRates& rates,
                              const NormalModeBasis& basis, double t, double tol) {
    if (t < 0.0) throw std::invalid_argument("negative time");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (init.steady) return init;
    const Eigen::Matrix<cplx, 6, 6> M = moment_generator(rates, basis);
    const Eigen::Matrix<cplx, 6, 1> Q = moment_source(rates);
    auto rhs = [&](const State& x, State& dx, double) {
        for (int k = 0; k < 6; ++k) dx[k] = M(k, k) * x[k] + Q(k);
    };
    State x = to_vector(init);
    if (t == 0.0) return from_vector(x, init.time);
    using stepper_t = odeint::runge_kutta_dopri5<State>;
    try {
        auto stepper = odeint::make_controlled<stepper_t>(1e-12, tol);
        const double wmax = std::max(basis.omega_plus, basis.omega_minus);
        odeint::integrate_adaptive(stepper, rhs, x, 0.0, t, std::min(t, 0.01 / wmax),
                                   [](const State&, double) {});
    } catch (const std::exception& e) {
        throw IntegrationFailure(std::string("moment integration failed: ") + e.what());
    }
    for (const cplx& v : x)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw IntegrationFailure("moment integration produced non-finite values");
    return from_vector(x, init.time + t);
}

MomentState steady_moments(const DissipationRates& rates) {
    if (!(rates.kappa[PLUS] > 0.0) || !(rates.kappa[MINUS] > 0.0))
        throw NoUniqueSteadyState("a normal mode is decoupled from the bath (kappa = 0)");
    MomentState s;
    s.steady = true;
    s.n_p = rates.occupation[PLUS];
    s.n_m = rates.occupation[MINUS];
    return s;
}

} // namespace usc
