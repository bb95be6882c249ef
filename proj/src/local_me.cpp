// local_me.cpp - analytic and integrated moments of the local master equation
#include "usc/local_me.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "usc/dynamics.hpp"
#include "usc/errors.hpp"

namespace usc {

namespace odeint = boost::numeric::odeint;

namespace {

// sin(G u)/G for G^2 = 16 g^2 - gamma^2, continued to sinh for G^2 < 0
double sinc_like(const LocalParams& p, double u) {
    const double G2 = 16.0 * p.g * p.g - p.gamma * p.gamma;
    const double G = std::sqrt(std::abs(G2));
    if (G < 1e-6) return u - G2 * u * u * u / 6.0 + G2 * G2 * std::pow(u, 5) / 120.0;
    if (G2 > 0.0) return std::sin(G * u) / G;
    return std::sinh(G * u) / G;
}

// e^{-rate u} sin(G u)/G; the overdamped branch is combined into decaying
// exponentials so that large times do not overflow
double damped_sinc(const LocalParams& p, double u, double rate) {
    const double G2 = 16.0 * p.g * p.g - p.gamma * p.gamma;
    const double G = std::sqrt(std::abs(G2));
    if (G2 < 0.0 && G >= 1e-6) return (std::exp((G - rate) * u) - std::exp(-(G + rate) * u)) / (2.0 * G);
    return std::exp(-rate * u) * sinc_like(p, u);
}

} // namespace

void LocalParams::validate() const {
    if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
    if (g < 0.0) throw std::invalid_argument("g must be non-negative");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be non-negative");
    if (temperature < 0.0) throw std::invalid_argument("temperature must be non-negative");
}

LocalMoments local_moments(const LocalParams& p, double t) {
    p.validate();
    if (t < 0.0) throw std::invalid_argument("negative time");
    const double N = bose_einstein(p.omega, p.temperature);
    const double e = std::exp(-p.gamma * t / 2.0);
    // es4 = e^{-gamma t/4} sin(Gt/4)/G, es2 = e^{-gamma t/2} sin(Gt/2)/G
    const double es4 = damped_sinc(p, t / 4.0, p.gamma), es2 = damped_sinc(p, t / 2.0, p.gamma);
    LocalMoments m;
    // 1 - e (16g^2 - gamma^2 cos(Gt/2))/G^2 with 1 - cos written as 2 sin^2
    m.n_p = m.n_m = N * (1.0 - e - 2.0 * p.gamma * p.gamma * es4 * es4);
    m.c = N * cplx(p.gamma * es2, 8.0 * p.gamma * p.g * es4 * es4);
    return m;
}

Eigen::Matrix4d local_moment_generator(const LocalParams& p) {
    const double h = p.gamma / 2.0, q = p.gamma / 4.0;
    Eigen::Matrix4d M;
    M << -h, 0.0, -h, 0.0,
         0.0, -h, -h, 0.0,
         -q, -q, -h, -2.0 * p.g,
         0.0, 0.0, 2.0 * p.g, -h;
    return M;
}

Eigen::Vector4d local_moment_source(const LocalParams& p) {
    const double N = bose_einstein(p.omega, p.temperature);
    return Eigen::Vector4d(p.gamma * N / 2.0, p.gamma * N / 2.0, p.gamma * N / 2.0, 0.0);
}

LocalMoments local_moments_numeric(const LocalParams& p, double t, double tol) {
    p.validate();
    if (t < 0.0) throw std::invalid_argument("negative time");
    const Eigen::Matrix4d M = local_moment_generator(p);
    const Eigen::Vector4d Q = local_moment_source(p);
    using State = std::vector<double>;
    State x(4, 0.0);
    auto rhs = [&](const State& y, State& dy, double) {
        for (int i = 0; i < 4; ++i) {
            double s = Q(i);
            for (int j = 0; j < 4; ++j) s += M(i, j) * y[j];
            dy[i] = s;
        }
    };
    if (t > 0.0) {
        try {
            auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-14, tol);
            odeint::integrate_adaptive(stepper, rhs, x, 0.0, t, std::min(t, 0.01));
        } catch (const std::exception& e) {
            throw IntegrationFailure(std::string("local moment integration failed: ") + e.what());
        }
    }
    LocalMoments m;
    m.n_p = x[0];
    m.n_m = x[1];
    m.c = cplx(x[2], x[3]);
    return m;
}

double local_battery_energy(const LocalParams& p, double t) {
    // b = (A+ - A-)/sqrt(2): <b'b> = (n+ + n-)/2 - Re <A+' A->
    const LocalMoments m = local_moments(p, t);
    return p.omega * ((m.n_p + m.n_m) / 2.0 - m.c.real());
}

cplx local_battery_squeezing(const LocalParams& p, double t) {
    p.validate();
    if (t < 0.0) throw std::invalid_argument("negative time");
    // the anomalous moments <A_j^2>, <A+ A-> obey a homogeneous linear system
    // and start at zero in the vacuum, so <b^2> = 0 for all t
    return 0.0;
}

} // namespace usc
