// closed_system.cpp - exact 4x4 propagator and charger/battery energies
#include "usc/closed_system.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "usc/errors.hpp"
#include "usc/observables.hpp"

namespace usc {

namespace {

void require_stable(const ModelParams& p) {
    Eigen::EigenSolver<Eigen::Matrix4d> es(hopfield_matrix(p), false);
    for (int k = 0; k < 4; ++k) {
        const cplx lam = es.eigenvalues()(k);
        if (std::abs(lam.imag()) > 1e-10 * std::abs(lam.real()) || std::abs(lam) < 1e-14)
            throw UnstableError("closed dynamics is unstable (non-real frequency)");
    }
}

// <o_p o_q> of the chosen initial state, o = (a, b, a', b')
Eigen::Matrix4cd initial_products(InitialState init, const ModelParams& p) {
    if (init == InitialState::BareVacuum) {
        Eigen::Matrix4cd S = Eigen::Matrix4cd::Zero();
        S(0, 2) = 1.0;
        S(1, 3) = 1.0;
        return S;
    }
    const NormalModeBasis basis = diagonalize_or_bare(p);
    return bare_product_matrix(initial_moments(InitialState::PolaritonGround, basis), basis);
}

} // namespace

Eigen::Matrix4d heisenberg_generator(const ModelParams& p) { return hopfield_matrix(p).transpose(); }

HeisenbergPropagator heisenberg_propagator(const ModelParams& p, double t) {
    p.validate();
    require_stable(p);
    HeisenbergPropagator out;
    out.time = t;
    const Eigen::Matrix4cd A = cplx(0.0, -t) * heisenberg_generator(p).cast<cplx>();
    out.matrix = A.exp();
    return out;
}

cplx printed_m13(double w, double g, double t) {
    const double wp = std::sqrt(w * (2.0 * g + w)), wm = std::sqrt(w * (-2.0 * g + w));
    const cplx I(0.0, 1.0);
    return I * g * (g - w - wm) * std::sin(wm * t) / ((w + wm) * (-2.0 * g + w + wm)) +
           I * g * (g + w + wp) * std::sin(wp * t) / ((w + wp) * (2.0 * g + w + wp));
}

cplx printed_m14(double w, double g, double t) {
    const double wp = std::sqrt(w * (2.0 * g + w)), wm = std::sqrt(w * (-2.0 * g + w));
    const cplx I(0.0, 1.0);
    return -I * g * (g - w - wm) * std::sin(wm * t) / ((w + wm) * (-2.0 * g + w + wm)) +
           I * g * (g + w + wp) * std::sin(wp * t) / ((w + wp) * (2.0 * g + w + wp));
}

namespace {

// <o_p(t) o_q(t)> = sum_rs M_pr M_qs S_rs
Eigen::Matrix4cd evolved_products(InitialState init, const ModelParams& p, double t) {
    if (t < 0.0) throw std::invalid_argument("negative time");
    const Eigen::Matrix4cd M = heisenberg_propagator(p, t).matrix;
    return M * initial_products(init, p) * M.transpose();
}

} // namespace

BareMoments closed_bare_moments(InitialState init, const ModelParams& p, double t) {
    return bare_moments_from_products(evolved_products(init, p, t));
}

ClosedEnergies closed_energies(InitialState init, const ModelParams& p, double t) {
    const Eigen::Matrix4cd Qt = evolved_products(init, p, t);
    ClosedEnergies e;
    e.e_a = p.omega_a * Qt(2, 0).real();
    e.e_b = p.omega_b * Qt(3, 1).real();
    return e;
}

} // namespace usc
