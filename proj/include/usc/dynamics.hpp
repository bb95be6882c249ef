// dynamics.hpp - second moments of the normal modes under the global master equation
#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "usc/spectrum.hpp"

namespace usc {

enum class InitialState { BareVacuum, PolaritonGround };

struct MomentState {
    double time = 0.0;
    bool steady = false; // t = +infinity; `time` is then meaningless
    cplx m_pp{}, m_mm{}, m_pm{}; // <A+^2>, <A-^2>, <A+ A->
    cplx n_p{}, n_m{};           // <A+'A+>, <A-'A->
    cplx c_pm{};                 // <A+'A->

    // Q(p,q) = <d_p d_q> with d = (A+, A-, A+', A-')
    Eigen::Matrix4cd product_matrix() const;
    // R(p,q) = <d_p' d_q>; positive semidefinite for any physical state
    Eigen::Matrix4cd gram_matrix() const;
    double min_gram_eigenvalue() const;
    bool is_physical(double tol = 1e-8) const;
};

struct DissipationRates {
    std::array<double, 2> weight_sq{}; // |W_j|^2
    std::array<double, 2> occupation{}; // N(w_j)
    std::array<double, 2> kappa{};      // gamma w_j |W_j|^2
};

double bose_einstein(double omega, double temperature);

DissipationRates dissipation_rates(const ModelParams& p, const NormalModeBasis& basis);

MomentState initial_moments(InitialState kind, const NormalModeBasis& basis);

MomentState propagate_analytic(const MomentState& init, const DissipationRates& rates,
                               const NormalModeBasis& basis, double t);

// Direct dopri5 integration of the diagonal linear system; `tol` is relative.
MomentState propagate_numeric(const MomentState& init, const DissipationRates& rates,
                              const NormalModeBasis& basis, double t, double tol = 1e-9);

MomentState steady_moments(const DissipationRates& rates);

// Diagonal of the generator acting on (m_pp, m_mm, m_pm, n_p, n_m, c_pm) and its source.
Eigen::Matrix<cplx, 6, 6> moment_generator(const DissipationRates& rates, const NormalModeBasis& basis);
Eigen::Matrix<cplx, 6, 1> moment_source(const DissipationRates& rates);

} // namespace usc
