// observables.hpp - bare-mode moments and battery figures of merit
#pragma once

#include <optional>

#include <Eigen/Dense>

#include "usc/dynamics.hpp"
#include "usc/spectrum.hpp"

namespace usc {

struct BareMoments {
    cplx mean_b{};
    double occ_b = 0.0;
    cplx sq_b{};
    double occ_a = 0.0;
    cplx sq_a{};
    cplx cross_nab{}; // <a'b>
    cplx cross_ab{};  // <ab>

    // M of the single-mode passive-state energy; >= 1 for physical states
    double passive_M() const;
    bool is_physical(double tol = 1e-8) const;
};

struct BatteryReport {
    double energy_b = 0.0;
    double stored = 0.0;
    double passive = 0.0;
    double ergotropy = 0.0;
    std::optional<double> ratio; // empty when nothing was stored
};

// o = (a, b, a', b') = L d with d = (A+, A-, A+', A-')
Eigen::Matrix4cd normal_to_bare_map(const NormalModeBasis& basis);
// <o_p o_q> for the bare operators
Eigen::Matrix4cd bare_product_matrix(const MomentState& state, const NormalModeBasis& basis);

BareMoments normal_to_bare(const MomentState& state, const NormalModeBasis& basis);
BareMoments bare_moments_from_products(const Eigen::Matrix4cd& products);

BatteryReport battery_report(const BareMoments& bare, double e_b_initial, double omega_b = 1.0);

double ergotropy_small_x(const BareMoments& bare, double omega_b = 1.0);
double small_x_parameter(const BareMoments& bare);

enum class ClosedFormModel { Isotropic, Anisotropic, HopfieldA2 };

double steady_stored_energy_closed(const ModelParams& p, InitialState init, ClosedFormModel model);
// PolaritonGround transient; t may be +infinity
double transient_stored_energy_closed(const ModelParams& p, double t, ClosedFormModel model);
// Closed-form steady M of the resonant isotropic model (PolaritonGround or any init, t = inf)
double isotropic_steady_M_closed(const ModelParams& p);
// A^2 model M(t) from the PolaritonGround state; t may be +infinity
double a2_model_M(const ModelParams& p, double t);

// Pipeline helpers used throughout: battery report at time t (or steady when t is +inf).
BatteryReport battery_at(const ModelParams& p, const NormalModeBasis& basis, InitialState init,
                         double t);

} // namespace usc
