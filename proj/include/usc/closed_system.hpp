// closed_system.hpp - dissipation-free Heisenberg dynamics of the two modes
#pragma once

#include <utility>

#include <Eigen/Dense>

#include "usc/dynamics.hpp"
#include "usc/observables.hpp"
#include "usc/spectrum.hpp"

namespace usc {

struct HeisenbergPropagator {
    double time = 0.0;
    Eigen::Matrix4cd matrix = Eigen::Matrix4cd::Identity(); // acts on (a, b, a', b')
};

// d o/dt = -i Kd o for o = (a, b, a', b'); Kd is the transpose of hopfield_matrix.
Eigen::Matrix4d heisenberg_generator(const ModelParams& p);

HeisenbergPropagator heisenberg_propagator(const ModelParams& p, double t);

// Printed resonant closed forms of M_13, M_14 (1-based indices).
cplx printed_m13(double omega, double g, double t);
cplx printed_m14(double omega, double g, double t);

struct ClosedEnergies {
    double e_a = 0.0;
    double e_b = 0.0;
};

ClosedEnergies closed_energies(InitialState init, const ModelParams& p, double t);
// second moments of a and b at time t (the state stays Gaussian with zero mean)
BareMoments closed_bare_moments(InitialState init, const ModelParams& p, double t);

} // namespace usc
