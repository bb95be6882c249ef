// local_me.hpp - weak-coupling baseline: local master equation on the charger
//
// H = w (a'a + b'b) + g (ab' + a'b), bath on a with rates gamma (N+1) and gamma N.
// Hybrid modes A+- = (a +- b)/sqrt(2).
#pragma once

#include <Eigen/Dense>

#include "usc/spectrum.hpp"

namespace usc {

struct LocalParams {
    double omega = 1.0;
    double g = 0.0;
    double gamma = 1e-3;
    double temperature = 1.0;

    void validate() const;
    bool overdamped() const { return gamma > 4.0 * g; }
};

struct LocalMoments {
    double n_p = 0.0; // <A+'A+>
    double n_m = 0.0; // <A-'A->
    cplx c{};         // <A- A+'>
};

// Closed form from the vacuum |00>; both damping regimes and the critical point.
LocalMoments local_moments(const LocalParams& p, double t);
// Direct dopri5 integration of the coupled population/coherence equations.
LocalMoments local_moments_numeric(const LocalParams& p, double t, double tol = 1e-10);

double local_battery_energy(const LocalParams& p, double t);
// <b^2> and <b> vanish identically in this model
cplx local_battery_squeezing(const LocalParams& p, double t);

// Generator of (n+, n-, Re c, Im c) with its source. The off-diagonal
// population/coherence block is what distinguishes it from the global model.
Eigen::Matrix4d local_moment_generator(const LocalParams& p);
Eigen::Vector4d local_moment_source(const LocalParams& p);

} // namespace usc
