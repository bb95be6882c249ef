// test_closed_system.cpp - dissipation-free propagator, symplectic structure and energies
#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "usc/closed_system.hpp"
#include "usc/errors.hpp"

using namespace usc;
using test::near;

namespace {

// [o_p, o_q] for o = (a, b, a', b')
Eigen::Matrix4cd commutator_form() {
    Eigen::Matrix4cd w = Eigen::Matrix4cd::Zero();
    w(0, 2) = w(1, 3) = 1.0;
    w(2, 0) = w(3, 1) = -1.0;
    return w;
}

// classical RK4 on dM/dt = -i K M, an oracle independent of the matrix exponential
Eigen::Matrix4cd rk4_propagator(const ModelParams& p, double t, int steps) {
    const Eigen::Matrix4cd k = cplx(0.0, -1.0) * heisenberg_generator(p).cast<cplx>();
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
    const double h = t / steps;
    for (int s = 0; s < steps; ++s) {
        const Eigen::Matrix4cd k1 = k * m;
        const Eigen::Matrix4cd k2 = k * (m + 0.5 * h * k1);
        const Eigen::Matrix4cd k3 = k * (m + 0.5 * h * k2);
        const Eigen::Matrix4cd k4 = k * (m + h * k3);
        m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return m;
}

cplx physical_m13(double w, double g, double t) {
    const double wp = std::sqrt(w * (w + 2.0 * g)), wm = std::sqrt(w * (w - 2.0 * g));
    return cplx(0.0, g / 2.0) * (std::sin(wm * t) / wm - std::sin(wp * t) / wp);
}

} // namespace

TEST_CASE("propagator basics") {
    const ModelParams p = ModelParams::isotropic(0.3);
    CHECK(heisenberg_propagator(p, 0.0).matrix == Eigen::Matrix4cd::Identity());
    CHECK((heisenberg_generator(p) - hopfield_matrix(p).transpose()).norm() == 0.0);
    CHECK_THROWS_AS(heisenberg_propagator(ModelParams::isotropic(0.6), 1.0), UnstableError);
    // decoupled resonance: pure phases even though the normal modes are degenerate
    const Eigen::Matrix4cd d = heisenberg_propagator(ModelParams::isotropic(0.0), 2.0).matrix;
    const cplx ph = std::exp(cplx(0.0, -2.0));
    CHECK(near(d(0, 0), ph, 1e-14));
    CHECK(near(d(1, 1), ph, 1e-14));
    CHECK(near(d(2, 2), std::conj(ph), 1e-14));
    CHECK(near(d(3, 3), std::conj(ph), 1e-14));
}

TEST_CASE("propagator against RK4 and the small-time series") {
    for (const ModelParams& p : {ModelParams::isotropic(0.3), ModelParams::anisotropic(0.1, 0.35, 1.0, 1e-3, 1.3),
                                 ModelParams::hopfield(1.2), ModelParams::anisotropic(0.0, 0.3)}) {
        for (double t : {0.3, 4.0, 17.0}) {
            const Eigen::Matrix4cd m = heisenberg_propagator(p, t).matrix;
            CHECK((m - rk4_propagator(p, t, 40000)).norm() < 1e-10);
        }
        const double t = 1e-3;
        const Eigen::Matrix4cd k = heisenberg_generator(p).cast<cplx>();
        const cplx i(0.0, 1.0);
        const Eigen::Matrix4cd series = Eigen::Matrix4cd::Identity() - i * t * k - 0.5 * t * t * k * k +
                                        (i * t * t * t / 6.0) * k * k * k;
        CHECK((heisenberg_propagator(p, t).matrix - series).norm() < 1e-11);
    }
}

TEST_CASE("property: symplectic preservation") {
    const Eigen::Matrix4cd w = commutator_form();
    for (const ModelParams& p : {ModelParams::isotropic(0.3), ModelParams::isotropic(0.45), ModelParams::anisotropic(0.4, 0.1),
                                 ModelParams::anisotropic(0.0, 0.3), ModelParams::hopfield(2.0)})
        for (int k = 0; k <= 50; ++k) {
            const Eigen::Matrix4cd m = heisenberg_propagator(p, 1.0 * k).matrix;
            CHECK((m * w * m.transpose() - w).norm() < 1e-10);
            // the creation rows are the conjugates of the annihilation rows, swapped
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 4; ++c) CHECK(near(m(r + 2, (c + 2) % 4), std::conj(m(r, c)), 1e-12));
        }
}

TEST_CASE("M_13 closed form") {
    const double g = 0.3;
    for (double t : {0.5, 3.0, 10.0, 37.0}) {
        const Eigen::Matrix4cd m = heisenberg_propagator(ModelParams::isotropic(g), t).matrix;
        CHECK(near(m(0, 2), physical_m13(1.0, g, t), 1e-12));
        // the two-term printed expression is the momentum-coupled rotation's element
        CHECK(near(printed_m13(1.0, g, t), -physical_m13(1.0, g, t), 1e-12));
        const Eigen::Matrix4cd r = heisenberg_propagator(ModelParams::anisotropic(g, -g), t).matrix;
        CHECK(near(r(0, 2), printed_m13(1.0, g, t), 1e-10));
        CHECK(near(r(0, 3), printed_m14(1.0, g, t), 1e-10));
    }
    const double t = 1e-3;
    CHECK(near(physical_m13(1.0, g, t), cplx(0.0, g * g * t * t * t / 3.0), 1e-15));
}

TEST_CASE("closed-system energies") {
    for (double g : {0.1, 0.2, 0.3, 0.4}) {
        const ModelParams p = ModelParams::isotropic(g);
        const ClosedEnergies e0 = closed_energies(InitialState::PolaritonGround, p, 0.0);
        CHECK(e0.e_b > 0.0);
        for (int k = 0; k <= 100; ++k) {
            const double t = 0.5 * k;
            const ClosedEnergies bv = closed_energies(InitialState::BareVacuum, p, t);
            CHECK(near(bv.e_a, bv.e_b, 1e-12));
            CHECK(bv.e_b >= -1e-14);
            const ClosedEnergies pg = closed_energies(InitialState::PolaritonGround, p, t);
            CHECK(near(pg.e_a, e0.e_a, 1e-12));
            CHECK(near(pg.e_b, e0.e_b, 1e-12));
            const BareMoments m = closed_bare_moments(InitialState::BareVacuum, p, t);
            CHECK(near(m.occ_b, bv.e_b, 1e-14));
            CHECK(m.is_physical());
        }
    }
    // bare vacuum, pure beam splitter: nothing is ever created
    for (double t : {1.0, 10.0})
        CHECK(std::abs(closed_energies(InitialState::BareVacuum, ModelParams::anisotropic(0.3, 0.0), t).e_b) < 1e-14);
    // off resonance the polariton ground is still stationary
    const ModelParams q = ModelParams::anisotropic(0.2, 0.35, 1.0, 1e-3, 1.6);
    const ClosedEnergies q0 = closed_energies(InitialState::PolaritonGround, q, 0.0);
    const ClosedEnergies q1 = closed_energies(InitialState::PolaritonGround, q, 23.0);
    CHECK(near(q0.e_a, q1.e_a, 1e-12));
    CHECK(near(q0.e_b, q1.e_b, 1e-12));
    CHECK_THROWS_AS(closed_energies(InitialState::BareVacuum, ModelParams::isotropic(0.3), -1.0), std::invalid_argument);
}
