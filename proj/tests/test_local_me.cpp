// test_local_me.cpp - weak-coupling local master equation baseline
#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "usc/dynamics.hpp"
#include "usc/local_me.hpp"
#include "usc/observables.hpp"

using namespace usc;
using test::near;

namespace {

// Oracle in the bare basis: (n_a, n_b, X = <a'b>) from the Lindblad equation with
// H = w (a'a + b'b) + g (ab' + a'b), rates gamma (N + 1) on a and gamma N on a'.
struct BareLocal {
    double na = 0.0, nb = 0.0;
    cplx x{};
};

BareLocal bare_local_rk4(const LocalParams& p, double t, double h) {
    const double n = bose_einstein(p.omega, p.temperature);
    const cplx i(0.0, 1.0);
    auto rhs = [&](const BareLocal& s) {
        BareLocal d;
        const double flow = (i * p.g * (std::conj(s.x) - s.x)).real(); // i g (<b'a> - <a'b>)
        d.na = flow - p.gamma * s.na + p.gamma * n;
        d.nb = -flow;
        d.x = i * p.g * (s.nb - s.na) - 0.5 * p.gamma * s.x;
        return d;
    };
    auto axpy = [](const BareLocal& s, double a, const BareLocal& d) {
        return BareLocal{s.na + a * d.na, s.nb + a * d.nb, s.x + a * d.x};
    };
    BareLocal s;
    const int steps = static_cast<int>(std::ceil(t / h));
    const double dt = t / steps;
    for (int k = 0; k < steps; ++k) {
        const BareLocal k1 = rhs(s), k2 = rhs(axpy(s, dt / 2, k1)), k3 = rhs(axpy(s, dt / 2, k2)), k4 = rhs(axpy(s, dt, k3));
        s.na += dt / 6 * (k1.na + 2 * k2.na + 2 * k3.na + k4.na);
        s.nb += dt / 6 * (k1.nb + 2 * k2.nb + 2 * k3.nb + k4.nb);
        s.x += dt / 6 * (k1.x + 2. * k2.x + 2. * k3.x + k4.x);
    }
    return s;
}

LocalParams lp(double g, double gamma, double T = 1.0) {
    LocalParams p;
    p.g = g;
    p.gamma = gamma;
    p.temperature = T;
    return p;
}

} // namespace

TEST_CASE("vacuum start and long-time limit") {
    const LocalParams p = lp(0.3, 1e-3);
    const LocalMoments z = local_moments(p, 0.0);
    CHECK(z.n_p == 0.0);
    CHECK(z.n_m == 0.0);
    CHECK(z.c == cplx(0.0));
    const LocalMoments l = local_moments(p, 1e6);
    const double n = bose_einstein(1.0, 1.0);
    CHECK(near(l.n_p, n, 1e-10));
    CHECK(near(l.n_m, n, 1e-10));
    CHECK(std::abs(l.c) < 1e-10);
    CHECK(near(local_battery_energy(p, 1e7), 0.581977, 1e-6));
    CHECK(near(local_battery_energy(lp(0.05, 0.5), 1e7), 1.0 / (std::exp(1.0) - 1.0), 1e-10));
}

TEST_CASE("closed form against the hybrid-mode integrator and the bare-basis oracle") {
    for (const LocalParams& p : {lp(0.3, 1e-3), lp(0.05, 0.5), lp(0.1, 0.4), lp(0.2, 0.1, 2.0)}) {
        CAPTURE(p.g);
        CAPTURE(p.gamma);
        for (double t : {1.0, 50.0, 700.0}) {
            const LocalMoments a = local_moments(p, t);
            const LocalMoments n = local_moments_numeric(p, t);
            CHECK(near(a.n_p, n.n_p, 1e-8));
            CHECK(near(a.n_m, n.n_m, 1e-8));
            CHECK(near(a.c, n.c, 1e-8));
            const BareLocal o = bare_local_rk4(p, t, 0.01);
            CHECK(near(local_battery_energy(p, t), p.omega * o.nb, 1e-9));
            CHECK(near(a.n_p + a.n_m, o.na + o.nb, 1e-9));
            CHECK(near(a.n_p - a.n_m, 2.0 * o.x.real(), 1e-9));
        }
    }
    const LocalParams p = lp(0.3, 1e-3);
    const LocalMoments a = local_moments(p, 1e4);
    const LocalMoments n = local_moments_numeric(p, 1e4);
    CHECK(near(a.n_p, n.n_p, 1e-8));
    CHECK(near(a.n_m, n.n_m, 1e-8));
    CHECK(near(a.c, n.c, 1e-8));
}

TEST_CASE("damping regimes") {
    SUBCASE("overdamped energy transfer is monotone") {
        const LocalParams p = lp(0.05, 0.5);
        CHECK(p.overdamped());
        double last = -1.0;
        for (int k = 0; k < 500; ++k) {
            const double e = local_battery_energy(p, std::pow(10.0, -1.0 + 6.0 * k / 499.0));
            CHECK(e >= last);
            last = e;
        }
    }
    SUBCASE("underdamped charging rate oscillates while the energy never decreases") {
        // dE/dt is proportional to a squared sine: a staircase, not a return of energy
        const LocalParams p = lp(0.3, 1e-3);
        CHECK_FALSE(p.overdamped());
        int rate_minima = 0;
        double e_prev = local_battery_energy(p, 0.0), r2 = -1.0, r1 = -1.0;
        for (int k = 1; k <= 3000; ++k) {
            const double e = local_battery_energy(p, 0.01 * k);
            CHECK(e >= e_prev - 1e-15);
            const double rate = (e - e_prev) / 0.01;
            if (k >= 3 && r1 < r2 && r1 < rate) ++rate_minima;
            r2 = r1;
            r1 = rate;
            e_prev = e;
        }
        CHECK(rate_minima >= 2);
    }
    SUBCASE("branches meet at critical damping") {
        const double g = 0.05, eps = 1e-6;
        for (double t : {3.0, 30.0, 300.0}) {
            const double crit = local_battery_energy(lp(g, 4.0 * g), t);
            CHECK(near(local_battery_energy(lp(g, 4.0 * g + eps), t), crit, 1e-5));
            CHECK(near(local_battery_energy(lp(g, 4.0 * g - eps), t), crit, 1e-5));
            CHECK(near(crit, bare_local_rk4(lp(g, 4.0 * g), t, 0.01).nb, 1e-8));
        }
    }
}

TEST_CASE("local battery state carries no ergotropy") {
    for (const LocalParams& p : {lp(0.3, 1e-3), lp(0.05, 0.5)})
        for (double t : {0.0, 1.0, 10.0, 1e3, 1e5}) {
            const cplx sq = local_battery_squeezing(p, t);
            CHECK(sq == cplx(0.0));
            BareMoments m;
            m.occ_b = local_battery_energy(p, t) / p.omega;
            m.sq_b = sq;
            CHECK(std::abs(battery_report(m, 0.0, p.omega).ergotropy) < 1e-12);
        }
}

TEST_CASE("population and coherence sectors couple only in the local model") {
    const Eigen::Matrix4d l = local_moment_generator(lp(0.3, 1e-3));
    CHECK(l.block<2, 2>(0, 2).norm() > 1e-6);
    CHECK(l.block<2, 2>(2, 0).norm() > 1e-6);
    const ModelParams p = ModelParams::isotropic(0.3);
    const NormalModeBasis b = diagonalize(p);
    const auto m = moment_generator(dissipation_rates(p, b), b);
    CHECK(m.block<3, 3>(3, 0).norm() == 0.0);
    CHECK(m.block<3, 3>(0, 3).norm() == 0.0);
    const Eigen::Vector4d q = local_moment_source(lp(0.3, 1e-3));
    CHECK(q(0) > 0.0);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(local_moments(lp(-0.1, 1e-3), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(local_moments(lp(0.1, -1e-3), 1.0), std::invalid_argument);
    LocalParams p = lp(0.1, 1e-3);
    p.omega = 0.0;
    CHECK_THROWS_AS(local_battery_energy(p, 1.0), std::invalid_argument);
}
