// test_util.hpp - tolerance helpers and independent oracles shared by the tests
#pragma once

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "usc/spectrum.hpp"

namespace test {

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }
inline bool near(std::complex<double> a, std::complex<double> b, double tol) { return std::abs(a - b) <= tol; }
inline bool rel_near(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-300); }

// Position-space oracle for x-x coupled oscillators (g_bs = g_sq, optional A^2 term).
// H = 1/2 p'T p + 1/2 x'V x with T = diag(wa, wb), V = [[wa + 4D, 2g], [2g, wb]], x = (a + a')/sqrt(2).
// Mass-weighting gives normal frequencies sqrt(eig(T^1/2 V T^1/2)) and
// a + a' = sum_j sqrt(wa / W_j) O_aj (A_j + A_j'), so |W_j|^2 = wa O_aj^2 / W_j.
struct PositionSpaceModes {
    double omega_plus, omega_minus;
    double weight_sq_plus, weight_sq_minus;
};

inline PositionSpaceModes position_space_modes(double wa, double wb, double g, double D) {
    Eigen::Matrix2d sq_t = Eigen::Vector2d(std::sqrt(wa), std::sqrt(wb)).asDiagonal();
    Eigen::Matrix2d v;
    v << wa + 4.0 * D, 2.0 * g, 2.0 * g, wb;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sq_t * v * sq_t);
    const Eigen::Vector2d w2 = es.eigenvalues(); // ascending
    const double wm = std::sqrt(w2(0)), wp = std::sqrt(w2(1));
    const double om = es.eigenvectors()(0, 0), op = es.eigenvectors()(0, 1);
    return {wp, wm, wa * op * op / wp, wa * om * om / wm};
}

// H = 1/2 z'h z in (x_a, x_b, p_a, p_b)
inline Eigen::Matrix4d quadrature_matrix(const usc::ModelParams& p) {
    const double gx = p.g_bs + p.g_sq, gp = p.g_bs - p.g_sq;
    Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
    h(0, 0) = p.omega_a + 4.0 * p.diamag_D;
    h(1, 1) = p.omega_b;
    h(0, 1) = h(1, 0) = gx;
    h(2, 2) = p.omega_a;
    h(3, 3) = p.omega_b;
    h(2, 3) = h(3, 2) = gp;
    return h;
}

// Normal frequencies of a general quadratic form from the classical dynamical matrix;
// independent of the Hopfield ladder-operator route.
inline std::pair<double, double> quadrature_frequencies(const usc::ModelParams& p) {
    const Eigen::Matrix4d h = quadrature_matrix(p);
    Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
    j.block<2, 2>(0, 2) = Eigen::Matrix2d::Identity();
    j.block<2, 2>(2, 0) = -Eigen::Matrix2d::Identity();
    const Eigen::Vector4cd ev = (j * h).eigenvalues();
    std::vector<double> w;
    for (int k = 0; k < 4; ++k)
        if (ev(k).imag() > 0) w.push_back(ev(k).imag());
    std::sort(w.begin(), w.end());
    if (w.size() != 2) return {NAN, NAN};
    return {w[1], w[0]};
}

// Random stable parameter draw covering the three model families: real frequencies
// alone admit dynamically stable but unbounded forms, so h must also be positive definite.
inline usc::ModelParams random_stable(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        usc::ModelParams p;
        p.omega_a = 0.3 + 2.7 * u(rng);
        p.temperature = 2.0 * u(rng);
        const int family = static_cast<int>(3.0 * u(rng));
        const double gc = std::sqrt(p.omega_a) / 2.0;
        if (family == 0) {
            p.g_bs = p.g_sq = (0.02 + 0.95 * u(rng)) * gc;
        } else if (family == 1) {
            p.g_bs = 0.9 * u(rng);
            p.g_sq = 0.9 * u(rng);
        } else {
            p.g_bs = p.g_sq = 0.05 + 2.0 * u(rng);
            p.diamag_D = p.g_bs * p.g_bs;
        }
        const auto [wp, wm] = quadrature_frequencies(p);
        const double h_min = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(quadrature_matrix(p)).eigenvalues()(0);
        if (std::isfinite(wm) && wm > 1e-3 && wp - wm > 1e-3 && h_min > 1e-6) return p;
    }
}

} // namespace test
