// spectrum.cpp - Hopfield/Bogoliubov diagonalization of two coupled modes
#include "usc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "usc/errors.hpp"

namespace usc {

namespace {

constexpr double kImagTol = 1e-10;   // |Im w| < kImagTol |Re w| counts as real
constexpr double kDegenerateTol = 1e-9;

using Vec4c = Eigen::Matrix<cplx, 4, 1>;

bool finite_all(const ModelParams& p) {
    return std::isfinite(p.omega_a) && std::isfinite(p.omega_b) && std::isfinite(p.g_bs) &&
           std::isfinite(p.g_sq) && std::isfinite(p.diamag_D) && std::isfinite(p.gamma_a) &&
           std::isfinite(p.temperature);
}

// symplectic product <x,y> = t*t' + u*u' - v*v' - w*w'
cplx sdot(const Vec4c& x, const Vec4c& y) {
    return std::conj(x(0)) * y(0) + std::conj(x(1)) * y(1) - std::conj(x(2)) * y(2) -
           std::conj(x(3)) * y(3);
}

// coefficient vector of A' written as an annihilation-type row: (v*, w*, t*, u*)
Vec4c dual(const Vec4c& x) {
    Vec4c d;
    d << std::conj(x(2)), std::conj(x(3)), std::conj(x(0)), std::conj(x(1));
    return d;
}

HopfieldRow to_row(const Vec4c& x) { return {x(0), x(1), x(2), x(3)}; }

Vec4c fix_phase(Vec4c x) {
    cplx ref;
    if (std::abs(x(3)) > 1e-12) {
        ref = x(3);
    } else {
        ref = std::abs(x(0)) >= std::abs(x(1)) ? x(0) : x(1);
    }
    if (std::abs(ref) > 0.0) x *= std::conj(ref) / std::abs(ref);
    return x;
}

Vec4c normalize(Vec4c x) {
    const double n = sdot(x, x).real();
    if (!(n > 0.0)) throw UnstableError("normal mode with non-positive symplectic norm");
    return x / std::sqrt(n);
}

NormalModeBasis assemble(double wp, Vec4c xp, double wm, Vec4c xm) {
    if (wm > wp) {
        std::swap(wp, wm);
        std::swap(xp, xm);
    }
    xp = normalize(xp);
    // remove rounding-level violations of [A+,A-'] = 0 and [A+,A-] = 0
    xm = xm - sdot(xp, xm) * xp;
    const Vec4c dp = dual(xp);
    xm = xm + sdot(dp, xm) * dp;
    xm = normalize(xm);

    NormalModeBasis b;
    b.omega_plus = wp;
    b.omega_minus = wm;
    b.coeffs[PLUS] = to_row(fix_phase(xp));
    b.coeffs[MINUS] = to_row(fix_phase(xm));
    for (int j = 0; j < 2; ++j) b.bath_weight[j] = b.coeffs[j].t - b.coeffs[j].v;
    return b;
}

// (a, b') and (b, a') blocks when only the squeezing coupling is present
NormalModeBasis solve_pure_squeezing(const ModelParams& p) {
    const double wa = p.omega_a, wb = p.omega_b, g = p.g_sq;
    const double disc = (wa + wb) * (wa + wb) - 4.0 * g * g;
    if (disc <= 0.0) throw UnstableError("pure squeezing coupling beyond the stability bound");
    const double w1 = (wa - wb + std::sqrt(disc)) / 2.0;
    const double w2 = (wb - wa + std::sqrt(disc)) / 2.0;
    if (w1 <= 0.0 || w2 <= 0.0) throw UnstableError("non-positive normal frequency");
    Vec4c x1 = Vec4c::Zero(), x2 = Vec4c::Zero();
    x1(0) = 1.0;
    x1(3) = g / (w1 + wb);
    x2(1) = 1.0;
    x2(2) = g / (w2 + wa);
    // a-like block is "+" on ties
    if (w2 > w1) return assemble(w2, x2, w1, x1);
    return assemble(w1, x1, w2, x2);
}

NormalModeBasis solve(const ModelParams& p) {
    p.validate();
    const bool no_coupling = p.g_bs == 0.0 && p.g_sq == 0.0;
    if (no_coupling && p.diamag_D == 0.0) {
        if (std::abs(p.omega_a - p.omega_b) < kDegenerateTol)
            throw DegenerateError("decoupled resonant modes: normal modes are not unique");
        return bare_basis(p);
    }
    if (p.g_bs == 0.0 && p.diamag_D == 0.0) return solve_pure_squeezing(p);

    const Eigen::Matrix4d K = hopfield_matrix(p);
    Eigen::EigenSolver<Eigen::Matrix4d> es(K, true);
    if (es.info() != Eigen::Success) throw UnstableError("eigensolver failed");

    std::vector<std::pair<double, Vec4c>> pos;
    for (int k = 0; k < 4; ++k) {
        const cplx lam = es.eigenvalues()(k);
        if (std::abs(lam.imag()) > kImagTol * std::abs(lam.real()) || std::abs(lam) < 1e-14) {
            std::ostringstream os;
            os << "non-real or vanishing normal frequency " << lam.real() << (lam.imag() < 0 ? "" : "+")
               << lam.imag() << "i";
            throw UnstableError(os.str());
        }
        if (lam.real() > 0.0) pos.emplace_back(lam.real(), es.eigenvectors().col(k));
    }
    if (pos.size() != 2) throw UnstableError("spectrum does not split into two positive modes");
    if (std::abs(pos[0].first - pos[1].first) < kDegenerateTol * std::max(pos[0].first, pos[1].first))
        throw DegenerateError("coincident normal frequencies");
    return assemble(pos[0].first, pos[0].second, pos[1].first, pos[1].second);
}

} // namespace

ModelParams ModelParams::isotropic(double g, double T, double gamma, double wa, double wb) {
    ModelParams p;
    p.omega_a = wa;
    p.omega_b = wb;
    p.g_bs = p.g_sq = g;
    p.temperature = T;
    p.gamma_a = gamma;
    return p;
}

ModelParams ModelParams::anisotropic(double g_bs, double g_sq, double T, double gamma, double wa,
                                     double wb) {
    ModelParams p = isotropic(0.0, T, gamma, wa, wb);
    p.g_bs = g_bs;
    p.g_sq = g_sq;
    return p;
}

ModelParams ModelParams::hopfield(double g, double T, double gamma, double wa, double wb) {
    ModelParams p = isotropic(g, T, gamma, wa, wb);
    p.diamag_D = g * g / wb;
    return p;
}

void ModelParams::validate() const {
    if (!finite_all(*this)) throw std::invalid_argument("model parameters must be finite");
    if (!(omega_a > 0.0)) throw std::invalid_argument("omega_a must be positive");
    if (omega_b != 1.0) throw std::invalid_argument("omega_b is the unit and must equal 1");
    if (gamma_a < 0.0) throw std::invalid_argument("gamma_a must be non-negative");
    if (temperature < 0.0) throw std::invalid_argument("temperature must be non-negative");
    if (diamag_D < 0.0) throw std::invalid_argument("diamag_D must be non-negative");
}

double HopfieldRow::symplectic_norm() const {
    return std::norm(t) + std::norm(u) - std::norm(v) - std::norm(w);
}

Eigen::Matrix4d hopfield_matrix(const ModelParams& p) {
    const double wa = p.omega_a + 2.0 * p.diamag_D, wb = p.omega_b;
    const double gb = p.g_bs, gs = p.g_sq, D2 = 2.0 * p.diamag_D;
    Eigen::Matrix4d K;
    // rows: coefficient of a, b, a', b' in [A,H]; columns act on (t,u,v,w)
    K << wa, gb, -D2, -gs,
         gb, wb, -gs, 0.0,
         D2, gs, -wa, -gb,
         gs, 0.0, -gb, -wb;
    return K;
}

double critical_coupling(const ModelParams& p) {
    if (!p.is_isotropic() || p.diamag_D != 0.0)
        throw std::invalid_argument("critical coupling is defined for the isotropic model without A^2");
    return std::sqrt(p.omega_a * p.omega_b) / 2.0;
}

std::pair<double, double> isotropic_frequencies(double wa, double wb, double g) {
    const double wc = std::sqrt((wa * wa - wb * wb) * (wa * wa - wb * wb) + 16.0 * g * g * wa * wb);
    const double wp2 = (wa * wa + wb * wb + wc) / 2.0;
    const double wm2 = (wa * wa + wb * wb - wc) / 2.0;
    if (wm2 <= 0.0) throw UnstableError("coupling at or beyond the critical point");
    return {std::sqrt(wp2), std::sqrt(wm2)};
}

std::pair<double, double> hopfield_a2_frequencies(double wa, double wb, double g, double D) {
    const double wm2 = wa * wa + 4.0 * D * wa;
    const double half = (wm2 - wb * wb) / 2.0;
    const double root = std::sqrt(half * half + 4.0 * g * g * wa * wb);
    const double sum = (wm2 + wb * wb) / 2.0;
    if (sum - root <= 0.0) throw UnstableError("A^2 model lower frequency not positive");
    return {std::sqrt(sum + root), std::sqrt(sum - root)};
}

double hopfield_a2_theta(double wa, double wb, double g, double D) {
    const auto [wp, wm] = hopfield_a2_frequencies(wa, wb, g, D);
    const double gap = wp * wp - wm * wm;
    if (gap == 0.0) return 0.0;
    const double s = std::clamp(-4.0 * g * std::sqrt(wa * wb) / gap, -1.0, 1.0);
    return std::asin(s) / 2.0;
}

NormalModeBasis bare_basis(const ModelParams& p) {
    Vec4c xa = Vec4c::Zero(), xb = Vec4c::Zero();
    xa(0) = 1.0;
    xb(1) = 1.0;
    // keep a as "+" on ties
    if (p.omega_b > p.omega_a) return assemble(p.omega_b, xb, p.omega_a, xa);
    return assemble(p.omega_a, xa, p.omega_b, xb);
}

NormalModeBasis diagonalize_isotropic(const ModelParams& p) {
    if (!p.is_isotropic() || p.diamag_D != 0.0)
        throw std::invalid_argument("isotropic diagonalization needs g_bs = g_sq and D = 0");
    p.validate();
    if (std::abs(p.g_bs) >= critical_coupling(p))
        throw UnstableError("coupling at or beyond the critical point g_c");
    NormalModeBasis b = solve(p);
    const auto [wp, wm] = isotropic_frequencies(p.omega_a, p.omega_b, p.g_bs);
    if (std::abs(b.omega_plus - wp) > 1e-9 || std::abs(b.omega_minus - wm) > 1e-9)
        throw std::logic_error("eigensolve disagrees with closed-form frequencies");
    return b;
}

NormalModeBasis diagonalize_anisotropic(const ModelParams& p) {
    if (p.diamag_D != 0.0) throw std::invalid_argument("anisotropic diagonalization needs D = 0");
    return solve(p);
}

NormalModeBasis diagonalize_hopfield_a2(const ModelParams& p) {
    if (!p.is_isotropic()) throw std::invalid_argument("A^2 model needs g_bs = g_sq");
    NormalModeBasis b = solve(p);
    const double g = p.g_bs;
    const auto [wp, wm] = hopfield_a2_frequencies(p.omega_a, p.omega_b, g, p.diamag_D);
    if (std::abs(b.omega_plus - wp) > 1e-9 || std::abs(b.omega_minus - wm) > 1e-9)
        throw std::logic_error("eigensolve disagrees with A^2 closed-form frequencies");
    b.mixing_theta = hopfield_a2_theta(p.omega_a, p.omega_b, g, p.diamag_D);
    return b;
}

NormalModeBasis diagonalize(const ModelParams& p) {
    if (p.diamag_D > 0.0 && p.is_isotropic()) return diagonalize_hopfield_a2(p);
    if (p.diamag_D == 0.0 && p.is_isotropic()) return diagonalize_isotropic(p);
    return solve(p);
}

NormalModeBasis diagonalize_or_bare(const ModelParams& p) {
    if (p.g_bs == 0.0 && p.g_sq == 0.0 && p.diamag_D == 0.0) {
        p.validate();
        return bare_basis(p);
    }
    return diagonalize(p);
}

std::pair<double, double> squeezing_parameters(const ModelParams& p) {
    if (!p.is_isotropic() || p.diamag_D != 0.0 || p.omega_a != p.omega_b)
        throw std::invalid_argument("squeezing parameters need the resonant isotropic model");
    const double x = 2.0 * p.g_bs / p.omega_a;
    if (1.0 - std::abs(x) <= 0.0) throw UnstableError("g >= w/2: squeezing parameter diverges");
    return {std::log(1.0 + x) / 4.0, std::log(1.0 - x) / 4.0};
}

BareQuadratic reconstruct(const NormalModeBasis& basis) {
    // T[r][q] is the coefficient of o_r o_q with o = (a, b, a', b')
    cplx T[4][4] = {};
    for (int j = 0; j < 2; ++j) {
        const HopfieldRow& c = basis.coeffs[j];
        const cplx x[4] = {c.t, c.u, c.v, c.w};
        const int dag[4] = {2, 3, 0, 1};
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) T[dag[p]][q] += basis.omega(j) * std::conj(x[p]) * x[q];
    }
    BareQuadratic r;
    r.n_a = T[2][0] + T[0][2];
    r.n_b = T[3][1] + T[1][3];
    r.a_dag_b = T[2][1] + T[1][2];
    r.b_dag_a = T[3][0] + T[0][3];
    r.a_dag_b_dag = T[2][3] + T[3][2];
    r.ab = T[0][1] + T[1][0];
    r.aa = T[0][0];
    r.a_dag_a_dag = T[2][2];
    r.bb = T[1][1];
    r.b_dag_b_dag = T[3][3];
    return r;
}

BareQuadratic hamiltonian_coefficients(const ModelParams& p) {
    BareQuadratic r;
    r.n_a = p.omega_a + 2.0 * p.diamag_D;
    r.n_b = p.omega_b;
    r.a_dag_b = r.b_dag_a = p.g_bs;
    r.a_dag_b_dag = r.ab = p.g_sq;
    r.aa = r.a_dag_a_dag = p.diamag_D;
    r.bb = r.b_dag_b_dag = 0.0;
    return r;
}

} // namespace usc
