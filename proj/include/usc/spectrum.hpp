// spectrum.hpp - normal modes of the two-mode quadratic Hamiltonians
//
// H = wa a'a + wb b'b + g_bs (a'b + ab') + g_sq (a'b' + ab) + D (a + a')^2
//
// Everything is in units of wb. The isotropic model has g_bs = g_sq = g.
#pragma once

#include <array>
#include <complex>
#include <optional>
#include <utility>

#include <Eigen/Dense>

namespace usc {

using cplx = std::complex<double>;

struct ModelParams {
    double omega_a = 1.0;
    double omega_b = 1.0;
    double g_bs = 0.0;
    double g_sq = 0.0;
    double diamag_D = 0.0;
    double gamma_a = 1e-3;
    double temperature = 1.0;

    static ModelParams isotropic(double g, double T = 1.0, double gamma = 1e-3,
                                 double wa = 1.0, double wb = 1.0);
    static ModelParams anisotropic(double g_bs, double g_sq, double T = 1.0,
                                   double gamma = 1e-3, double wa = 1.0, double wb = 1.0);
    // A^2 model with the usual D = g^2/wb.
    static ModelParams hopfield(double g, double T = 1.0, double gamma = 1e-3,
                                double wa = 1.0, double wb = 1.0);

    bool is_isotropic() const { return g_bs == g_sq; }
    // throws std::invalid_argument on out-of-range fields
    void validate() const;
};

// A_j = t a + u b + v a' + w b'
struct HopfieldRow {
    cplx t, u, v, w;
    double symplectic_norm() const;
};

enum ModeIndex : int { PLUS = 0, MINUS = 1 };

struct NormalModeBasis {
    double omega_plus = 0.0;
    double omega_minus = 0.0;
    std::array<HopfieldRow, 2> coeffs{};
    std::array<cplx, 2> bath_weight{}; // W_j = t_j - v_j
    std::optional<double> mixing_theta;

    double omega(int j) const { return j == PLUS ? omega_plus : omega_minus; }
    double weight_sq(int j) const { return std::norm(bath_weight[j]); }
};

// 4x4 matrix K with [A,H] = w A  <=>  K (t,u,v,w)^T = w (t,u,v,w)^T.
Eigen::Matrix4d hopfield_matrix(const ModelParams& p);

double critical_coupling(const ModelParams& p);

NormalModeBasis diagonalize_isotropic(const ModelParams& p);
NormalModeBasis diagonalize_anisotropic(const ModelParams& p);
NormalModeBasis diagonalize_hopfield_a2(const ModelParams& p);
// Dispatches on (g_bs, g_sq, D).
NormalModeBasis diagonalize(const ModelParams& p);

// Basis of the decoupled problem (A_+ = a, A_- = b); used where the coupled
// basis is degenerate.
NormalModeBasis bare_basis(const ModelParams& p);

// Basis that never throws Degenerate: falls back to the bare basis at
// vanishing coupling.
NormalModeBasis diagonalize_or_bare(const ModelParams& p);

// Closed-form frequencies for cross-checks.
std::pair<double, double> isotropic_frequencies(double wa, double wb, double g);
std::pair<double, double> hopfield_a2_frequencies(double wa, double wb, double g, double D);
double hopfield_a2_theta(double wa, double wb, double g, double D);

// r_+- = log(1 +- 2g/w)/4 at resonance.
std::pair<double, double> squeezing_parameters(const ModelParams& p);

// Normal-ordered coefficients of sum_j w_j A_j'A_j expressed in bare operators.
struct BareQuadratic {
    cplx n_a, n_b;         // a'a, b'b
    cplx a_dag_b, b_dag_a; // a'b, b'a
    cplx a_dag_b_dag, ab;  // a'b', ab
    cplx aa, a_dag_a_dag;  // a^2, a'^2
    cplx bb, b_dag_b_dag;  // b^2, b'^2
};
BareQuadratic reconstruct(const NormalModeBasis& basis);
// The same coefficients read off the model parameters.
BareQuadratic hamiltonian_coefficients(const ModelParams& p);

} // namespace usc
