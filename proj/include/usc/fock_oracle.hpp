// fock_oracle.hpp - truncated Fock-space models with a Davies (global) master equation
//
// The generator is built in the eigenbasis of the truncated Hamiltonian from the
// Bohr-frequency decomposition of the bath coupling operator. In the
// interaction picture it is time independent and splits into invariant
// sectors (pairs of energy clusters with equal Bohr frequency), so only the
// sectors reachable from the initial state are integrated.
#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "usc/dynamics.hpp"
#include "usc/observables.hpp"
#include "usc/spectrum.hpp"

namespace usc {

enum class OracleModel { TwoOscillators, HopfieldA2, Rabi, TwoQubits };

constexpr int kMaxOracleDim = 4096;

struct TruncatedModel {
    OracleModel kind = OracleModel::TwoOscillators;
    int n_max = 0;
    std::array<int, 2> dims{};
    ModelParams params;
    Eigen::MatrixXd hamiltonian;
    Eigen::MatrixXd coupling_op;
    Eigen::SparseMatrix<double> lower_a; // a, or sigma_a^- for a qubit
    Eigen::SparseMatrix<double> lower_b; // b, or sigma_b^-

    int dim() const { return dims[0] * dims[1]; }
    bool battery_is_qubit() const { return kind == OracleModel::Rabi || kind == OracleModel::TwoQubits; }
};

TruncatedModel build_model(OracleModel kind, const ModelParams& p, int n_max);

struct GeneratorOptions {
    double group_tol = 1e-9;       // Bohr frequencies / energies merged within this
    double element_cutoff = 1e-12; // relative cutoff on coupling matrix elements
    bool strict_gaps = false;      // throw DegenerateGaps instead of merging
};

struct JumpGroup {
    double omega = 0.0; // E_initial - E_final (> 0: emission)
    double rate = 0.0;
    std::vector<Eigen::Triplet<double>> op; // (to, from, element) in the eigenbasis; groups are many and sparse

    double norm() const;
};

struct LindbladGenerator {
    Eigen::VectorXd energies;
    Eigen::MatrixXd eigvecs; // columns are eigenstates in the product basis
    std::vector<int> cluster;
    std::vector<double> cluster_energy;
    std::vector<JumpGroup> jumps;
    Eigen::SparseMatrix<double> k_op; // sum_g rate_g L_g' L_g
    double temperature = 0.0;
    double gamma = 0.0;
    int merged_gaps = 0;
    // column-stacked generator in the eigenbasis (interaction picture); small systems only
    std::optional<Eigen::MatrixXd> superoperator;

    int dim() const { return static_cast<int>(energies.size()); }
    // interaction-picture action on a dense eigenbasis density matrix
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;
};

LindbladGenerator build_global_lindblad(const TruncatedModel& model, const ModelParams& p,
                                        const GeneratorOptions& opt = {});

// max over Bohr groups of |rate(w)/rate(-w) e^{-w/T} - 1|
double detailed_balance_residual(const LindbladGenerator& gen);

// Sparse density matrix in the energy eigenbasis (Schroedinger picture).
struct EigenDensity {
    int dim = 0;
    std::vector<Eigen::Triplet<cplx>> entries;

    Eigen::MatrixXcd dense() const;
    Eigen::MatrixXcd to_product_basis(const LindbladGenerator& gen) const;
    static EigenDensity from_product_basis(const Eigen::MatrixXcd& rho, const LindbladGenerator& gen,
                                           double cutoff = 0.0);
};

struct CptpReport {
    double trace_drift = 0.0;
    double hermiticity = 0.0;
    double min_eigenvalue = 0.0;
    bool ok(double trace_tol = 1e-9, double herm_tol = 1e-9, double eig_tol = -1e-7) const {
        return trace_drift < trace_tol && hermiticity < herm_tol && min_eigenvalue > eig_tol;
    }
};
CptpReport cptp_report(const EigenDensity& rho);
CptpReport merge(const CptpReport& a, const CptpReport& b);

struct Trajectory {
    std::vector<double> times;
    std::vector<EigenDensity> states;
    double dropped_weight = 0.0; // Frobenius norm of the initial state left out
    int sector_size = 0;
    CptpReport cptp;
};

Trajectory evolve(const LindbladGenerator& gen, const Eigen::MatrixXcd& rho0, std::vector<double> times,
                  double tol = 1e-8, double seed_cutoff = 1e-12);

Eigen::MatrixXcd integrate_master_equation(const LindbladGenerator& gen, const Eigen::MatrixXcd& rho0,
                                           double t, double tol = 1e-8);

EigenDensity steady_state(const LindbladGenerator& gen);

// initial states in the product basis
Eigen::MatrixXcd bare_vacuum_density(const TruncatedModel& model);
struct PreparedState {
    Eigen::MatrixXcd rho;
    double truncation_loss = 0.0; // 1 - norm^2 lost when cutting the padded state
};
PreparedState polariton_ground_density(const TruncatedModel& model, int padding = 20);

BareMoments moments_from_density(const Eigen::MatrixXcd& rho, const TruncatedModel& model);
BareMoments moments_from_density(const EigenDensity& rho, const TruncatedModel& model,
                                 const LindbladGenerator& gen);

struct QubitExpectations {
    double sz = -1.0;
    cplx sm{}; // <sigma^->, <sigma^+> is its conjugate
};
QubitExpectations qubit_expectations(const EigenDensity& rho, const TruncatedModel& model,
                                     const LindbladGenerator& gen);
double qubit_ergotropy(const QubitExpectations& e, double omega_b = 1.0);

// Adaptive truncation: n_max, n_max+5, ... until all moments shift by < rel_tol.
struct OracleRun {
    int n_max = 0;
    std::vector<BareMoments> moments; // one per requested time (+inf = steady)
    CptpReport cptp;
    double dropped_weight = 0.0;
    double truncation_loss = 0.0;
};
struct OracleResult {
    std::vector<OracleRun> runs; // runs.front() is at the requested n_max
    bool converged = false;
    double last_shift = 0.0;
};
OracleResult oracle_bare_moments(OracleModel kind, const ModelParams& p, InitialState init,
                                 const std::vector<double>& times, int n_max = 25, double rel_tol = 1e-6,
                                 double tol = 1e-9, int max_rounds = 4);

double moment_shift(const BareMoments& a, const BareMoments& b);

} // namespace usc
