// fock_oracle.cpp - truncated-space Davies generator, sector evolution, steady state
#include "usc/fock_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <boost/numeric/odeint.hpp>

#include "usc/errors.hpp"

namespace usc {

namespace odeint = boost::numeric::odeint;

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

namespace {

SpMat boson_lowering(int d) {
    SpMat a(d, d);
    std::vector<Trip> t;
    for (int n = 1; n < d; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

SpMat qubit_lowering() {
    SpMat s(2, 2);
    std::vector<Trip> t{{0, 1, 1.0}};
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

SpMat identity(int d) {
    SpMat I(d, d);
    I.setIdentity();
    return I;
}

SpMat kron(const SpMat& A, const SpMat& B) {
    SpMat out(A.rows() * B.rows(), A.cols() * B.cols());
    std::vector<Trip> t;
    t.reserve(static_cast<size_t>(A.nonZeros() * B.nonZeros()));
    for (int ka = 0; ka < A.outerSize(); ++ka)
        for (SpMat::InnerIterator ia(A, ka); ia; ++ia)
            for (int kb = 0; kb < B.outerSize(); ++kb)
                for (SpMat::InnerIterator ib(B, kb); ib; ++ib)
                    t.emplace_back(ia.row() * B.rows() + ib.row(), ia.col() * B.cols() + ib.col(),
                                   ia.value() * ib.value());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

void require_bosonic_stable(const ModelParams& p) {
    try {
        (void)diagonalize_or_bare(p);
    } catch (const DegenerateError&) {
        // degenerate but stable; the truncated model is still well defined
    }
}

using Key = std::uint64_t;
Key key_of(int i, int j, int dim) { return static_cast<Key>(i) * static_cast<Key>(dim) + static_cast<Key>(j); }

// Closure of the seed elements under the interaction-picture generator,
// together with the generator restricted to it.
struct Sector {
    std::vector<std::pair<int, int>> elems;
    std::unordered_map<Key, int> index;
    SpMat gen;
};

constexpr size_t kMaxSectorSize = 4'000'000;

Sector build_sector(const LindbladGenerator& g, const std::vector<std::pair<int, int>>& seeds) {
    const int dim = g.dim();
    Sector s;
    s.index.reserve(seeds.size() * 4);
    auto intern = [&](int i, int j) {
        auto [it, fresh] = s.index.emplace(key_of(i, j, dim), static_cast<int>(s.elems.size()));
        if (fresh) {
            s.elems.emplace_back(i, j);
            if (s.elems.size() > kMaxSectorSize) throw DimensionTooLarge("dynamical sector too large");
        }
        return it->second;
    };
    for (const auto& [i, j] : seeds) intern(i, j);

    // column lists of all jump operators, sorted by group, for merge joins
    struct Entry {
        int group, row;
        double value;
    };
    std::vector<std::vector<Entry>> cols(dim);
    for (size_t gi = 0; gi < g.jumps.size(); ++gi) {
        for (const Trip& e : g.jumps[gi].op) cols[e.col()].push_back({static_cast<int>(gi), e.row(), e.value()});
    }

    std::vector<Trip> trips;
    for (size_t c = 0; c < s.elems.size(); ++c) {
        const auto [i, j] = s.elems[c];
        const int col = static_cast<int>(c);
        const auto& ci = cols[i];
        const auto& cj = cols[j];
        size_t a = 0, b = 0;
        while (a < ci.size() && b < cj.size()) {
            if (ci[a].group < cj[b].group) {
                ++a;
            } else if (cj[b].group < ci[a].group) {
                ++b;
            } else {
                const int grp = ci[a].group;
                const double rate = g.jumps[grp].rate;
                size_t a_end = a, b_end = b;
                while (a_end < ci.size() && ci[a_end].group == grp) ++a_end;
                while (b_end < cj.size() && cj[b_end].group == grp) ++b_end;
                for (size_t x = a; x < a_end; ++x)
                    for (size_t y = b; y < b_end; ++y)
                        trips.emplace_back(intern(ci[x].row, cj[y].row), col, rate * ci[x].value * cj[y].value);
                a = a_end;
                b = b_end;
            }
        }
        for (SpMat::InnerIterator k(g.k_op, i); k; ++k)
            trips.emplace_back(intern(static_cast<int>(k.row()), j), col, -0.5 * k.value());
        for (SpMat::InnerIterator k(g.k_op, j); k; ++k)
            trips.emplace_back(intern(i, static_cast<int>(k.row())), col, -0.5 * k.value());
    }
    const int n = static_cast<int>(s.elems.size());
    s.gen.resize(n, n);
    s.gen.setFromTriplets(trips.begin(), trips.end());
    s.gen.makeCompressed();
    return s;
}

// Minimum eigenvalue of a Hermitian matrix restricted to the blocks that
// connect through its nonzero entries.
double min_block_eigenvalue(const EigenDensity& rho) {
    const int dim = rho.dim;
    std::vector<int> parent(dim);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<char> used(dim, 0);
    for (const auto& e : rho.entries) {
        used[e.row()] = used[e.col()] = 1;
        parent[find(e.row())] = find(e.col());
    }
    std::unordered_map<int, std::vector<int>> blocks;
    for (int i = 0; i < dim; ++i)
        if (used[i]) blocks[find(i)].push_back(i);
    std::unordered_map<int, std::vector<const Eigen::Triplet<cplx>*>> block_entries;
    for (const auto& e : rho.entries) block_entries[find(e.row())].push_back(&e);
    std::vector<int> local(dim, 0);
    double lo = 0.0;
    for (auto& [root, members] : blocks) {
        for (size_t k = 0; k < members.size(); ++k) local[members[k]] = static_cast<int>(k);
        const int m = static_cast<int>(members.size());
        Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(m, m);
        for (const auto* e : block_entries[root]) B(local[e->row()], local[e->col()]) += e->value();
        B = 0.5 * (B + B.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B, Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
}

// exp(G) v for a sparse real generator, by scaling and Taylor steps
Eigen::VectorXd expv(const SpMat& G, Eigen::VectorXd v) {
    double norm = 0.0;
    for (int k = 0; k < G.outerSize(); ++k) {
        double col = 0.0;
        for (SpMat::InnerIterator it(G, k); it; ++it) col += std::abs(it.value());
        norm = std::max(norm, col);
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(norm / 0.5)));
    for (int s = 0; s < steps; ++s) {
        Eigen::VectorXd term = v, sum = v;
        for (int k = 1; k < 60; ++k) {
            term = (G * term) / (static_cast<double>(k) * steps);
            sum += term;
            if (term.norm() < 1e-18 * sum.norm()) break;
        }
        v = sum;
    }
    return v;
}

} // namespace

TruncatedModel build_model(OracleModel kind, const ModelParams& p, int n_max) {
    p.validate();
    TruncatedModel m;
    m.kind = kind;
    m.n_max = n_max;
    m.params = p;
    const bool qubit_a = kind == OracleModel::TwoQubits;
    const bool qubit_b = kind == OracleModel::Rabi || kind == OracleModel::TwoQubits;
    if (!qubit_a && n_max < 1) throw std::invalid_argument("n_max must be at least 1");
    m.dims = {qubit_a ? 2 : n_max + 1, qubit_b ? 2 : n_max + 1};
    if (m.dims[0] * m.dims[1] > kMaxOracleDim)
        throw DimensionTooLarge("truncated dimension " + std::to_string(m.dims[0] * m.dims[1]) + " exceeds " +
                                std::to_string(kMaxOracleDim));
    if (kind != OracleModel::TwoOscillators && !p.is_isotropic())
        throw std::invalid_argument("this oracle model needs g_bs == g_sq");
    if (kind == OracleModel::TwoOscillators || kind == OracleModel::HopfieldA2) require_bosonic_stable(p);

    const SpMat la = qubit_a ? qubit_lowering() : boson_lowering(m.dims[0]);
    const SpMat lb = qubit_b ? qubit_lowering() : boson_lowering(m.dims[1]);
    m.lower_a = kron(la, identity(m.dims[1]));
    m.lower_b = kron(identity(m.dims[0]), lb);
    const SpMat a = m.lower_a, b = m.lower_b;
    const SpMat ad = SpMat(a.transpose()), bd = SpMat(b.transpose());
    const SpMat xa = a + ad, xb = b + bd;

    SpMat H = p.omega_a * (ad * a) + p.omega_b * (bd * b);
    if (kind == OracleModel::TwoOscillators || kind == OracleModel::HopfieldA2) {
        H += p.g_bs * (ad * b + bd * a) + p.g_sq * (ad * bd + a * b);
        if (p.diamag_D != 0.0) H += p.diamag_D * (xa * xa);
    } else {
        H += p.g_bs * (xa * xb);
    }
    m.hamiltonian = Eigen::MatrixXd(H);
    m.coupling_op = Eigen::MatrixXd(xa);
    return m;
}

LindbladGenerator build_global_lindblad(const TruncatedModel& model, const ModelParams& p,
                                        const GeneratorOptions& opt) {
    p.validate();
    LindbladGenerator g;
    g.temperature = p.temperature;
    g.gamma = p.gamma_a;
    const int dim = model.dim();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.hamiltonian);
    if (es.info() != Eigen::Success) throw std::runtime_error("Hamiltonian diagonalization failed");
    g.energies = es.eigenvalues();
    g.eigvecs = es.eigenvectors();

    // energy clusters, single linkage on the sorted spectrum
    g.cluster.assign(dim, 0);
    std::vector<double> sum{g.energies(0)};
    std::vector<int> count{1};
    for (int i = 1; i < dim; ++i) {
        if (g.energies(i) - g.energies(i - 1) > opt.group_tol) {
            sum.push_back(0.0);
            count.push_back(0);
        }
        g.cluster[i] = static_cast<int>(sum.size()) - 1;
        sum.back() += g.energies(i);
        ++count.back();
    }
    g.cluster_energy.resize(sum.size());
    for (size_t c = 0; c < sum.size(); ++c) g.cluster_energy[c] = sum[c] / count[c];

    const Eigen::MatrixXd X = g.eigvecs.transpose() * model.coupling_op * g.eigvecs;
    const double cut = opt.element_cutoff * X.cwiseAbs().maxCoeff();

    struct Transition {
        double omega;
        int to, from;
        double value;
    };
    std::vector<Transition> tr;
    for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n)
            if (std::abs(X(n, m)) > cut)
                tr.push_back({g.cluster_energy[g.cluster[m]] - g.cluster_energy[g.cluster[n]], n, m, X(n, m)});
    std::sort(tr.begin(), tr.end(), [](const Transition& x, const Transition& y) { return x.omega < y.omega; });

    const double T = p.temperature;
    auto rate_of = [&](double w) {
        if (std::abs(w) <= opt.group_tol) return p.gamma_a * T;
        if (w > 0.0) return p.gamma_a * w * (bose_einstein(w, T) + 1.0);
        return p.gamma_a * (-w) * bose_einstein(-w, T);
    };

    std::vector<Trip> ktrips;
    size_t start = 0;
    while (start < tr.size()) {
        size_t end = start + 1;
        int merged = 0;
        while (end < tr.size() && tr[end].omega - tr[end - 1].omega <= opt.group_tol) {
            if (tr[end].omega - tr[end - 1].omega > 1e-12) ++merged;
            ++end;
        }
        if (merged > 0 && opt.strict_gaps)
            throw DegenerateGaps("distinct Bohr frequencies closer than " + std::to_string(opt.group_tol));
        g.merged_gaps += merged;
        double wsum = 0.0;
        std::vector<Trip> trips;
        for (size_t k = start; k < end; ++k) {
            wsum += tr[k].omega;
            trips.emplace_back(tr[k].to, tr[k].from, tr[k].value);
        }
        JumpGroup jg;
        jg.omega = wsum / static_cast<double>(end - start);
        jg.rate = rate_of(jg.omega);
        if (jg.rate > 0.0) {
            // K += rate L'L, pairing entries that share a row
            std::sort(trips.begin(), trips.end(), [](const Trip& x, const Trip& y) { return x.row() < y.row(); });
            for (size_t x = 0; x < trips.size();) {
                size_t y = x;
                while (y < trips.size() && trips[y].row() == trips[x].row()) ++y;
                for (size_t u = x; u < y; ++u)
                    for (size_t v = x; v < y; ++v)
                        ktrips.emplace_back(trips[u].col(), trips[v].col(), jg.rate * trips[u].value() * trips[v].value());
                x = y;
            }
            jg.op = std::move(trips);
            g.jumps.push_back(std::move(jg));
        }
        start = end;
    }

    g.k_op.resize(dim, dim);
    g.k_op.setFromTriplets(ktrips.begin(), ktrips.end());
    g.k_op.makeCompressed();

    if (dim <= 64) {
        // vec(rho) column-major: op rho op^T -> (op (x) op), K rho + rho K -> (I (x) K + K (x) I)
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(dim * dim, dim * dim);
        for (const JumpGroup& jg : g.jumps)
            for (const Trip& x : jg.op)
                for (const Trip& y : jg.op)
                    L(x.row() + y.row() * dim, x.col() + y.col() * dim) += jg.rate * x.value() * y.value();
        for (int k = 0; k < dim; ++k)
            for (SpMat::InnerIterator it(g.k_op, k); it; ++it)
                for (int o = 0; o < dim; ++o) {
                    L(it.row() + o * dim, k + o * dim) -= 0.5 * it.value();
                    L(o + it.row() * dim, o + k * dim) -= 0.5 * it.value();
                }
        g.superoperator = std::move(L);
    }
    return g;
}

double JumpGroup::norm() const {
    double s = 0.0;
    for (const Trip& e : op) s += e.value() * e.value();
    return std::sqrt(s);
}

Eigen::MatrixXcd LindbladGenerator::apply(const Eigen::MatrixXcd& rho) const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
    for (const JumpGroup& jg : jumps) {
        SpMat op(rho.rows(), rho.cols());
        op.setFromTriplets(jg.op.begin(), jg.op.end());
        const Eigen::MatrixXcd Lr = op.cast<cplx>() * rho;
        out += jg.rate * (Lr * op.cast<cplx>().transpose());
    }
    const Eigen::MatrixXcd Kc = k_op.cast<cplx>();
    out -= 0.5 * (Kc * rho + rho * Kc);
    return out;
}

double detailed_balance_residual(const LindbladGenerator& g) {
    if (g.temperature <= 0.0) return 0.0;
    // groups are stored in ascending frequency
    auto below = [](const JumpGroup& jg, double w) { return jg.omega < w; };
    double worst = 0.0;
    for (const JumpGroup& emit : g.jumps) {
        if (emit.omega <= 1e-9) continue;
        auto it = std::lower_bound(g.jumps.begin(), g.jumps.end(), -emit.omega - 1e-9, below);
        for (; it != g.jumps.end() && it->omega <= -emit.omega + 1e-9; ++it) {
            const double r = emit.rate / it->rate * std::exp(-emit.omega / g.temperature);
            worst = std::max(worst, std::abs(r - 1.0));
        }
    }
    return worst;
}

Eigen::MatrixXcd EigenDensity::dense() const {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& e : entries) r(e.row(), e.col()) += e.value();
    return r;
}

Eigen::MatrixXcd EigenDensity::to_product_basis(const LindbladGenerator& g) const {
    const Eigen::MatrixXcd V = g.eigvecs.cast<cplx>();
    return V * dense() * V.transpose();
}

EigenDensity EigenDensity::from_product_basis(const Eigen::MatrixXcd& rho, const LindbladGenerator& g,
                                              double cutoff) {
    const Eigen::MatrixXcd V = g.eigvecs.cast<cplx>();
    const Eigen::MatrixXcd r = V.transpose() * rho * V;
    EigenDensity out;
    out.dim = g.dim();
    for (int j = 0; j < r.cols(); ++j)
        for (int i = 0; i < r.rows(); ++i)
            if (std::abs(r(i, j)) > cutoff) out.entries.emplace_back(i, j, r(i, j));
    return out;
}

CptpReport cptp_report(const EigenDensity& rho) {
    CptpReport rep;
    cplx tr = 0.0;
    std::unordered_map<Key, cplx> lookup;
    lookup.reserve(rho.entries.size());
    for (const auto& e : rho.entries) {
        if (e.row() == e.col()) tr += e.value();
        lookup[key_of(e.row(), e.col(), rho.dim)] += e.value();
    }
    rep.trace_drift = std::abs(tr - 1.0);
    for (const auto& [k, v] : lookup) {
        const int i = static_cast<int>(k / rho.dim), j = static_cast<int>(k % rho.dim);
        auto it = lookup.find(key_of(j, i, rho.dim));
        const cplx partner = it == lookup.end() ? cplx(0.0) : it->second;
        rep.hermiticity = std::max(rep.hermiticity, std::abs(v - std::conj(partner)));
    }
    rep.min_eigenvalue = min_block_eigenvalue(rho);
    return rep;
}

CptpReport merge(const CptpReport& a, const CptpReport& b) {
    CptpReport r;
    r.trace_drift = std::max(a.trace_drift, b.trace_drift);
    r.hermiticity = std::max(a.hermiticity, b.hermiticity);
    r.min_eigenvalue = std::min(a.min_eigenvalue, b.min_eigenvalue);
    return r;
}

Trajectory evolve(const LindbladGenerator& g, const Eigen::MatrixXcd& rho0, std::vector<double> times,
                  double tol, double seed_cutoff) {
    const int dim = g.dim();
    if (rho0.rows() != dim || rho0.cols() != dim) throw std::invalid_argument("initial state has wrong dimension");
    for (double t : times)
        if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("times must be finite and non-negative");
    std::sort(times.begin(), times.end());

    const Eigen::MatrixXcd V = g.eigvecs.cast<cplx>();
    const Eigen::MatrixXcd r0 = V.transpose() * rho0 * V;
    std::vector<std::pair<int, int>> seeds;
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i)
            if (std::abs(r0(i, j)) > seed_cutoff) seeds.emplace_back(i, j);
    const Sector s = build_sector(g, seeds);
    const int n = static_cast<int>(s.elems.size());

    Trajectory out;
    out.times = times;
    out.sector_size = n;
    std::vector<double> y(2 * static_cast<size_t>(n));
    double kept = 0.0;
    for (int k = 0; k < n; ++k) {
        const cplx v = r0(s.elems[k].first, s.elems[k].second);
        y[k] = v.real();
        y[n + k] = v.imag();
        kept += std::norm(v);
    }
    out.dropped_weight = std::sqrt(std::max(0.0, r0.squaredNorm() - kept));

    auto rhs = [&](const std::vector<double>& x, std::vector<double>& dx, double) {
        Eigen::Map<const Eigen::VectorXd> xr(x.data(), n), xi(x.data() + n, n);
        Eigen::Map<Eigen::VectorXd> dr(dx.data(), n), di(dx.data() + n, n);
        dr.noalias() = s.gen * xr;
        di.noalias() = s.gen * xi;
    };

    out.cptp.min_eigenvalue = 0.0;
    double now = 0.0;
    for (double t : times) {
        if (t > now) {
            try {
                auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<std::vector<double>>>(
                    std::min(1e-12, tol * 1e-3), tol);
                odeint::integrate_adaptive(stepper, rhs, y, now, t, std::min(t - now, 1.0));
            } catch (const std::exception& e) {
                throw IntegrationFailure(std::string("master equation integration failed: ") + e.what());
            }
            for (double v : y)
                if (!std::isfinite(v)) throw IntegrationFailure("master equation produced non-finite values");
            now = t;
        }
        EigenDensity d;
        d.dim = dim;
        d.entries.reserve(n);
        for (int k = 0; k < n; ++k) {
            const auto [i, j] = s.elems[k];
            const double phase = -(g.energies(i) - g.energies(j)) * t;
            d.entries.emplace_back(i, j, cplx(y[k], y[n + k]) * std::polar(1.0, phase));
        }
        out.cptp = merge(out.cptp, cptp_report(d));
        out.states.push_back(std::move(d));
    }
    return out;
}

Eigen::MatrixXcd integrate_master_equation(const LindbladGenerator& g, const Eigen::MatrixXcd& rho0, double t,
                                           double tol) {
    const Trajectory tr = evolve(g, rho0, {t}, tol);
    return tr.states.front().to_product_basis(g);
}

EigenDensity steady_state(const LindbladGenerator& g) {
    const int dim = g.dim();
    std::vector<std::pair<int, int>> seeds;
    for (int i = 0; i < dim; ++i) seeds.emplace_back(i, i);
    const Sector s = build_sector(g, seeds);
    const int n = static_cast<int>(s.elems.size());

    Eigen::VectorXd x;
    if (n <= 1024) {
        const Eigen::MatrixXd A(s.gen);
        Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
        const Eigen::VectorXd sv = svd.singularValues();
        const double scale = std::max(sv(0), 1e-300);
        if (n > 1 && sv(n - 2) < 1e-9 * scale)
            throw NoUniqueSteadyState("steady state is not unique (second smallest singular value " +
                                      std::to_string(sv(n - 2) / scale) + ")");
        x = svd.matrixV().col(n - 1);
    } else {
        // replace the first population row by the trace condition
        const int r0 = s.index.at(key_of(0, 0, dim));
        SpMat A = s.gen;
        std::vector<Trip> trips;
        for (int k = 0; k < A.outerSize(); ++k)
            for (SpMat::InnerIterator it(A, k); it; ++it)
                if (it.row() != r0) trips.emplace_back(static_cast<int>(it.row()), k, it.value());
        for (int k = 0; k < n; ++k)
            if (s.elems[k].first == s.elems[k].second) trips.emplace_back(r0, k, 1.0);
        A.setFromTriplets(trips.begin(), trips.end());
        A.makeCompressed();
        Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success) throw NoUniqueSteadyState("steady-state system is singular");
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        rhs(r0) = 1.0;
        x = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !x.allFinite()) throw NoUniqueSteadyState("steady-state solve failed");
        // inverse iteration on A'A for the smallest singular value
        Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lut;
        lut.compute(SpMat(A.transpose()));
        Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
        double growth = 0.0;
        for (int it = 0; it < 8; ++it) {
            const Eigen::VectorXd w = lut.solve(lu.solve(v));
            growth = w.norm();
            v = w / growth;
        }
        double amax = 0.0;
        for (int k = 0; k < A.outerSize(); ++k)
            for (SpMat::InnerIterator it(A, k); it; ++it) amax = std::max(amax, std::abs(it.value()));
        const double sigma_min = 1.0 / std::sqrt(growth);
        if (!(sigma_min > 1e-9 * amax)) throw NoUniqueSteadyState("steady state is not unique");
    }
    double tr = 0.0;
    for (int k = 0; k < n; ++k)
        if (s.elems[k].first == s.elems[k].second) tr += x(k);
    if (std::abs(tr) < 1e-300) throw NoUniqueSteadyState("steady-state null vector has zero trace");
    x /= tr;
    EigenDensity d;
    d.dim = dim;
    for (int k = 0; k < n; ++k) d.entries.emplace_back(s.elems[k].first, s.elems[k].second, cplx(x(k), 0.0));
    return d;
}

Eigen::MatrixXcd bare_vacuum_density(const TruncatedModel& m) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(m.dim(), m.dim());
    r(0, 0) = 1.0;
    return r;
}

PreparedState polariton_ground_density(const TruncatedModel& m, int padding) {
    if (m.kind != OracleModel::TwoOscillators && m.kind != OracleModel::HopfieldA2)
        throw std::invalid_argument("polariton ground state needs two oscillators");
    const ModelParams& p = m.params;
    const int np = m.n_max + padding, dp = np + 1;
    Eigen::VectorXd psi;
    const bool resonant_iso =
        p.is_isotropic() && p.diamag_D == 0.0 && p.omega_a == p.omega_b && p.g_bs != 0.0;
    if (resonant_iso) {
        // two commuting single-mode squeezers on (a +- b)/sqrt(2)
        const auto [rp, rm] = squeezing_parameters(p);
        const SpMat a = kron(boson_lowering(dp), identity(dp)), b = kron(identity(dp), boson_lowering(dp));
        const SpMat d = (a + b) / std::sqrt(2.0), c = (a - b) / std::sqrt(2.0);
        const SpMat dd = SpMat(d.transpose()), cd = SpMat(c.transpose());
        const SpMat G = 0.5 * rp * (SpMat(d * d) - SpMat(dd * dd)) + 0.5 * rm * (SpMat(c * c) - SpMat(cd * cd));
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dp * dp);
        v(0) = 1.0;
        psi = expv(G, v);
    } else if (p.g_bs == 0.0 && p.g_sq == 0.0 && p.diamag_D == 0.0) {
        psi = Eigen::VectorXd::Zero(dp * dp);
        psi(0) = 1.0;
    } else {
        // ground state of the padded truncated Hamiltonian
        const TruncatedModel big = build_model(m.kind, p, np);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(big.hamiltonian);
        psi = es.eigenvectors().col(0);
    }
    Eigen::VectorXd cut(m.dim());
    for (int i = 0; i <= m.n_max; ++i)
        for (int j = 0; j <= m.n_max; ++j) cut(i * (m.n_max + 1) + j) = psi(i * dp + j);
    PreparedState out;
    out.truncation_loss = 1.0 - cut.squaredNorm() / psi.squaredNorm();
    cut.normalize();
    const Eigen::VectorXcd c = cut.cast<cplx>();
    out.rho = c * c.adjoint();
    return out;
}

BareMoments moments_from_density(const Eigen::MatrixXcd& rho, const TruncatedModel& m) {
    auto ex = [&](const SpMat& O) { return (rho * O.cast<cplx>()).trace(); };
    const SpMat a = m.lower_a, b = m.lower_b;
    const SpMat ad = SpMat(a.transpose()), bd = SpMat(b.transpose());
    BareMoments bm;
    bm.mean_b = ex(b);
    bm.occ_b = ex(SpMat(bd * b)).real();
    bm.sq_b = ex(SpMat(b * b));
    bm.occ_a = ex(SpMat(ad * a)).real();
    bm.sq_a = ex(SpMat(a * a));
    bm.cross_nab = ex(SpMat(ad * b));
    bm.cross_ab = ex(SpMat(a * b));
    return bm;
}

namespace {

// Tr(rho O) = sum_(m,n) rho_mn <n|O|m> with rho in the eigenbasis
cplx eigen_expectation(const EigenDensity& rho, const SpMat& O, const LindbladGenerator& g) {
    const Eigen::MatrixXd OV = O * g.eigvecs;
    cplx s = 0.0;
    for (const auto& e : rho.entries) s += e.value() * g.eigvecs.col(e.row()).dot(OV.col(e.col()));
    return s;
}

} // namespace

BareMoments moments_from_density(const EigenDensity& rho, const TruncatedModel& m, const LindbladGenerator& g) {
    const SpMat a = m.lower_a, b = m.lower_b;
    const SpMat ad = SpMat(a.transpose()), bd = SpMat(b.transpose());
    BareMoments bm;
    bm.mean_b = eigen_expectation(rho, b, g);
    bm.occ_b = eigen_expectation(rho, SpMat(bd * b), g).real();
    bm.sq_b = eigen_expectation(rho, SpMat(b * b), g);
    bm.occ_a = eigen_expectation(rho, SpMat(ad * a), g).real();
    bm.sq_a = eigen_expectation(rho, SpMat(a * a), g);
    bm.cross_nab = eigen_expectation(rho, SpMat(ad * b), g);
    bm.cross_ab = eigen_expectation(rho, SpMat(a * b), g);
    return bm;
}

QubitExpectations qubit_expectations(const EigenDensity& rho, const TruncatedModel& m, const LindbladGenerator& g) {
    if (!m.battery_is_qubit()) throw std::invalid_argument("battery is not a qubit");
    const SpMat sm = m.lower_b;
    const SpMat up = SpMat(sm.transpose()) * sm; // projector on the excited state
    QubitExpectations q;
    q.sz = 2.0 * eigen_expectation(rho, up, g).real() - 1.0;
    q.sm = eigen_expectation(rho, sm, g);
    return q;
}

double qubit_ergotropy(const QubitExpectations& e, double omega_b) {
    // E - E_passive with Bloch vector length r: (w/2)(z + r)
    const double r = std::sqrt(e.sz * e.sz + 4.0 * std::norm(e.sm));
    return 0.5 * omega_b * (e.sz + r);
}

double moment_shift(const BareMoments& x, const BareMoments& y) {
    auto rel = [](cplx u, cplx v) { return std::abs(u - v) / std::max(std::abs(u), 1e-6); };
    double s = 0.0;
    s = std::max(s, rel(x.occ_b, y.occ_b));
    s = std::max(s, rel(x.sq_b, y.sq_b));
    s = std::max(s, rel(x.occ_a, y.occ_a));
    s = std::max(s, rel(x.sq_a, y.sq_a));
    s = std::max(s, rel(x.cross_nab, y.cross_nab));
    s = std::max(s, rel(x.cross_ab, y.cross_ab));
    s = std::max(s, rel(x.mean_b, y.mean_b));
    return s;
}

OracleResult oracle_bare_moments(OracleModel kind, const ModelParams& p, InitialState init,
                                 const std::vector<double>& times, int n_max, double rel_tol, double tol,
                                 int max_rounds) {
    if (kind == OracleModel::Rabi || kind == OracleModel::TwoQubits)
        throw std::invalid_argument("bare moments need two oscillators");
    OracleResult res;
    std::vector<double> finite;
    for (double t : times)
        if (std::isfinite(t)) finite.push_back(t);
    for (int round = 0; round < max_rounds; ++round) {
        const int n = n_max + 5 * round;
        TruncatedModel m;
        try {
            m = build_model(kind, p, n);
        } catch (const DimensionTooLarge&) {
            break;
        }
        const LindbladGenerator g = build_global_lindblad(m, p);
        OracleRun run;
        run.n_max = n;
        std::vector<BareMoments> fin;
        if (!finite.empty()) {
            Eigen::MatrixXcd rho0;
            if (init == InitialState::BareVacuum) {
                rho0 = bare_vacuum_density(m);
            } else {
                PreparedState ps = polariton_ground_density(m);
                rho0 = std::move(ps.rho);
                run.truncation_loss = ps.truncation_loss;
            }
            const Trajectory tr = evolve(g, rho0, finite, tol);
            run.dropped_weight = tr.dropped_weight;
            run.cptp = tr.cptp;
            // evolve sorts the times; map back to request order
            for (double t : finite) {
                const auto it = std::find(tr.times.begin(), tr.times.end(), t);
                fin.push_back(moments_from_density(tr.states[it - tr.times.begin()], m, g));
            }
        }
        std::optional<BareMoments> steady;
        size_t fi = 0;
        for (double t : times) {
            if (std::isfinite(t)) {
                run.moments.push_back(fin[fi++]);
            } else {
                if (!steady) {
                    const EigenDensity ss = steady_state(g);
                    run.cptp = merge(run.cptp, cptp_report(ss));
                    steady = moments_from_density(ss, m, g);
                }
                run.moments.push_back(*steady);
            }
        }
        if (!res.runs.empty()) {
            double shift = 0.0;
            for (size_t k = 0; k < run.moments.size(); ++k)
                shift = std::max(shift, moment_shift(res.runs.back().moments[k], run.moments[k]));
            res.last_shift = shift;
            res.runs.push_back(std::move(run));
            if (shift < rel_tol) {
                res.converged = true;
                break;
            }
        } else {
            res.runs.push_back(std::move(run));
        }
    }
    if (res.runs.empty()) throw DimensionTooLarge("initial truncation exceeds the dimension budget");
    return res;
}

} // namespace usc
