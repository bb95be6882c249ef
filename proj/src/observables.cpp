// observables.cpp - normal -> bare moments, energies, ergotropy and closed forms
#include "usc/observables.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "usc/errors.hpp"

namespace usc {

namespace {

double one_minus_exp(double k, double t) {
    if (std::isinf(t)) return k > 0.0 ? 1.0 : 0.0;
    return -std::expm1(-k * t);
}

void require_resonant(const ModelParams& p) {
    p.validate();
    if (p.omega_a != p.omega_b) throw std::invalid_argument("closed forms assume wa = wb");
}

// normalization N_+- = g/sqrt(2(w+w_j)(+-2g + w + w_j)) of the resonant isotropic model
double iso_norm(double w, double wj, double g, double sign) {
    return g / std::sqrt(2.0 * (w + wj) * (sign * 2.0 * g + w + wj));
}

} // namespace

double BareMoments::passive_M() const {
    const double n = occ_b - std::norm(mean_b);
    const cplx s = sq_b - mean_b * mean_b;
    return (1.0 + 2.0 * n) * (1.0 + 2.0 * n) - 4.0 * std::norm(s);
}

bool BareMoments::is_physical(double tol) const {
    return occ_b >= -1e-10 && occ_a >= -1e-10 && passive_M() >= 1.0 - tol;
}

Eigen::Matrix4cd normal_to_bare_map(const NormalModeBasis& basis) {
    const HopfieldRow& P = basis.coeffs[PLUS];
    const HopfieldRow& M = basis.coeffs[MINUS];
    Eigen::Matrix4cd L;
    L << std::conj(P.t), std::conj(M.t), -P.v, -M.v,
         std::conj(P.u), std::conj(M.u), -P.w, -M.w,
         -std::conj(P.v), -std::conj(M.v), P.t, M.t,
         -std::conj(P.w), -std::conj(M.w), P.u, M.u;
    return L;
}

Eigen::Matrix4cd bare_product_matrix(const MomentState& state, const NormalModeBasis& basis) {
    const Eigen::Matrix4cd L = normal_to_bare_map(basis);
    return L * state.product_matrix() * L.transpose();
}

BareMoments bare_moments_from_products(const Eigen::Matrix4cd& Q) {
    BareMoments b;
    b.mean_b = 0.0;
    b.occ_b = Q(3, 1).real();
    b.sq_b = Q(1, 1);
    b.occ_a = Q(2, 0).real();
    b.sq_a = Q(0, 0);
    b.cross_nab = Q(2, 1);
    b.cross_ab = Q(0, 1);
    return b;
}

BareMoments normal_to_bare(const MomentState& state, const NormalModeBasis& basis) {
    return bare_moments_from_products(bare_product_matrix(state, basis));
}

BatteryReport battery_report(const BareMoments& bare, double e_b_initial, double omega_b) {
    if (e_b_initial < 0.0) throw std::invalid_argument("initial battery energy must be non-negative");
    const double M = bare.passive_M();
    if (M < 1.0 - 1e-8) throw UnphysicalState("battery state violates the uncertainty bound (M < 1)");
    BatteryReport r;
    r.energy_b = omega_b * bare.occ_b;
    r.stored = r.energy_b - e_b_initial;
    r.passive = omega_b * (std::sqrt(std::max(M, 1.0)) - 1.0) / 2.0;
    r.ergotropy = r.energy_b - r.passive;
    if (r.stored > 1e-12) r.ratio = r.ergotropy / r.stored;
    return r;
}

double small_x_parameter(const BareMoments& bare) {
    return 2.0 * std::abs(bare.sq_b) / (1.0 + 2.0 * bare.occ_b);
}

double ergotropy_small_x(const BareMoments& bare, double omega_b) {
    if (std::abs(bare.mean_b) != 0.0) throw std::invalid_argument("small-x formula assumes <b> = 0");
    if (small_x_parameter(bare) >= 1.0) throw std::invalid_argument("small-x formula needs x < 1");
    return omega_b * std::norm(bare.sq_b) / (1.0 + 2.0 * bare.occ_b);
}

double transient_stored_energy_closed(const ModelParams& p, double t, ClosedFormModel model) {
    require_resonant(p);
    if (t < 0.0) throw std::invalid_argument("negative time");
    const double w = p.omega_a, T = p.temperature, gamma = p.gamma_a;

    switch (model) {
    case ClosedFormModel::Isotropic: {
        if (!p.is_isotropic() || p.diamag_D != 0.0) throw std::invalid_argument("isotropic model expected");
        const double g = p.g_bs;
        if (g == 0.0) return 0.0;
        const auto [wp, wm] = isotropic_frequencies(w, w, g);
        double sum = 0.0;
        for (int j = 0; j < 2; ++j) {
            const double s = j == PLUS ? 1.0 : -1.0;
            const double wj = j == PLUS ? wp : wm;
            const double Nn = iso_norm(w, wj, g, s);
            // resonant bath weight |W_j|^2 = w/(2 w_j)
            const double kappa = gamma * wj * w / (2.0 * wj);
            const double fill = one_minus_exp(kappa, t) * bose_einstein(wj, T);
            const double ratio = s + (w + wj) / g;
            const double nbar = Nn * Nn * (1.0 + fill * (1.0 + ratio * ratio));
            sum += nbar - Nn * Nn;
        }
        return p.omega_b * sum;
    }
    case ClosedFormModel::Anisotropic: {
        if (p.diamag_D != 0.0) throw std::invalid_argument("anisotropic closed form has no A^2 term");
        const double gb = p.g_bs, gs = p.g_sq;
        if (gb * gs == 0.0)
            throw FormulaDomainError("anisotropic closed form is singular for pure beam-splitter or squeezing");
        const NormalModeBasis basis = diagonalize_anisotropic(p);
        double sum = 0.0;
        for (int j = 0; j < 2; ++j) {
            const double s = j == PLUS ? 1.0 : -1.0;
            const double wj = basis.omega(j);
            const double shift = s * gb + w + wj;
            const double Nj2 = gs * gs / (-2.0 * gs * gs + 2.0 * shift * shift);
            const double xi = shift * shift / (gs * gs);
            // bath weight is not printed for this model; take it from the eigensolve
            const double kappa = gamma * wj * basis.weight_sq(j);
            sum += Nj2 * (1.0 + xi) * bose_einstein(wj, T) * one_minus_exp(kappa, t);
        }
        return p.omega_b * sum;
    }
    case ClosedFormModel::HopfieldA2: {
        if (!p.is_isotropic()) throw std::invalid_argument("A^2 model expects g_bs = g_sq");
        const double g = p.g_bs;
        if (g == 0.0) return 0.0;
        const auto [wp, wm] = hopfield_a2_frequencies(w, p.omega_b, g, p.diamag_D);
        const double th = hopfield_a2_theta(w, p.omega_b, g, p.diamag_D);
        const double c2 = std::cos(th) * std::cos(th), s2 = std::sin(th) * std::sin(th);
        const double Om = (p.omega_b * p.omega_b + wm * wm) / wm;
        const double Op = (p.omega_b * p.omega_b + wp * wp) / wp;
        const double km = gamma * s2 * w, kp = gamma * c2 * w;
        return 0.5 * (Om * bose_einstein(wm, T) * c2 * one_minus_exp(km, t) +
                      Op * bose_einstein(wp, T) * s2 * one_minus_exp(kp, t));
    }
    }
    throw std::logic_error("unknown closed-form model");
}

double steady_stored_energy_closed(const ModelParams& p, InitialState init, ClosedFormModel model) {
    require_resonant(p);
    const double inf = std::numeric_limits<double>::infinity();
    if (init == InitialState::PolaritonGround) {
        if (model == ClosedFormModel::Isotropic) {
            const double g = p.g_bs, w = p.omega_a;
            if (!p.is_isotropic() || p.diamag_D != 0.0) throw std::invalid_argument("isotropic model expected");
            if (g == 0.0) return 0.0;
            const auto [wp, wm] = isotropic_frequencies(w, w, g);
            const double Nm = iso_norm(w, wm, g, -1.0), Np = iso_norm(w, wp, g, 1.0);
            const double dm = -g + w + wm, dp = g + w + wp;
            return p.omega_b *
                   (Nm * Nm * bose_einstein(wm, p.temperature) * (g * g + dm * dm) +
                    Np * Np * bose_einstein(wp, p.temperature) * (g * g + dp * dp)) /
                   (g * g);
        }
        return transient_stored_energy_closed(p, inf, model);
    }

    // bare vacuum: the battery starts empty, so the stored energy is E_b(inf)
    switch (model) {
    case ClosedFormModel::Isotropic: {
        const double g = p.g_bs, w = p.omega_a;
        if (!p.is_isotropic() || p.diamag_D != 0.0) throw std::invalid_argument("isotropic model expected");
        if (g == 0.0) return 0.0;
        const auto [wp, wm] = isotropic_frequencies(w, w, g);
        const double Nm = iso_norm(w, wm, g, -1.0), Np = iso_norm(w, wp, g, 1.0);
        const double dm = (-g + w + wm) / g, dp = (g + w + wp) / g;
        return p.omega_b * (Nm * Nm * (1.0 + bose_einstein(wm, p.temperature) * (1.0 + dm * dm)) +
                            Np * Np * (1.0 + bose_einstein(wp, p.temperature) * (1.0 + dp * dp)));
    }
    case ClosedFormModel::Anisotropic: {
        const double gb = p.g_bs, gs = p.g_sq, w = p.omega_a;
        if (gb * gs == 0.0)
            throw FormulaDomainError("anisotropic closed form is singular for pure beam-splitter or squeezing");
        const NormalModeBasis basis = diagonalize_anisotropic(p);
        double e0 = 0.0;
        for (int j = 0; j < 2; ++j) {
            const double shift = (j == PLUS ? gb : -gb) + w + basis.omega(j);
            e0 += gs * gs / (-2.0 * gs * gs + 2.0 * shift * shift);
        }
        return p.omega_b * e0 + transient_stored_energy_closed(p, inf, model);
    }
    case ClosedFormModel::HopfieldA2: {
        const double g = p.g_bs, w = p.omega_a, wb = p.omega_b;
        if (g == 0.0) return 0.0;
        const auto [wp, wm] = hopfield_a2_frequencies(w, wb, g, p.diamag_D);
        const double th = hopfield_a2_theta(w, wb, g, p.diamag_D);
        const double c2 = std::cos(th) * std::cos(th), s2 = std::sin(th) * std::sin(th);
        const double Nm = bose_einstein(wm, p.temperature), Np = bose_einstein(wp, p.temperature);
        return 0.25 * (-2.0 + (1.0 + 2.0 * Nm) * c2 * (wb * wb + wm * wm) / wm +
                       (1.0 + 2.0 * Np) * s2 * (wb * wb + wp * wp) / wp);
    }
    }
    throw std::logic_error("unknown closed-form model");
}

double isotropic_steady_M_closed(const ModelParams& p) {
    require_resonant(p);
    if (!p.is_isotropic() || p.diamag_D != 0.0) throw std::invalid_argument("isotropic model expected");
    const double g = p.g_bs, w = p.omega_a;
    if (g == 0.0) throw FormulaDomainError("closed-form M divides by g^4");
    const auto [wp, wm] = isotropic_frequencies(w, w, g);
    const double Nm2 = std::pow(iso_norm(w, wm, g, -1.0), 2), Np2 = std::pow(iso_norm(w, wp, g, 1.0), 2);
    const double nm = bose_einstein(wm, p.temperature), np = bose_einstein(wp, p.temperature);
    const double thermal = 2.0 * (Nm2 * nm * (w + wm) * (w + wm) + Np2 * np * (w + wp) * (w + wp));
    const double first = g * g * (1.0 + Nm2 * (4.0 + 8.0 * nm) + Np2 * (4.0 + 8.0 * np)) -
                         2.0 * g * Nm2 * (1.0 + 4.0 * nm) * (w + wm) +
                         2.0 * g * Np2 * (1.0 + 4.0 * np) * (w + wp) + thermal;
    const double second = g * g + 2.0 * g * Nm2 * (w + wm) - 2.0 * g * Np2 * (w + wp) + thermal;
    return first * second / std::pow(g, 4);
}

double a2_model_M(const ModelParams& p, double t) {
    require_resonant(p);
    if (!p.is_isotropic()) throw std::invalid_argument("A^2 model expects g_bs = g_sq");
    if (t < 0.0) throw std::invalid_argument("negative time");
    const double g = p.g_bs, wa = p.omega_a, wb = p.omega_b;
    const auto [wp, wm] = hopfield_a2_frequencies(wa, wb, g, p.diamag_D);
    const double th = hopfield_a2_theta(wa, wb, g, p.diamag_D);
    const double c2 = std::cos(th) * std::cos(th), s2 = std::sin(th) * std::sin(th);
    const double sm = 1.0 + 2.0 * one_minus_exp(p.gamma_a * s2 * wa, t) * bose_einstein(wm, p.temperature);
    const double sp = 1.0 + 2.0 * one_minus_exp(p.gamma_a * c2 * wa, t) * bose_einstein(wp, p.temperature);
    return sm * sm * c2 * c2 + sp * sp * s2 * s2 + sm * sp * c2 * s2 * (wm * wm + wp * wp) / (wm * wp);
}

BatteryReport battery_at(const ModelParams& p, const NormalModeBasis& basis, InitialState init, double t) {
    const DissipationRates rates = dissipation_rates(p, basis);
    const MomentState s0 = initial_moments(init, basis);
    const double e0 = p.omega_b * normal_to_bare(s0, basis).occ_b;
    const MomentState st = std::isinf(t) ? steady_moments(rates) : propagate_analytic(s0, rates, basis, t);
    return battery_report(normal_to_bare(st, basis), std::max(e0, 0.0), p.omega_b);
}

} // namespace usc
