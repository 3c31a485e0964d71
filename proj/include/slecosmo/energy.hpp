#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "quadrature.hpp"
#include "states.hpp"

namespace slecosmo {

// Energy of one comoving mode at conformal coupling, on shell:
// rho = (1/(2 pi^2 a^4)) int dk k^2 per_mode_energy.
inline double per_mode_energy(cplx chi, cplx dchi, double k, double m, double a) {
    return mode_energy(chi, dchi, k * k + m * m * a * a);
}

// Adiabatic expansion of per_mode_energy: E0 = omega/2 and the second and
// fourth order corrections in conformal-time derivatives of omega.
struct AdiabaticTerms {
    double E0 = 0.0, E2 = 0.0, E4 = 0.0;
};

inline AdiabaticTerms adiabatic_terms(const OmegaDerivatives& o) {
    const double w = o.w, w1 = o.w1, w2 = o.w2, w3 = o.w3;
    const double w3i = 1.0 / (w * w * w);
    const double w5i = w3i / (w * w);
    AdiabaticTerms t;
    t.E0 = 0.5 * w;
    t.E2 = w1 * w1 * w3i / 16.0;
    t.E4 = w5i * (-w1 * w3 / 32.0 + w2 * w2 / 64.0 + 5.0 * w1 * w1 * w2 / (32.0 * w) -
                  45.0 * w1 * w1 * w1 * w1 / (256.0 * w * w));
    return t;
}

inline void check_order(int order) {
    if (order != 0 && order != 2 && order != 4) throw domain_error("subtraction order must be 0, 2 or 4");
}

inline double subtraction_counterterm(double k, double m, double a, const HubbleDerivatives& d, int order = 4) {
    check_order(order);
    const AdiabaticTerms t = adiabatic_terms(omega_derivatives(k, m, a, d));
    double c = t.E0;
    if (order >= 2) c += t.E2;
    if (order >= 4) c += t.E4;
    return c;
}

// Local WKB pieces at (k, a): energy of u0, its bilinear partner b, and the
// part of E(u0) above the chosen counterterm.
struct LocalModeTerms {
    double Eu = 0.0;
    cplx b;
    double excess = 0.0;  // E(u0) - counterterm
    double E4 = 0.0;
};

inline LocalModeTerms local_terms(double k, double m, double a, const HubbleDerivatives& d, int order) {
    const OmegaDerivatives o = omega_derivatives(k, m, a, d);
    const AdiabaticTerms t = adiabatic_terms(o);
    LocalModeTerms l;
    l.Eu = t.E0 + t.E2;  // exact for the order-0 WKB pair
    l.b = cplx(o.w1 * o.w1 / (4.0 * o.w * o.w), o.w1) / (4.0 * o.w);
    l.excess = order == 0 ? t.E2 : (order == 2 ? 0.0 : -t.E4);
    l.E4 = t.E4;
    return l;
}

// E(chi) - counterterm for chi = alpha u0 + beta conj(u0) with |alpha|^2 - |beta|^2 = 1,
// written so that nothing cancels at large k.
inline double subtracted_mode_energy(cplx alpha, cplx beta, const LocalModeTerms& l) {
    return 2.0 * std::norm(beta) * l.Eu + 2.0 * std::real(alpha * std::conj(beta) * l.b) + l.excess;
}

inline double full_mode_energy(cplx alpha, cplx beta, const LocalModeTerms& l) {
    return l.Eu * (1.0 + 2.0 * std::norm(beta)) + 2.0 * std::real(alpha * std::conj(beta) * l.b);
}

struct FieldSpec {
    double mass = 0.0;  // in units of H0
    double xi = 1.0 / 6.0;
    GeneralizedThermal thermal{};
};

struct StateDensityOptions {
    int subtraction_order = 4;
    double tolerance = 1e-6;  // absolute, in units of rho_LCDM at each output
    double rel_tol = 1e-7;
    double k_lo_factor = 1e-3;
    double k_hi_factor = 1e3;
    double direct_mass_limit = 1e3;  // above this only the adiabatic bound is reported
    std::size_t max_panels = 400;
    SleOptions sle{};
};

struct StateDensities {
    std::vector<double> a;
    std::vector<double> rho_gvac, rho_gvac_err;
    std::vector<double> rho_gth, rho_gth_err;
    bool converged = true;
    bool bound_only = false;
    std::size_t evaluations = 0;
};

namespace detail {

template <Background B>
double gate_momentum(double m, const B& bg, const SleGrid& g, double threshold) {
    if (m == 0.0) return 0.0;
    double lo = std::log(1e-6 * m), hi = std::log(1e8 * m + 1e8);
    if (!wkb_gate(std::exp(hi), m, bg, g.a_lo, g.a_hi, threshold)) return std::exp(hi);
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (wkb_gate(std::exp(mid), m, bg, g.a_lo, g.a_hi, threshold) ? hi : lo) = mid;
    }
    return std::exp(hi);
}

}  // namespace detail

// rho_gvac and rho_gth (units of rho0) of the generalized thermal state built on
// the SLE for `sampling`, at each scale factor in a_out.
template <Background B>
StateDensities rho_state_dependent(const FieldSpec& field, const B& bg, const CosmologyParams& params,
                                   const SamplingFunction& sampling, std::vector<double> a_out,
                                   const StateDensityOptions& opt = {}) {
    check_order(opt.subtraction_order);
    if (field.xi != 1.0 / 6.0) throw domain_error("energy densities are implemented for conformal coupling only");
    std::sort(a_out.begin(), a_out.end());
    const std::size_t n = a_out.size();
    const double m = field.mass;
    const double kappa = params.density_factor();
    StateDensities out;
    out.a = a_out;
    out.rho_gvac.assign(n, 0.0);
    out.rho_gvac_err.assign(n, 0.0);
    out.rho_gth.assign(n, 0.0);
    out.rho_gth_err.assign(n, 0.0);

    std::vector<HubbleDerivatives> hd;
    for (double a : a_out) hd.push_back(bg.derivatives(a));

    if (m > opt.direct_mass_limit) {
        // Far inside the adiabatic regime the SLE agrees with the adiabatic
        // vacuum beyond fourth order; report the order-six size as the error.
        out.bound_only = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double H = hd[i].H;
            out.rho_gvac_err[i] = kappa * H * H * H * H * (H / m) * (H / m) / (2.0 * pi * pi);
        }
        return out;
    }

    const SleGrid grid = SleGrid::build(bg, sampling, a_out);
    double scale_lo = 1e300, scale_hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::max(a_out[i] * hd[i].H, m * a_out[i]);
        scale_lo = std::min(scale_lo, s);
        scale_hi = std::max(scale_hi, s);
    }
    double k_lo = opt.k_lo_factor * scale_lo, k_hi = opt.k_hi_factor * scale_hi;
    const bool thermal = field.thermal.active();
    if (thermal) {
        k_lo = std::min(k_lo, 1e-3 / field.thermal.beta);
        k_hi = std::max(k_hi, 60.0 / field.thermal.beta);
    }

    std::vector<double> breaks;
    const double x_lo = std::log(k_lo), x_hi = std::log(k_hi);
    const int panels = std::max(4, static_cast<int>(std::ceil(x_hi - x_lo)));
    for (int i = 0; i <= panels; ++i) breaks.push_back(x_lo + (x_hi - x_lo) * i / panels);
    const double kg = detail::gate_momentum(m, bg, grid, opt.sle.gate_threshold);
    if (opt.sle.allow_wkb && kg > k_lo && kg < k_hi) breaks.push_back(std::log(kg));

    // integral-space tolerances: rho/rho0 = kappa/(2 pi^2 a^4) * integral. A third
    // block carries the truncation bound of the WKB branch and never drives refinement.
    std::vector<double> tol(3 * n, std::numeric_limits<double>::infinity());
    std::vector<double> pref(n);
    for (std::size_t i = 0; i < n; ++i) {
        pref[i] = kappa / (2.0 * pi * pi * std::pow(a_out[i], 4));
        const double lcdm = hd[i].H * hd[i].H / (params.hubble_constant * params.hubble_constant);
        tol[i] = opt.tolerance * lcdm / pref[i];
        tol[n + i] = opt.tolerance * lcdm / pref[i];
    }

    auto integrand = [&](double x) {
        const double k = std::exp(x);
        const SleMode s = solve_sle_mode(k, m, bg, sampling, grid, opt.sle);
        std::vector<double> v(3 * n, 0.0);
        const ThermalWeights tw = thermal_weights(field.thermal, k, m);
        const double k3 = k * k * k;
        for (std::size_t i = 0; i < n; ++i) {
            const LocalModeTerms l = local_terms(k, m, s.a[i], hd[i], opt.subtraction_order);
            v[i] = k3 * subtracted_mode_energy(s.alpha[i], s.beta[i], l);
            if (s.wkb_reference) {
                // past the gate the state follows the adiabatic vacuum through fourth order
                v[i] += k3 * l.E4;
                v[2 * n + i] = k3 * std::abs(l.E4) * opt.sle.gate_threshold;
            }
            if (thermal) v[n + i] = k3 * 2.0 * tw.minus * full_mode_energy(s.alpha[i], s.beta[i], l);
        }
        return v;
    };

    const VectorIntegral r = integrate_vector(integrand, breaks, tol, opt.rel_tol, opt.max_panels);
    // Tails: below k_lo the integrand grows like k^2, above k_hi it decays at least like k^-3.
    const std::vector<double> f_lo = integrand(x_lo), f_hi = integrand(x_hi);
    out.evaluations = r.evaluations + 2;
    out.converged = r.converged;
    for (std::size_t i = 0; i < n; ++i) {
        out.rho_gvac[i] = pref[i] * r.value[i];
        out.rho_gvac_err[i] =
            pref[i] * (r.error[i] + r.value[2 * n + i] + std::abs(f_lo[i]) / 3.0 + std::abs(f_hi[i]) / 2.0);
        out.rho_gth[i] = pref[i] * r.value[n + i];
        out.rho_gth_err[i] = pref[i] * (r.error[n + i] + std::abs(f_lo[n + i]) / 3.0 + std::abs(f_hi[n + i]) / 2.0);
    }
    return out;
}

inline double rho_thermal_massless(double beta, double a, const CosmologyParams& params) {
    if (!(beta > 0.0)) throw domain_error("beta must be positive");
    if (!(a > 0.0)) throw domain_error("scale factor must be positive");
    return params.density_factor() * pi * pi / (30.0 * std::pow(beta, 4) * std::pow(a, 4));
}

struct FreezeOutParams {
    double x_F = 0.0;
    double a_F = 0.0;
    double mass_gev = 0.0;

    void validate() const {
        if (!(x_F > 0.0)) throw domain_error("x_F must be positive");
        if (!(a_F > 0.0 && a_F < 1.0)) throw domain_error("a_F must lie in (0, 1)");
    }
};

// Freeze-out data of a WIMP of mass m (GeV): x_F = 15 + 3 log10(m/GeV),
// a_F = 1e-12 (m/GeV)^-1.
inline FreezeOutParams wimp_freeze_out(double mass_gev) {
    if (!(mass_gev > 0.0)) throw domain_error("mass must be positive");
    return {15.0 + 3.0 * std::log10(mass_gev), 1e-12 / mass_gev, mass_gev};
}

inline bool freeze_out_reliable(double x_F) { return x_F >= 5.0; }

// Large-mass closed form of the massive thermal energy density (units of rho0);
// m and beta in H0 units, x_F = beta a_F m.
inline double rho_thermal_massive(double m, double beta, double a_F, double a, const CosmologyParams& params) {
    const double xF = beta * a_F * m;
    if (!(xF > 0.0)) throw domain_error("x_F must be positive");
    if (!(a > 0.0)) throw domain_error("scale factor must be positive");
    return params.density_factor() * std::pow(2.0 * pi, -1.5) * m * std::pow(xF, 1.5) * std::exp(-xF) /
           (beta * beta * beta * a * a * a);
}

struct RenormalizationChoice {
    double omega_lambda_ren = 0.7;
    double delta = 0.0;
    double epsilon = 0.0;
    double gamma = 1e-122;
    double mu_scale = 1.0;      // Hadamard scale, 1/metre
    double mu_reference = 1.0;  // scale at which epsilon is quoted, 1/metre

    bool operator==(const RenormalizationChoice&) const = default;
};

// Shift of the J-coefficient when the Hadamard scale moves away from its
// reference value; the m^4 and m^2 pieces are absorbed into Omega_Lambda and
// Newton's constant.
inline double epsilon_scale_shift(const RenormalizationChoice& r, const CosmologyParams& params) {
    return params.density_factor() * std::log(r.mu_scale / r.mu_reference) / (2880.0 * pi * pi);
}

struct StateContributions {
    double rho_gvac_m = 0.0;
    double rho_gvac_0 = 0.0;
    double rho_gth_m = 0.0;
    double rho_gth_0 = 0.0;
};

struct EnergyDensityBreakdown {
    double rho_gvac_m = 0.0;
    double rho_gvac_0 = 0.0;
    double rho_gth_m = 0.0;
    double rho_gth_0 = 0.0;
    double anomaly = 0.0;
    double lambda_term = 0.0;
    double delta_term = 0.0;
    double epsilon_term = 0.0;
    double total = 0.0;

    double sum() const {
        return rho_gvac_m + rho_gvac_0 + rho_gth_m + rho_gth_0 + anomaly + lambda_term + delta_term + epsilon_term;
    }
};

template <Background B>
EnergyDensityBreakdown rho_total(const StateContributions& s, double a, const RenormalizationChoice& r, const B& bg,
                                 const CosmologyParams& params) {
    const HubbleDerivatives d = bg.derivatives(a);
    const CurvatureTensors00 c = curvature_from(d);
    const double h0 = params.hubble_constant;
    const double x = d.H / h0;
    EnergyDensityBreakdown e;
    e.rho_gvac_m = s.rho_gvac_m;
    e.rho_gvac_0 = s.rho_gvac_0;
    e.rho_gth_m = s.rho_gth_m;
    e.rho_gth_0 = s.rho_gth_0;
    e.anomaly = r.gamma * x * x * x * x;
    e.lambda_term = r.omega_lambda_ren;
    e.delta_term = r.delta * x * x;
    e.epsilon_term = (r.epsilon + epsilon_scale_shift(r, params)) * c.J00 / (h0 * h0 * h0 * h0);
    e.total = e.sum();
    return e;
}

}  // namespace slecosmo
