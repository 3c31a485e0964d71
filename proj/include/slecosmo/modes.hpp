#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "background.hpp"

namespace slecosmo {

// omega = sqrt(k^2 + m^2 a^2) and its first four conformal-time derivatives.
struct OmegaDerivatives {
    double w = 0.0, w1 = 0.0, w2 = 0.0, w3 = 0.0, w4 = 0.0;
};

inline OmegaDerivatives omega_derivatives(double k, double m, double a, const HubbleDerivatives& d) {
    const double H = d.H, H1 = d.dH, H2 = d.d2H, H3 = d.d3H;
    // conformal-time derivatives of a
    const double a1 = a * a * H;
    const double a2 = a * a * a * (2.0 * H * H + H1);
    const double a3 = a * a * a * a * (6.0 * H * H * H + 7.0 * H * H1 + H2);
    const double a4 = a * a * a * a * a *
                      (24.0 * H * H * H * H + 46.0 * H * H * H1 + 11.0 * H * H2 + 7.0 * H1 * H1 + H3);
    const double m2 = m * m;
    const double s1 = 2.0 * m2 * a * a1;
    const double s2 = 2.0 * m2 * (a1 * a1 + a * a2);
    const double s3 = 2.0 * m2 * (3.0 * a1 * a2 + a * a3);
    const double s4 = 2.0 * m2 * (3.0 * a2 * a2 + 4.0 * a1 * a3 + a * a4);
    OmegaDerivatives o;
    o.w = std::sqrt(k * k + m2 * a * a);
    o.w1 = s1 / (2.0 * o.w);
    o.w2 = (s2 - 2.0 * o.w1 * o.w1) / (2.0 * o.w);
    o.w3 = (s3 - 6.0 * o.w1 * o.w2) / (2.0 * o.w);
    o.w4 = (s4 - 8.0 * o.w1 * o.w3 - 6.0 * o.w2 * o.w2) / (2.0 * o.w);
    return o;
}

// chi * conj(chi') - conj(chi) * chi', which is i for a normalised mode.
inline cplx wronskian(cplx chi, cplx dchi) { return chi * std::conj(dchi) - std::conj(chi) * dchi; }

struct ModeData {
    cplx chi;
    cplx dchi;
};

// Order-0 adiabatic pair at zero phase: u = 1/sqrt(2 omega), u' = (-i omega - omega'/(2 omega)) u.
inline ModeData wkb_local(double k, double m, double a, const HubbleDerivatives& d) {
    const double w = std::sqrt(k * k + m * m * a * a);
    const double w1 = m * m * a * a * a * d.H / w;
    const double u = 1.0 / std::sqrt(2.0 * w);
    return {cplx(u, 0.0), cplx(-w1 / (2.0 * w) * u, -w * u)};
}

struct ModeFunction {
    double k = 0.0;
    double m = 0.0;
    double xi = 1.0 / 6.0;
    std::vector<double> tau;
    std::vector<double> a;
    std::vector<double> t;
    std::vector<cplx> chi;
    std::vector<cplx> dchi;
    std::vector<double> extras;  // final values of any accumulated integrals
    double wronskian_drift = 0.0;
    bool drift_warning = false;
    std::size_t steps = 0;
};

struct ModeInitial {
    double tau0 = 0.0;
    double a0 = 1.0;
    double t0 = 0.0;
    cplx chi;
    cplx dchi;
};

struct ModeSolveOptions {
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
    std::size_t max_steps = 2'000'000;
    double max_oscillations = 2e5;
    double wronskian_threshold = 1e-8;
    // Largest step in oscillation phase (radians) when extra integrals are carried:
    // the embedded RKF78 estimate cannot see a quadrature of an oscillating
    // integrand that steps over whole periods.
    double max_phase_step = 0.5;
};

// Extra integrals carried along the mode: out[i] receives d(extra_i)/dtau.
struct ModeSource {
    std::size_t count = 0;
    std::function<void(double tau, double a, double t, cplx chi, cplx dchi, double* out)> rhs;
};

struct mode_infeasible : numerical_error {
    using numerical_error::numerical_error;
};

namespace detail {

// Adaptive RKF78 stepping that lands exactly on every grid point; max_step(x)
// caps the step from the current state.
template <class Sys, class Observer, class Cap>
std::size_t integrate_on_grid(Sys&& sys, std::vector<double>& x, double tau, std::span<const double> grid,
                              double dt, const ModeSolveOptions& opt, Observer&& observe, Cap&& max_step) {
    namespace ode = boost::numeric::odeint;
    auto stepper =
        ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_fehlberg78<std::vector<double>>());
    std::size_t steps = 0;
    for (double target : grid) {
        while (tau < target) {
            const double h = std::min({dt, max_step(x), target - tau});
            const bool last = h >= target - tau;
            double hh = h;
            if (ode::controlled_step_result::success == stepper.try_step(sys, x, tau, hh)) {
                if (last) tau = target;
                dt = last ? std::max(dt, hh) : hh;
                if (++steps > opt.max_steps)
                    throw mode_infeasible("mode step budget exhausted; use the WKB route", tau);
            } else {
                dt = hh;
                if (dt < 1e-15 * (1.0 + std::abs(tau)))
                    throw mode_infeasible("mode step size underflow; use the WKB route", tau);
            }
        }
        observe(tau, x);
    }
    return steps;
}

}  // namespace detail

// Integrates chi'' + (k^2 + m^2 a^2 + (xi - 1/6) R a^2) chi = 0 in conformal time,
// carrying a(tau) and t(tau) along, and stepping exactly onto each grid point.
template <Background B>
ModeFunction solve_mode(double k, double m, double xi, const B& bg, const ModeInitial& init,
                        std::span<const double> grid, const ModeSolveOptions& opt = {},
                        const ModeSource& source = {}) {
    if (grid.empty()) throw domain_error("empty mode grid");
    if (!std::is_sorted(grid.begin(), grid.end()) || grid.front() < init.tau0)
        throw domain_error("mode grid must be ascending and start at or after tau0");
    if (std::abs(wronskian(init.chi, init.dchi) - cplx(0.0, 1.0)) > 1e-10)
        throw domain_error("initial mode data violate the Wronskian normalisation");

    const std::size_t n = 6 + source.count;
    using state_t = std::vector<double>;
    auto sys = [&](const state_t& x, state_t& dx, double tau) {
        const double a = x[4];
        const HubbleDerivatives d = bg.derivatives(a);
        double w2 = k * k + m * m * a * a;
        if (xi != 1.0 / 6.0) w2 += (xi - 1.0 / 6.0) * 6.0 * (2.0 * d.H * d.H + d.dH) * a * a;
        dx[0] = x[2];
        dx[1] = x[3];
        dx[2] = -w2 * x[0];
        dx[3] = -w2 * x[1];
        dx[4] = a * a * d.H;
        dx[5] = a;
        if (source.count)
            source.rhs(tau, a, x[5], cplx(x[0], x[1]), cplx(x[2], x[3]), dx.data() + 6);
    };

    // Rough oscillation count; refuse rather than grind through a hopeless solve.
    const double span_tau = grid.back() - init.tau0;
    const double osc = std::sqrt(k * k + m * m * init.a0 * init.a0) * span_tau / (2.0 * pi);
    if (osc > opt.max_oscillations && m > 0.0)
        throw mode_infeasible("mode oscillates too fast for direct integration; use the WKB route", osc);

    state_t x(n, 0.0);
    x[0] = init.chi.real();
    x[1] = init.chi.imag();
    x[2] = init.dchi.real();
    x[3] = init.dchi.imag();
    x[4] = init.a0;
    x[5] = init.t0;

    ModeFunction mf;
    mf.k = k;
    mf.m = m;
    mf.xi = xi;
    mf.tau.reserve(grid.size());
    const double dt0 = 0.1 / std::sqrt(k * k + m * m * init.a0 * init.a0 + 1e-300);
    mf.steps = detail::integrate_on_grid(sys, x, init.tau0, grid, dt0, opt, [&](double tau, const state_t& y) {
        mf.tau.push_back(tau);
        mf.a.push_back(y[4]);
        mf.t.push_back(y[5]);
        const cplx c(y[0], y[1]), dc(y[2], y[3]);
        mf.chi.push_back(c);
        mf.dchi.push_back(dc);
        mf.wronskian_drift = std::max(mf.wronskian_drift, std::abs(wronskian(c, dc) - cplx(0.0, 1.0)));
    }, [&](const state_t& y) {
        if (source.count == 0) return std::numeric_limits<double>::infinity();
        return opt.max_phase_step / std::sqrt(k * k + m * m * y[4] * y[4] + 1e-300);
    });
    mf.extras.assign(x.begin() + 6, x.end());
    mf.drift_warning = mf.wronskian_drift > opt.wronskian_threshold;
    return mf;
}

// Order-0 adiabatic mode exp(-i int W)/sqrt(2W), anchored at zero phase at p0.
// The phase integral is done over ln a on expanding backgrounds and directly in
// tau when a is constant.
template <Background B>
double wkb_phase(double k, double m, const B& bg, const TimePoint& p0, const TimePoint& p, double tol = 1e-12) {
    if (p.a == p0.a) return std::sqrt(k * k + m * m * p.a * p.a) * (p.tau - p0.tau);
    auto f = [&](double x) {
        const double a = std::exp(x);
        return std::sqrt(k * k + m * m * a * a) / (a * bg.hubble(a));
    };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, std::log(p0.a), std::log(p.a), 20,
                                                                         tol, &err);
}

template <Background B>
ModeData wkb_mode(double k, double m, const B& bg, const TimePoint& p0, const TimePoint& p) {
    const ModeData u = wkb_local(k, m, p.a, bg.derivatives(p.a));
    const cplx ph = std::polar(1.0, -wkb_phase(k, m, bg, p0, p));
    return {u.chi * ph, u.dchi * ph};
}

struct AdiabaticError {
    double e1 = 0.0;
    double e2 = 0.0;
};

template <Background B>
AdiabaticError adiabatic_error(double k, double m, const B& bg, double a) {
    if (!(m > 0.0)) throw domain_error("adiabatic error estimators need m > 0");
    const HubbleDerivatives d = bg.derivatives(a);
    const double W = std::sqrt(k * k + m * m * a * a);
    return {d.H * m / (W * W), a * d.dH * m / (W * W * W)};
}

// True when the order-0 WKB mode is an adequate reference over [a_lo, a_hi].
template <Background B>
bool wkb_gate(double k, double m, const B& bg, double a_lo, double a_hi, double threshold = 1e-4) {
    if (m == 0.0) return true;  // exact at conformal coupling
    double worst = 0.0;
    const int n = 24;
    for (int i = 0; i <= n; ++i) {
        const double a = a_lo * std::pow(a_hi / a_lo, static_cast<double>(i) / n);
        const AdiabaticError e = adiabatic_error(k, m, bg, a);
        worst = std::max({worst, std::abs(e.e1), std::abs(e.e2)});
    }
    return worst < threshold;
}

}  // namespace slecosmo
