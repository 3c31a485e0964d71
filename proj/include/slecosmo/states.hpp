#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "modes.hpp"

namespace slecosmo {

// Smooth bump exp(-1/(1-x^2)) in cosmological time, normalised to unit integral.
class SamplingFunction {
public:
    SamplingFunction(double t_center, double half_width, double amplitude = 1.0)
        : tc_(t_center), hw_(half_width), amp_(amplitude) {
        if (!(half_width > 0.0)) throw domain_error("sampling width must be positive");
        if (!(amplitude > 0.0)) throw domain_error("sampling amplitude must be positive");
        norm_ = amp_ / (hw_ * bump_integral());
    }

    // Window centred (in ln a) on redshift z_center and spanning `efolds` e-folds of a.
    template <Background B>
    static SamplingFunction from_redshift_window(double z_center, double efolds, const B& bg) {
        if (!(z_center > -1.0) || !(efolds > 0.0)) throw domain_error("invalid sampling window");
        const double ac = 1.0 / (1.0 + z_center);
        const double t_lo = cosmic_time(ac * std::exp(-0.5 * efolds), bg);
        const double t_hi = cosmic_time(ac * std::exp(0.5 * efolds), bg);
        SamplingFunction f(0.5 * (t_lo + t_hi), 0.5 * (t_hi - t_lo));
        f.a_lo_ = ac * std::exp(-0.5 * efolds);
        f.a_hi_ = ac * std::exp(0.5 * efolds);
        return f;
    }

    double operator()(double t) const {
        const double x = (t - tc_) / hw_;
        if (std::abs(x) >= 1.0) return 0.0;
        return norm_ * std::exp(-1.0 / (1.0 - x * x));
    }

    SamplingFunction scaled(double factor) const {
        SamplingFunction f(tc_, hw_, amp_ * factor);
        f.a_lo_ = a_lo_;
        f.a_hi_ = a_hi_;
        return f;
    }

    double t_min() const { return tc_ - hw_; }
    double t_max() const { return tc_ + hw_; }
    double t_center() const { return tc_; }
    double half_width() const { return hw_; }
    double amplitude() const { return amp_; }
    // Scale-factor support; only known when built from a redshift window.
    double a_min() const { return a_lo_; }
    double a_max() const { return a_hi_; }

    static double bump_integral() {
        static const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [](double x) { return std::abs(x) >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - x * x)); }, -1.0, 1.0, 15,
            1e-15);
        return v;
    }

private:
    double tc_, hw_, amp_, norm_ = 0.0;
    double a_lo_ = 0.0, a_hi_ = 0.0;
};

struct BogoliubovPair {
    cplx lambda{1.0, 0.0};
    cplx mu{0.0, 0.0};
};

// Sampled energy of lambda*chi + mu*conj(chi):
//   c1 (|lambda|^2 + |mu|^2) + 2 Re(lambda conj(mu) c2).
struct EnergyForm {
    double c1 = 0.0;
    cplx c2;

    double energy(cplx lambda, cplx mu) const {
        return c1 * (std::norm(lambda) + std::norm(mu)) + 2.0 * std::real(lambda * std::conj(mu) * c2);
    }
};

struct BogoliubovMinimum {
    BogoliubovPair pair;
    double theta = 0.0;
    double phi = 0.0;
    double value = 0.0;
};

inline void check_admissible(const EnergyForm& f) {
    if (!(f.c1 > std::abs(f.c2)))
        throw domain_error("sampled energy form is not positive (c1 <= |c2|): pathological reference or sampling");
}

// On lambda = cosh(theta), mu = e^{i phi} sinh(theta) the form is
// c1 cosh(2 theta) + sinh(2 theta) Re(e^{-i phi} c2); the minimum sits at
// phi = arg(c2) + pi and tanh(2 theta) = |c2| / c1.
inline BogoliubovMinimum minimize_bogoliubov(const EnergyForm& f) {
    check_admissible(f);
    BogoliubovMinimum r;
    const double r2 = std::abs(f.c2);
    r.theta = 0.5 * std::atanh(r2 / f.c1);
    r.phi = r2 > 0.0 ? std::arg(f.c2) + pi : 0.0;
    if (r.phi > pi) r.phi -= 2.0 * pi;
    r.pair.lambda = std::cosh(r.theta);
    r.pair.mu = std::polar(std::sinh(r.theta), r.phi);
    r.value = std::sqrt((f.c1 - r2) * (f.c1 + r2));
    return r;
}

// Brute-force search over (theta, phi); only used to certify the closed form.
inline BogoliubovMinimum grid_minimize_bogoliubov(const EnergyForm& f, int n_theta, int n_phi, double theta_max) {
    check_admissible(f);
    BogoliubovMinimum best;
    best.value = f.c1;
    for (int i = 0; i <= n_theta; ++i) {
        const double th = theta_max * i / n_theta;
        for (int j = 0; j < n_phi; ++j) {
            const double ph = -pi + 2.0 * pi * j / n_phi;
            const double e = f.c1 * std::cosh(2.0 * th) + std::sinh(2.0 * th) * std::real(std::polar(1.0, -ph) * f.c2);
            if (e < best.value) {
                best.value = e;
                best.theta = th;
                best.phi = ph;
            }
        }
    }
    best.pair.lambda = std::cosh(best.theta);
    best.pair.mu = std::polar(std::sinh(best.theta), best.phi);
    return best;
}

// Per-mode classical energy 1/2 (|chi'|^2 + omega^2 |chi|^2) and its bilinear partner.
inline double mode_energy(cplx chi, cplx dchi, double omega2) { return 0.5 * (std::norm(dchi) + omega2 * std::norm(chi)); }
inline cplx mode_bilinear(cplx chi, cplx dchi, double omega2) { return 0.5 * (dchi * dchi + omega2 * chi * chi); }

// Extra integrals for solve_mode that accumulate (c1, Re c2, Im c2) over the
// sampling support: c = int f(t) e / a^4 dt = int f e / a^3 dtau.
inline ModeSource sampling_source(double k, double m, const SamplingFunction& f) {
    ModeSource src;
    src.count = 3;
    src.rhs = [k, m, f](double, double a, double t, cplx chi, cplx dchi, double* out) {
        const double w = f(t);
        if (w == 0.0) {
            out[0] = out[1] = out[2] = 0.0;
            return;
        }
        const double om2 = k * k + m * m * a * a;
        const double s = w / (a * a * a);
        const cplx b = mode_bilinear(chi, dchi, om2);
        out[0] = s * mode_energy(chi, dchi, om2);
        out[1] = s * b.real();
        out[2] = s * b.imag();
    };
    return src;
}

inline EnergyForm sampled_energy_form(const ModeFunction& mf) {
    if (mf.extras.size() < 3) throw domain_error("mode was not solved with a sampling source");
    EnergyForm f{mf.extras[0], cplx(mf.extras[1], mf.extras[2])};
    check_admissible(f);
    return f;
}

struct ThermalWeights {
    double plus = 1.0;
    double minus = 0.0;
};

struct GeneralizedThermal {
    double beta = 0.0;  // inverse temperature in comoving units; <= 0 or inf means no thermal dressing
    double a_F = 1.0;

    bool active() const { return beta > 0.0 && std::isfinite(beta); }
    double k0(double k, double m) const { return std::sqrt(k * k + m * m * a_F * a_F); }
};

inline ThermalWeights thermal_weights(double beta_k0) {
    if (!(beta_k0 > 0.0)) throw domain_error("thermal weights need beta * k0 > 0");
    if (beta_k0 > 700.0) return {1.0, 0.0};
    const double n = 1.0 / std::expm1(beta_k0);
    return {1.0 + n, n};
}

inline ThermalWeights thermal_weights(const GeneralizedThermal& s, double k, double m) {
    if (!s.active()) return {1.0, 0.0};
    if (!(k > 0.0)) throw domain_error("thermal weights need k > 0");
    return thermal_weights(s.beta * s.k0(k, m));
}

// ---------------------------------------------------------------------------
// State-of-low-energy modes in Bogoliubov form.
//
// The reference mode is written as alpha u + beta conj(u), u = e^{-i theta}/sqrt(2 omega)
// with u' its exact derivative. The mode equation becomes
//   alpha' = -i q (alpha |u|^2 + beta conj(u)^2),  beta' = i q (alpha u^2 + beta |u|^2),
//   q = 3 omega'^2 / (4 omega^2) - omega'' / (2 omega),
// which keeps beta accurate to its own size even when it is tiny at large k.
// When the WKB gate fires q is dropped and the reference is the order-0 WKB mode.

struct SleOptions {
    ModeSolveOptions ode{1e-12, 1e-15, 5'000'000, 1e300, 1e-8, 0.5};
    double gate_threshold = 1e-4;
    BogoliubovPair reference{};  // initial Bogoliubov data of the reference at the start
    bool allow_wkb = true;
};

struct SleMode {
    double k = 0.0;
    double m = 0.0;
    bool wkb_reference = false;
    EnergyForm form;
    BogoliubovMinimum minimum;
    // Coefficients of the SLE mode on the zero-phase local pair (u0, conj(u0)).
    std::vector<double> a;
    std::vector<cplx> alpha;
    std::vector<cplx> beta;
};

// Conformal-time layout shared by all k. The reference mode is anchored where
// the sampling window opens: integration errors made between an output and
// the window would otherwise be absorbed into the reference inconsistently.
struct SleGrid {
    TimePoint anchor;                // reference data (alpha, beta) = (1, 0) here
    std::vector<TimePoint> outputs;  // ascending in a
    std::vector<TimePoint> after;    // anchor-relative forward targets (outputs >= anchor, then window end)
    std::vector<std::size_t> after_index, before_index;
    std::vector<TimePoint> before;   // backward targets, descending in a
    double a_lo = 0.0, a_hi = 0.0;   // a-range spanned (for the WKB gate)

    template <Background B>
    static SleGrid build(const B& bg, const SamplingFunction& f, std::vector<double> a_out) {
        if (a_out.empty()) throw domain_error("no output points");
        std::sort(a_out.begin(), a_out.end());
        if (!(f.a_min() > 0.0)) throw domain_error("sampling function lacks a scale-factor support");
        SleGrid g;
        g.a_lo = std::min(a_out.front(), f.a_min());
        g.a_hi = std::max(a_out.back(), f.a_max());
        g.anchor = time_point_at(f.a_min(), bg);
        for (std::size_t i = 0; i < a_out.size(); ++i) {
            g.outputs.push_back(time_point_at(a_out[i], bg));
            if (a_out[i] < f.a_min()) {
                g.before.insert(g.before.begin(), g.outputs.back());
                g.before_index.insert(g.before_index.begin(), i);
            } else {
                g.after.push_back(g.outputs.back());
                g.after_index.push_back(i);
            }
        }
        if (a_out.back() < f.a_max()) g.after.push_back(time_point_at(f.a_max(), bg));  // cover the window
        return g;
    }
    std::size_t size() const { return outputs.size(); }
};

template <Background B>
SleMode solve_sle_mode(double k, double m, const B& bg, const SamplingFunction& f, const SleGrid& grid,
                       const SleOptions& opt = {}) {
    SleMode r;
    r.k = k;
    r.m = m;
    r.wkb_reference = opt.allow_wkb && wkb_gate(k, m, bg, grid.a_lo, grid.a_hi, opt.gate_threshold);
    const bool exact = !r.wkb_reference;

    // state: alpha(2) beta(2) theta a t c1 c2(2)
    // past the gate the state is the local adiabatic pair whatever the reference
    const BogoliubovPair ref = exact ? opt.reference : BogoliubovPair{};
    std::vector<double> x0(10, 0.0);
    x0[0] = ref.lambda.real();
    x0[1] = ref.lambda.imag();
    x0[2] = ref.mu.real();
    x0[3] = ref.mu.imag();
    x0[5] = grid.anchor.a;
    x0[6] = grid.anchor.t;

    auto sys = [&](const std::vector<double>& y, std::vector<double>& dy, double) {
        const double a = y[5];
        const HubbleDerivatives d = bg.derivatives(a);
        const OmegaDerivatives o = omega_derivatives(k, m, a, d);
        const cplx al(y[0], y[1]), be(y[2], y[3]);
        const cplx ph2 = std::polar(1.0, -2.0 * y[4]);  // e^{-2i theta}
        const double inv2w = 0.5 / o.w;
        if (exact) {
            const double q = 0.75 * o.w1 * o.w1 / (o.w * o.w) - 0.5 * o.w2 / o.w;
            const cplx dal = cplx(0.0, -q) * (al * inv2w + be * std::conj(ph2) * inv2w);
            const cplx dbe = cplx(0.0, q) * (al * ph2 * inv2w + be * inv2w);
            dy[0] = dal.real();
            dy[1] = dal.imag();
            dy[2] = dbe.real();
            dy[3] = dbe.imag();
        } else {
            dy[0] = dy[1] = dy[2] = dy[3] = 0.0;
        }
        dy[4] = o.w;
        dy[5] = a * a * d.H;
        dy[6] = a;
        const double fw = f(y[6]);
        if (fw == 0.0) {
            dy[7] = dy[8] = dy[9] = 0.0;
            return;
        }
        const double Eu = 0.5 * o.w + o.w1 * o.w1 / (16.0 * o.w * o.w * o.w);
        const cplx Bu = ph2 * cplx(o.w1 * o.w1 / (4.0 * o.w * o.w), o.w1) / (4.0 * o.w);
        const double e = (std::norm(al) + std::norm(be)) * Eu + 2.0 * std::real(al * std::conj(be) * Bu);
        const cplx bl = al * al * Bu + be * be * std::conj(Bu) + 2.0 * al * be * Eu;
        const double s = fw / (a * a * a);
        dy[7] = s * e;
        dy[8] = s * bl.real();
        dy[9] = s * bl.imag();
    };

    const std::size_t n = grid.size();
    std::vector<cplx> al_out(n), be_out(n);
    std::vector<double> th_out(n);
    r.a.assign(n, 0.0);
    auto store = [&](std::size_t i, const std::vector<double>& y) {
        al_out[i] = cplx(y[0], y[1]);
        be_out[i] = cplx(y[2], y[3]);
        th_out[i] = y[4];
        r.a[i] = y[5];
    };
    const double dt0 = 0.1 / std::sqrt(k * k + m * m * grid.anchor.a * grid.anchor.a);
    auto cap = [&](const std::vector<double>& y) { return opt.ode.max_phase_step / std::sqrt(k * k + m * m * y[5] * y[5]); };

    std::vector<double> x = x0;
    std::vector<double> taus;
    for (const auto& p : grid.after) taus.push_back(p.tau);
    std::size_t j = 0;
    detail::integrate_on_grid(sys, x, grid.anchor.tau, taus, dt0, opt.ode, [&](double, const std::vector<double>& y) {
        if (j < grid.after_index.size()) store(grid.after_index[j], y);
        ++j;
    }, cap);
    r.form = {x[7], cplx(x[8], x[9])};

    if (!grid.before.empty()) {
        // backward in tau: integrate in -tau with the sign of the right-hand side flipped
        auto rsys = [&](const std::vector<double>& y, std::vector<double>& dy, double s) {
            sys(y, dy, -s);
            for (double& v : dy) v = -v;
        };
        std::vector<double> xb = x0;
        std::vector<double> back;
        for (const auto& p : grid.before) back.push_back(-p.tau);
        std::size_t jb = 0;
        detail::integrate_on_grid(rsys, xb, -grid.anchor.tau, back, dt0, opt.ode,
                                  [&](double, const std::vector<double>& y) { store(grid.before_index[jb++], y); }, cap);
    }

    // Past the gate c2 is a smooth window against e^{-2i theta}, smaller than any
    // adiabatic order; what the integrator returns there is its own noise.
    r.minimum = exact ? minimize_bogoliubov(r.form) : BogoliubovMinimum{{}, 0.0, 0.0, r.form.c1};
    const cplx lam = r.minimum.pair.lambda, mu = r.minimum.pair.mu;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx as = lam * al_out[i] + mu * std::conj(be_out[i]);
        const cplx bs = lam * be_out[i] + mu * std::conj(al_out[i]);
        r.alpha.push_back(as * std::polar(1.0, -th_out[i]));
        r.beta.push_back(bs * std::polar(1.0, th_out[i]));
    }
    return r;
}

// The SLE mode itself at output i, chi = alpha u0 + beta conj(u0).
template <Background B>
ModeData sle_mode_at(const SleMode& s, std::size_t i, const B& bg) {
    const ModeData u = wkb_local(s.k, s.m, s.a[i], bg.derivatives(s.a[i]));
    return {s.alpha[i] * u.chi + s.beta[i] * std::conj(u.chi), s.alpha[i] * u.dchi + s.beta[i] * std::conj(u.dchi)};
}

}  // namespace slecosmo
