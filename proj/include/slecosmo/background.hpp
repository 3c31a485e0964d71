#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <vector>

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "common.hpp"

namespace slecosmo {

// Flat FLRW parameters. Internally H0 = 1; newton_constant is measured in
// units of H0^-2, so rho0 = 3/(8 pi G) in units of H0^4.
struct CosmologyParams {
    double hubble_constant = 1.0;
    double omega_lambda = 0.6999;
    double omega_m = 0.3;
    double omega_r = 1e-4;
    double newton_constant = 3.0 / (8.0 * pi);

    double rho0() const { return 3.0 * hubble_constant * hubble_constant / (8.0 * pi * newton_constant); }
    // Multiply a density in H0^4 units by this to express it in units of rho0.
    double density_factor() const { return 1.0 / rho0(); }

    static CosmologyParams flat(double omega_m, double omega_r) {
        CosmologyParams p;
        p.omega_m = omega_m;
        p.omega_r = omega_r;
        p.omega_lambda = 1.0 - omega_m - omega_r;
        return p;
    }

    void validate() const {
        if (!(hubble_constant > 0.0)) throw domain_error("hubble_constant must be positive");
        if (omega_lambda < 0.0 || omega_m < 0.0 || omega_r < 0.0)
            throw domain_error("density fractions must be non-negative");
        if (!(newton_constant > 0.0)) throw domain_error("newton_constant must be positive");
    }

    bool operator==(const CosmologyParams&) const = default;
};

// H and its first three derivatives with respect to cosmological time.
struct HubbleDerivatives {
    double H = 0.0;
    double dH = 0.0;
    double d2H = 0.0;
    double d3H = 0.0;
};

template <class B>
concept Background = requires(const B& b, double a) {
    { b.derivatives(a) } -> std::same_as<HubbleDerivatives>;
    { b.hubble(a) } -> std::convertible_to<double>;
};

inline double hubble_lcdm(double a, const CosmologyParams& p) {
    if (!(a > 0.0)) throw domain_error("scale factor must be positive");
    const double a3 = a * a * a;
    return p.hubble_constant * std::sqrt(p.omega_lambda + p.omega_m / a3 + p.omega_r / (a3 * a));
}

class LcdmBackground {
public:
    explicit LcdmBackground(CosmologyParams p) : p_(p) { p_.validate(); }

    const CosmologyParams& params() const { return p_; }

    double hubble(double a) const { return hubble_lcdm(a, p_); }

    // H^2 / H0^2, the right-hand side of the Friedmann equation.
    double e2(double a) const {
        const double a3 = a * a * a;
        return p_.omega_lambda + p_.omega_m / a3 + p_.omega_r / (a3 * a);
    }

    HubbleDerivatives derivatives(double a) const {
        if (!(a > 0.0)) throw domain_error("scale factor must be positive");
        const double h2 = p_.hubble_constant * p_.hubble_constant;
        const double m3 = p_.omega_m / (a * a * a);
        const double r4 = p_.omega_r / (a * a * a * a);
        HubbleDerivatives d;
        d.H = hubble(a);
        d.dH = h2 * (-1.5 * m3 - 2.0 * r4);
        const double q = h2 * (4.5 * m3 + 8.0 * r4);
        d.d2H = d.H * q;
        d.d3H = d.dH * q + d.H * d.H * h2 * (-13.5 * m3 - 32.0 * r4);
        return d;
    }

private:
    CosmologyParams p_;
};

class DeSitterBackground {
public:
    explicit DeSitterBackground(double H) : H_(H) {
        if (!(H > 0.0)) throw domain_error("de Sitter rate must be positive");
    }
    double hubble(double) const { return H_; }
    HubbleDerivatives derivatives(double) const { return {H_, 0.0, 0.0, 0.0}; }

private:
    double H_;
};

// Static flat space: a stays at whatever value the caller starts from.
struct MinkowskiBackground {
    double hubble(double) const { return 0.0; }
    HubbleDerivatives derivatives(double) const { return {}; }
};

// H(z) known only on a uniform grid in s = ln(1+z) = -ln a, as w = ln(H^2/H0^2)
// and v = dw/ds. Time derivatives come from quintic splines.
class TabulatedBackground {
public:
    TabulatedBackground(double s0, double ds, std::vector<double> w, std::vector<double> v,
                        double hubble_constant = 1.0)
        : s0_(s0), ds_(ds), h0_(hubble_constant), n_(w.size()),
          w_(w, s0, ds), v_(v, s0, ds) {
        if (w.size() != v.size() || w.size() < 8) throw domain_error("tabulated background needs >= 8 matching samples");
        check_smoothness(v);
    }

    double s_min() const { return s0_; }
    double s_max() const { return s0_ + ds_ * static_cast<double>(n_ - 1); }

    double hubble(double a) const { return h0_ * std::exp(0.5 * w_(to_s(a))); }

    HubbleDerivatives derivatives(double a) const {
        const double s = to_s(a);
        const double w = w_(s);
        const double ws = v_(s);
        const double wss = v_.prime(s);
        const double wsss = v_.double_prime(s);
        const double y = h0_ * h0_ * std::exp(w);
        HubbleDerivatives d;
        d.H = std::sqrt(y);
        d.dH = -0.5 * y * ws;
        d.d2H = 0.5 * d.H * y * (ws * ws + wss);
        d.d3H = -0.5 * y * y * (1.5 * ws * ws * ws + 3.5 * ws * wss + wsss);
        return d;
    }

private:
    double to_s(double a) const {
        if (!(a > 0.0)) throw domain_error("scale factor must be positive");
        const double s = -std::log(a);
        const double eps = 1e-12 * (1.0 + std::abs(s_max()));
        if (s < s0_ - eps || s > s_max() + eps) throw domain_error("scale factor outside tabulated range");
        return std::clamp(s, s0_, s_max());
    }

    // J00 needs the third derivative; a grid that does not resolve v'' shows up
    // as a node-to-node jump of the spline's second derivative.
    void check_smoothness(const std::vector<double>& v) const {
        double scale = 0.0, jump = 0.0;
        for (std::size_t i = 1; i + 1 < n_; ++i) {
            const double s = s0_ + ds_ * static_cast<double>(i);
            const double c = v_.double_prime(s);
            const double l = v_.double_prime(s - 0.5 * ds_);
            const double r = v_.double_prime(s + 0.5 * ds_);
            scale = std::max(scale, std::abs(c) + std::abs(v[i]));
            jump = std::max(jump, std::abs(0.5 * (l + r) - c));
        }
        if (jump > 0.05 * (scale + 1.0))
            throw domain_error("tabulated H(z) too coarse for third derivatives; refine the grid");
    }

    double s0_, ds_, h0_;
    std::size_t n_;
    boost::math::interpolators::cardinal_quintic_b_spline<double> w_;
    boost::math::interpolators::cardinal_quintic_b_spline<double> v_;
};

struct TimePoint {
    double z = 0.0;
    double a = 1.0;
    double t = 0.0;
    double tau = 0.0;
};

namespace detail {

// Integral over x = ln a' from 0 to ln a of a'^(1-power) / H(a').
template <Background B>
double log_a_integral(double a, const B& bg, int power, double tol) {
    if (!(a > 0.0)) throw domain_error("scale factor must be positive");
    if (a == 1.0) return 0.0;
    auto f = [&](double x) {
        const double ax = std::exp(x);
        const double H = bg.hubble(ax);
        if (!(H > 0.0)) throw domain_error("time integrals need an expanding background");
        return std::pow(ax, 1 - power) / H;
    };
    double err = 0.0, l1 = 0.0;
    const double x = std::log(a);
    const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, x, 20, tol, &err, &l1);
    if (err > 10.0 * tol * std::max(l1, 1e-300))
        throw numerical_error("time quadrature did not converge", err);
    return val;
}

}  // namespace detail

template <Background B>
double conformal_time(double a, const B& bg, double tol = 1e-12) {
    return detail::log_a_integral(a, bg, 2, tol);
}

template <Background B>
double cosmic_time(double a, const B& bg, double tol = 1e-12) {
    return detail::log_a_integral(a, bg, 1, tol);
}

template <Background B>
TimePoint time_point_at(double a, const B& bg) {
    return {1.0 / a - 1.0, a, cosmic_time(a, bg), conformal_time(a, bg)};
}

struct CurvatureTensors00 {
    double g00 = 1.0;
    double G00 = 0.0;
    double I00 = 0.0;
    double J00 = 0.0;
    double ricci_scalar = 0.0;
};

// Pressure-type spatial components (T^i_i / 3 analogues), used for the
// conservation check.
struct CurvaturePressures {
    double pI = 0.0;
    double pJ = 0.0;
};

inline CurvatureTensors00 curvature_from(const HubbleDerivatives& d) {
    const double H = d.H, H1 = d.dH, H2 = d.d2H;
    const double P = 2.0 * H * H2 + 6.0 * H * H * H1 - H1 * H1;
    CurvatureTensors00 c;
    c.ricci_scalar = 6.0 * (2.0 * H * H + H1);
    c.G00 = 3.0 * H * H;
    c.J00 = -6.0 * P;
    c.I00 = -18.0 * P;
    return c;
}

inline CurvaturePressures curvature_pressures_from(const HubbleDerivatives& d) {
    const double H = d.H, H1 = d.dH, H2 = d.d2H, H3 = d.d3H;
    CurvaturePressures p;
    p.pJ = 2.0 * (18.0 * H * H * H1 + 12.0 * H * H2 + 9.0 * H1 * H1 + 2.0 * H3);
    p.pI = 3.0 * p.pJ;
    return p;
}

template <Background B>
CurvatureTensors00 curvature_at(const TimePoint& pt, const B& bg) {
    return curvature_from(bg.derivatives(pt.a));
}

}  // namespace slecosmo
