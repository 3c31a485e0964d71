#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "background.hpp"

namespace slecosmo {

// H^2/H0^2 = E(z) + eps J00/H0^4 with E the LCDM right-hand side. In
// s = ln(1+z), w = ln(H^2/H0^2) and J00 = -6 H0^4 (y y_ss - 3 y y_s - y_s^2/4),
// y = e^w, the equation becomes
//   w'' = 3 w' - 3/4 w'^2 + (E e^-w - 1) e^-w / (6 eps).
struct FriedmannInitial {
    double hubble = 1.0;  // H(z=0)/H0
    double dhubble_dz = std::numeric_limits<double>::quiet_NaN();  // NaN: LCDM value
};

struct FriedmannOptions {
    double z_max = 1e9;
    double ds_output = 0.01;  // uniform output spacing in ln(1+z)
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    std::size_t max_steps = 3'000'000;
    double divergence_factor = 1e6;
};

struct ExtendedFriedmannSolution {
    double epsilon = 0.0;
    FriedmannInitial initial;
    double s0 = 0.0, ds = 0.0;
    std::vector<double> z;
    std::vector<double> hubble;  // H/H0
    std::vector<double> w, v;    // ln(H^2/H0^2) and its s-derivative
    bool diverged = false;
    double blowup_z = std::numeric_limits<double>::quiet_NaN();
    std::string divergence_reason;
    std::size_t steps = 0, rejected = 0;
};

namespace detail {

struct FriedmannRhs {
    CosmologyParams p;
    double eps;

    double e2(double s) const {
        return p.omega_lambda + p.omega_m * std::exp(3.0 * s) + p.omega_r * std::exp(4.0 * s);
    }
    Eigen::Vector2d operator()(double s, const Eigen::Vector2d& y) const {
        const double em = std::exp(-y[0]);
        return {y[1], 3.0 * y[1] - 0.75 * y[1] * y[1] + (e2(s) * em - 1.0) * em / (6.0 * eps)};
    }
    Eigen::Matrix2d jacobian(double s, const Eigen::Vector2d& y) const {
        const double em = std::exp(-y[0]);
        Eigen::Matrix2d J;
        J << 0.0, 1.0, (em - 2.0 * e2(s) * em * em) / (6.0 * eps), 3.0 - 1.5 * y[1];
        return J;
    }
    // Largest real part among the Jacobian eigenvalues.
    double growth_rate(double s, const Eigen::Vector2d& y) const {
        const Eigen::Matrix2d J = jacobian(s, y);
        const double b = J(1, 1), c = J(1, 0);
        const double disc = b * b + 4.0 * c;
        return disc > 0.0 ? 0.5 * (b + std::sqrt(disc)) : 0.5 * b;
    }
    // Frequency of the fast oscillation, used to bound the attainable accuracy of w'.
    double fast_frequency(double s, const Eigen::Vector2d& y) const {
        return std::sqrt(std::abs(jacobian(s, y)(1, 0)));
    }
};

// One step of the three-stage Radau IIA collocation method (order 5, L-stable)
// with simplified Newton iterations. Returns false when Newton fails.
inline bool radau_step(const FriedmannRhs& f, double s, const Eigen::Vector2d& y, double h,
                       const Eigen::Vector2d& scale, Eigen::Vector2d& out) {
    static const double r6 = std::sqrt(6.0);
    static const double c[3] = {(4.0 - r6) / 10.0, (4.0 + r6) / 10.0, 1.0};
    static const double A[3][3] = {{(88.0 - 7.0 * r6) / 360.0, (296.0 - 169.0 * r6) / 1800.0, (-2.0 + 3.0 * r6) / 225.0},
                                   {(296.0 + 169.0 * r6) / 1800.0, (88.0 + 7.0 * r6) / 360.0, (-2.0 - 3.0 * r6) / 225.0},
                                   {(16.0 - r6) / 36.0, (16.0 + r6) / 36.0, 1.0 / 9.0}};
    const Eigen::Matrix2d J = f.jacobian(s, y);
    Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M.block<2, 2>(2 * i, 2 * j) -= h * A[i][j] * J;
    const Eigen::PartialPivLU<Eigen::Matrix<double, 6, 6>> lu(M);

    Eigen::Matrix<double, 6, 1> Z = Eigen::Matrix<double, 6, 1>::Zero();
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 12; ++it) {
        Eigen::Vector2d F[3];
        for (int j = 0; j < 3; ++j) F[j] = f(s + c[j] * h, y + Z.segment<2>(2 * j));
        Eigen::Matrix<double, 6, 1> G;
        for (int i = 0; i < 3; ++i) {
            Eigen::Vector2d acc = Eigen::Vector2d::Zero();
            for (int j = 0; j < 3; ++j) acc += A[i][j] * F[j];
            G.segment<2>(2 * i) = Z.segment<2>(2 * i) - h * acc;
        }
        const Eigen::Matrix<double, 6, 1> dZ = lu.solve(-G);
        if (!dZ.allFinite()) return false;
        Z += dZ;
        double norm = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 2; ++k) norm = std::max(norm, std::abs(dZ[2 * i + k]) / scale[k]);
        if (norm < 1e-3) {
            out = y + Z.segment<2>(4);
            return out.allFinite();
        }
        if (it > 1 && norm > 0.9 * prev) return false;
        prev = norm;
    }
    return false;
}

}  // namespace detail

inline double lcdm_dhubble_dz0(const CosmologyParams& p) {
    const double e0 = p.omega_lambda + p.omega_m + p.omega_r;
    return (1.5 * p.omega_m + 2.0 * p.omega_r) / std::sqrt(e0);
}

inline ExtendedFriedmannSolution solve_extended(double eps, const CosmologyParams& params,
                                                const FriedmannInitial& init = {}, const FriedmannOptions& opt = {}) {
    params.validate();
    if (!(opt.z_max > 0.0) || !(opt.ds_output > 0.0)) throw domain_error("invalid Friedmann grid");
    ExtendedFriedmannSolution sol;
    sol.epsilon = eps;
    sol.initial = init;
    if (std::isnan(sol.initial.dhubble_dz)) sol.initial.dhubble_dz = lcdm_dhubble_dz0(params);
    const double s_max = std::log1p(opt.z_max);
    const auto n_out = static_cast<std::size_t>(std::ceil(s_max / opt.ds_output));
    sol.ds = s_max / static_cast<double>(n_out);
    const detail::FriedmannRhs f{params, eps};
    auto record = [&](double s, const Eigen::Vector2d& y) {
        sol.z.push_back(std::expm1(s));
        sol.w.push_back(y[0]);
        sol.v.push_back(y[1]);
        sol.hubble.push_back(std::exp(0.5 * y[0]));
    };

    if (eps == 0.0) {
        for (std::size_t i = 0; i <= n_out; ++i) {
            const double s = sol.ds * static_cast<double>(i);
            const double e = f.e2(s);
            const double es = 3.0 * params.omega_m * std::exp(3.0 * s) + 4.0 * params.omega_r * std::exp(4.0 * s);
            record(s, Eigen::Vector2d(std::log(e), es / e));
        }
        return sol;
    }

    Eigen::Vector2d y(2.0 * std::log(init.hubble), 2.0 * sol.initial.dhubble_dz / init.hubble);
    double s = 0.0;
    record(s, y);
    double h = 1e-4 * std::min(1.0, std::sqrt(6.0 * std::abs(eps)));
    const double lim = std::log(opt.divergence_factor * opt.divergence_factor);
    const double u = std::numeric_limits<double>::epsilon();

    auto flag = [&](double at, const std::string& why) {
        sol.diverged = true;
        sol.blowup_z = std::expm1(at);
        sol.divergence_reason = why;
    };

    for (std::size_t i = 1; i <= n_out && !sol.diverged; ++i) {
        const double target = sol.ds * static_cast<double>(i);
        while (s < target) {
            if (sol.steps + sol.rejected > opt.max_steps)
                throw numerical_error("extended Friedmann equation exceeded the step budget (stiffness); z reached " +
                                          std::to_string(std::expm1(s)),
                                      std::expm1(s));
            const double g = f.growth_rate(s, y);
            double hh = std::min({h, target - s, g > 0.0 ? 0.5 / g : h});
            const bool last = hh >= target - s;
            const double wf = f.fast_frequency(s, y);
            const Eigen::Vector2d scale(opt.abs_tol + opt.rel_tol * std::abs(y[0]),
                                        opt.abs_tol + opt.rel_tol * std::abs(y[1]) +
                                            256.0 * u * wf * std::max(1.0, std::abs(y[0])));
            Eigen::Vector2d big, half, two;
            const bool ok = detail::radau_step(f, s, y, hh, scale, big) &&
                            detail::radau_step(f, s, y, 0.5 * hh, scale, half) &&
                            detail::radau_step(f, s + 0.5 * hh, half, 0.5 * hh, scale, two);
            double err = std::numeric_limits<double>::infinity();
            if (ok) err = std::max(std::abs(two[0] - big[0]) / scale[0], std::abs(two[1] - big[1]) / scale[1]) / 31.0;
            if (err <= 1.0) {
                s = last ? target : s + hh;
                y = two;
                ++sol.steps;
                const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-12), -1.0 / 6.0), 0.2, 4.0);
                if (!last || fac < 1.0) h = hh * fac;
                const double dev = y[0] - std::log(f.e2(s));
                if (!y.allFinite()) {
                    flag(s, "non-finite solution");
                    break;
                }
                if (std::abs(dev) > lim) {
                    flag(s, dev > 0.0 ? "H exceeds the LCDM value by the divergence factor"
                                      : "H falls below the LCDM value by the divergence factor");
                    break;
                }
            } else {
                ++sol.rejected;
                h = hh * (ok ? std::clamp(0.9 * std::pow(err, -1.0 / 6.0), 0.1, 0.5) : 0.25);
                if (h < 1e-14 * std::max(1.0, s)) {
                    flag(s, "step size underflow");
                    break;
                }
            }
        }
        if (!sol.diverged) record(s, y);
    }
    return sol;
}

struct EffectiveRadiation {
    double omega_r_tilde = 0.0;
    double z_lo = 1e7, z_hi = 1e9;
    double residual = 0.0;  // max relative deviation from the fitted constant
};

// Fits a^4 (H^2/H0^2 - Omega_L - Omega_m / a^3) by a constant over [z_lo, z_hi].
inline EffectiveRadiation extract_effective_radiation(const ExtendedFriedmannSolution& sol, const CosmologyParams& p,
                                                      double z_lo = 1e7, double z_hi = 1e9,
                                                      double threshold = 1e-2) {
    if (sol.diverged) throw domain_error("cannot extract radiation from a divergent solution");
    if (sol.z.empty() || sol.z.back() < z_hi * (1.0 - 1e-9)) throw domain_error("solution does not reach the window");
    const int n = 64;
    std::vector<double> vals;
    for (int i = 0; i <= n; ++i) {
        const double z = z_lo * std::pow(z_hi / z_lo, static_cast<double>(i) / n);
        const double s = std::log1p(z);
        // cubic Hermite interpolation of w using its s-derivative
        const double pos = std::min(s / sol.ds, static_cast<double>(sol.w.size() - 1) - 1e-12);
        const auto j = static_cast<std::size_t>(pos);
        const double t = pos - static_cast<double>(j);
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        const double w = h00 * sol.w[j] + h10 * sol.ds * sol.v[j] + h01 * sol.w[j + 1] + h11 * sol.ds * sol.v[j + 1];
        const double a = 1.0 / (1.0 + z);
        vals.push_back(a * a * a * a * (std::exp(w) - p.omega_lambda - p.omega_m / (a * a * a)));
    }
    EffectiveRadiation r;
    r.z_lo = z_lo;
    r.z_hi = z_hi;
    double sum = 0.0;
    for (double v : vals) sum += v;
    r.omega_r_tilde = sum / static_cast<double>(vals.size());
    for (double v : vals) r.residual = std::max(r.residual, std::abs(v - r.omega_r_tilde) / std::abs(r.omega_r_tilde));
    if (r.residual > threshold)
        throw numerical_error("solution is not radiation-like in the fit window", r.residual);
    return r;
}

// Builds a background from a bounded solution so that curvature tensors and
// mode equations can be evaluated on it.
inline TabulatedBackground tabulated_background(const ExtendedFriedmannSolution& sol, double hubble_constant = 1.0) {
    if (sol.diverged) throw domain_error("cannot tabulate a divergent solution");
    return TabulatedBackground(0.0, sol.ds, sol.w, sol.v, hubble_constant);
}

struct BoundVerdict {
    std::string name;
    std::string statement;
    bool compatible = false;
};

struct EpsilonBoundsReport {
    double epsilon = 0.0;
    BoundVerdict bbn, starobinsky, torsion;
};

inline EpsilonBoundsReport epsilon_bounds_report(double eps) {
    EpsilonBoundsReport r;
    r.epsilon = eps;
    r.bbn = {"bbn", "BBN-compatible range 0 <= eps < 2e-15", eps >= 0.0 && eps < 2e-15};
    r.starobinsky = {"starobinsky", "Starobinsky inflation value eps ~ 1e-113", eps <= 1e-113};
    r.torsion = {"torsion", "torsion-balance upper bound eps < 1e-60", eps < 1e-60};
    return r;
}

}  // namespace slecosmo
