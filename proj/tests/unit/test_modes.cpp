#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "slecosmo/modes.hpp"

using namespace slecosmo;

namespace {

const LcdmBackground lcdm{CosmologyParams{}};

std::vector<double> tau_grid(double a_lo, double a_hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(conformal_time(a_lo * std::pow(a_hi / a_lo, double(i) / (n - 1)), lcdm));
    return g;
}

ModeInitial vacuum_at(double k, double m, double a) {
    const TimePoint p = time_point_at(a, lcdm);
    const ModeData u = wkb_local(k, m, a, lcdm.derivatives(a));
    return {p.tau, p.a, p.t, u.chi, u.dchi};
}

}  // namespace

TEST(Wronskian, PlaneWaveIsNormalised) {
    const double k = 3.0;
    const cplx chi = std::polar(1.0 / std::sqrt(2.0 * k), -0.7);
    EXPECT_NEAR(std::abs(wronskian(chi, cplx(0.0, -k) * chi) - cplx(0.0, 1.0)), 0.0, 1e-15);
}

TEST(SolveMode, ConformalModeIsExact) {
    const double k = 5.0;
    const TimePoint p0 = time_point_at(std::exp(-2.0), lcdm);
    const cplx c0 = std::polar(1.0 / std::sqrt(2.0 * k), -k * p0.tau);
    const auto grid = tau_grid(std::exp(-2.0), 1.0, 50);
    const ModeFunction mf = solve_mode(k, 0.0, 1.0 / 6.0, lcdm, {p0.tau, p0.a, p0.t, c0, cplx(0, -k) * c0}, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx exact = std::polar(1.0 / std::sqrt(2.0 * k), -k * mf.tau[i]);
        EXPECT_LT(std::abs(mf.chi[i] - exact) / std::abs(exact), 1e-8);
    }
    EXPECT_NEAR(mf.a.back(), 1.0, 1e-9);
    EXPECT_NEAR(mf.t.back(), 0.0, 1e-9);
}

TEST(SolveMode, MinkowskiMassiveMode) {
    const MinkowskiBackground flat;
    const double k = 2.0, m = 1.5, w = std::sqrt(k * k + m * m);
    std::vector<double> grid;
    for (int i = 1; i <= 40; ++i) grid.push_back(0.5 * i);
    const cplx c0(1.0 / std::sqrt(2.0 * w), 0.0);
    const ModeFunction mf = solve_mode(k, m, 1.0 / 6.0, flat, {0.0, 1.0, 0.0, c0, cplx(0, -w) * c0}, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx exact = std::polar(1.0 / std::sqrt(2.0 * w), -w * grid[i]);
        EXPECT_LT(std::abs(mf.chi[i] - exact) / std::abs(exact), 1e-8);
    }
    EXPECT_FALSE(mf.drift_warning);
}

TEST(SolveMode, WronskianConserved) {
    for (double m : {0.0, 1.0, 10.0})
        for (double k : {0.01, 0.3, 4.0, 60.0}) {
            const ModeFunction mf = solve_mode(k, m, 1.0 / 6.0, lcdm, vacuum_at(k, m, 0.1), tau_grid(0.1, 1.0, 30));
            EXPECT_LT(mf.wronskian_drift, 1e-8) << "k = " << k << " m = " << m;
            EXPECT_FALSE(mf.drift_warning);
        }
}

TEST(SolveMode, Linearity) {
    const double k = 0.7, m = 2.0;
    const ModeInitial u = vacuum_at(k, m, 0.2);
    ModeInitial v = u;
    v.chi = std::conj(u.chi);
    v.dchi = std::conj(u.dchi);
    const cplx A(1.3, 0.2), B(0.4, -0.9);  // |A|^2 - |B|^2 = 0.76
    const double s = 1.0 / std::sqrt(std::norm(A) - std::norm(B));
    ModeInitial w = u;
    w.chi = s * (A * u.chi + B * v.chi);
    w.dchi = s * (A * u.dchi + B * v.dchi);
    const auto grid = tau_grid(0.2, 1.0, 10);
    ModeSolveOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14;
    const ModeFunction su = solve_mode(k, m, 1.0 / 6.0, lcdm, u, grid, opt);
    const ModeFunction sw = solve_mode(k, m, 1.0 / 6.0, lcdm, w, grid, opt);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx comb = s * (A * su.chi[i] + B * std::conj(su.chi[i]));
        EXPECT_LT(std::abs(sw.chi[i] - comb) / std::abs(comb), 1e-9);
    }
}

TEST(SolveMode, RejectsBadInput) {
    const auto grid = tau_grid(0.5, 1.0, 3);
    ModeInitial bad = vacuum_at(1.0, 1.0, 0.5);
    bad.chi *= 2.0;
    EXPECT_THROW(solve_mode(1.0, 1.0, 1.0 / 6.0, lcdm, bad, grid), domain_error);
    const ModeInitial ok = vacuum_at(1.0, 1.0, 0.5);
    EXPECT_THROW(solve_mode(1.0, 1.0, 1.0 / 6.0, lcdm, ok, std::vector<double>{}), domain_error);
    EXPECT_THROW(solve_mode(1.0, 1.0, 1.0 / 6.0, lcdm, ok, std::vector<double>{ok.tau0 - 1.0}), domain_error);
}

TEST(SolveMode, HeavyFieldDefersToWkb) {
    const double m = 1e7;
    const ModeInitial init = vacuum_at(1.0, m, 0.5);
    EXPECT_THROW(solve_mode(1.0, m, 1.0 / 6.0, lcdm, init, tau_grid(0.5, 1.0, 3)), mode_infeasible);
}

TEST(SolveMode, NonConformalCouplingFeelsCurvature) {
    const double k = 0.05;
    const ModeInitial init = vacuum_at(k, 0.0, 0.1);
    const auto grid = tau_grid(0.1, 1.0, 5);
    const ModeFunction conf = solve_mode(k, 0.0, 1.0 / 6.0, lcdm, init, grid);
    const ModeFunction mini = solve_mode(k, 0.0, 0.0, lcdm, init, grid);
    EXPECT_GT(std::abs(conf.chi.back() - mini.chi.back()), 1e-3);
    EXPECT_LT(mini.wronskian_drift, 1e-8);
}

TEST(Wkb, WronskianExact) {
    for (double a : {1e-3, 0.1, 0.7}) {
        const ModeData u = wkb_local(3.0, 40.0, a, lcdm.derivatives(a));
        EXPECT_NEAR(std::abs(wronskian(u.chi, u.dchi) - cplx(0.0, 1.0)), 0.0, 1e-14);
    }
    const TimePoint p0 = time_point_at(0.3, lcdm), p = time_point_at(0.8, lcdm);
    const ModeData u = wkb_mode(3.0, 40.0, lcdm, p0, p);
    EXPECT_NEAR(std::abs(wronskian(u.chi, u.dchi) - cplx(0.0, 1.0)), 0.0, 1e-14);
}

TEST(Wkb, ConstantScaleFactorIsExact) {
    const MinkowskiBackground flat;
    const double k = 2.0, m = 3.0, w = std::sqrt(13.0);
    const ModeData u = wkb_mode(k, m, flat, {0.0, 1.0, 0.0, 0.0}, {0.0, 1.0, 4.0, 4.0});
    const cplx exact = std::polar(1.0 / std::sqrt(2.0 * w), -4.0 * w);
    EXPECT_LT(std::abs(u.chi - exact), 1e-14);
    EXPECT_LT(std::abs(u.dchi - cplx(0, -w) * exact), 1e-13);
}

TEST(Wkb, MasslessMatchesConformalMode) {
    const double k = 1.7;
    const TimePoint p0 = time_point_at(0.2, lcdm), p = time_point_at(0.9, lcdm);
    const ModeData u = wkb_mode(k, 0.0, lcdm, p0, p);
    const cplx exact = std::polar(1.0 / std::sqrt(2.0 * k), -k * (p.tau - p0.tau));
    EXPECT_LT(std::abs(u.chi - exact), 1e-11);
}

TEST(Wkb, PhaseIsIntegralOfFrequency) {
    const double k = 4.0, m = 6.0;
    const TimePoint p0 = time_point_at(0.4, lcdm), p = time_point_at(0.6, lcdm);
    // trapezoid on a fine conformal-time grid
    const int n = 4000;
    double sum = 0.0, prev = 0.0, w_prev = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double a = 0.4 * std::pow(1.5, double(i) / n);
        const double tau = conformal_time(a, lcdm);
        const double w = std::sqrt(k * k + m * m * a * a);
        if (i > 0) sum += 0.5 * (w + w_prev) * (tau - prev);
        w_prev = w;
        prev = tau;
    }
    EXPECT_NEAR(wkb_phase(k, m, lcdm, p0, p), sum, 1e-6 * sum);
}

TEST(Wkb, ConvergesToExactModeWithMass) {
    // Short interval at a ~ 1: relative deviation of the exact mode started
    // on the WKB data decreases with m, as the estimators predict.
    const double k = 1.0;
    const TimePoint p0 = time_point_at(0.9, lcdm), p1 = time_point_at(1.0, lcdm);
    double prev = 1e300;
    for (double m : {1e2, 1e3}) {
        const ModeData u0 = wkb_local(k, m, p0.a, lcdm.derivatives(p0.a));
        ModeSolveOptions opt;
        opt.rel_tol = 1e-12;
        opt.abs_tol = 1e-16;
        const ModeFunction mf =
            solve_mode(k, m, 1.0 / 6.0, lcdm, {p0.tau, p0.a, p0.t, u0.chi, u0.dchi}, std::vector<double>{p1.tau}, opt);
        const ModeData w = wkb_mode(k, m, lcdm, p0, p1);
        const double dev = std::abs(mf.chi.back() - w.chi) / std::abs(w.chi);
        const AdiabaticError e = adiabatic_error(k, m, lcdm, p0.a);
        EXPECT_LT(dev, 10.0 * std::max(e.e1, std::abs(e.e2))) << "m = " << m;
        EXPECT_LT(dev, prev);
        prev = dev;
    }
}

TEST(AdiabaticError, LargeMassLimit) {
    const double H = lcdm.hubble(0.5);
    const AdiabaticError e = adiabatic_error(1e-3, 1e6, lcdm, 0.5);
    EXPECT_NEAR(e.e1 * 1e6 * 0.5 * 0.5, H, 1e-6 * H);  // W -> m a
    EXPECT_THROW(adiabatic_error(1.0, 0.0, lcdm, 0.5), domain_error);
}

TEST(AdiabaticError, LargeMomentumScaling) {
    const AdiabaticError e1 = adiabatic_error(1e4, 5.0, lcdm, 0.5), e2 = adiabatic_error(1e5, 5.0, lcdm, 0.5);
    EXPECT_NEAR(e1.e1 / e2.e1, 100.0, 1e-4);
    EXPECT_NEAR(e1.e2 / e2.e2, 1000.0, 1e-3);
}

TEST(AdiabaticError, DeSitterUsesStoredDerivative) {
    const DeSitterBackground ds(2.0);
    const AdiabaticError e = adiabatic_error(1.0, 3.0, ds, 1.0);
    EXPECT_DOUBLE_EQ(e.e1, 2.0 * 3.0 / 10.0);
    EXPECT_EQ(e.e2, 0.0);
}

TEST(Gate, FiresOnlyDeepInAdiabaticRegime) {
    EXPECT_TRUE(wkb_gate(1.0, 0.0, lcdm, 0.5, 1.0));
    EXPECT_FALSE(wkb_gate(1.0, 10.0, lcdm, 0.5, 1.0));
    EXPECT_TRUE(wkb_gate(1e5, 10.0, lcdm, 0.5, 1.0));
    EXPECT_TRUE(wkb_gate(1.0, 1e6, lcdm, 0.5, 1.0));
}

TEST(OmegaDerivatives, MatchFiniteDifferences) {
    const double k = 0.8, m = 3.0, a = 0.3;
    const OmegaDerivatives o = omega_derivatives(k, m, a, lcdm.derivatives(a));
    // derivatives along conformal time via a(tau): d/dtau = a^2 H d/da
    auto w_at = [&](double aa) { return std::sqrt(k * k + m * m * aa * aa); };
    const double h = 1e-5 * a, dadtau = a * a * lcdm.hubble(a);
    EXPECT_NEAR(o.w, w_at(a), 1e-15);
    EXPECT_NEAR(o.w1, dadtau * (w_at(a + h) - w_at(a - h)) / (2 * h), 1e-8);
    auto w1_at = [&](double aa) { return omega_derivatives(k, m, aa, lcdm.derivatives(aa)).w1; };
    auto w2_at = [&](double aa) { return omega_derivatives(k, m, aa, lcdm.derivatives(aa)).w2; };
    auto w3_at = [&](double aa) { return omega_derivatives(k, m, aa, lcdm.derivatives(aa)).w3; };
    EXPECT_NEAR(o.w2, dadtau * (w1_at(a + h) - w1_at(a - h)) / (2 * h), 1e-6 * std::abs(o.w2) + 1e-9);
    EXPECT_NEAR(o.w3, dadtau * (w2_at(a + h) - w2_at(a - h)) / (2 * h), 1e-6 * std::abs(o.w3) + 1e-9);
    EXPECT_NEAR(o.w4, dadtau * (w3_at(a + h) - w3_at(a - h)) / (2 * h), 1e-5 * std::abs(o.w4) + 1e-8);
}
