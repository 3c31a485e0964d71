#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "config.hpp"
#include "friedmann.hpp"

namespace slecosmo {

using Cell = std::variant<double, std::string>;

struct Table {
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    int exit_code = 0;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw domain_error("no column " + name);
    }
    double number(std::size_t row, const std::string& name) const { return std::get<double>(rows.at(row).at(column(name))); }
};

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string cell_text(const Cell& c) {
    return std::holds_alternative<double>(c) ? format_number(std::get<double>(c)) : std::get<std::string>(c);
}

inline std::string json_cell(const Cell& c) {
    if (std::holds_alternative<std::string>(c)) return nlohmann::json(std::get<std::string>(c)).dump();
    const double v = std::get<double>(c);
    if (!std::isfinite(v)) return nlohmann::json(format_number(v)).dump();
    return format_number(v);
}

// Rejects sub-units of other densities so the grid the user asked for stays exact.
inline LcdmBackground background(const RunConfig& c) { return LcdmBackground(c.cosmology.resolved()); }

inline std::vector<double> scale_factors(const std::vector<double>& z) {
    std::vector<double> a;
    for (double v : z) a.push_back(1.0 / (1.0 + v));
    return a;
}

}  // namespace detail

inline std::vector<std::string> provenance_lines(const RunConfig& c, const std::string& command) {
    const CosmologyParams p = c.cosmology.resolved();
    return {
        std::string("slecosmo ") + tool_version + " " + command,
        "config_hash: fnv1a64:" + config_hash(c),
        "tolerances: quadrature=" + format_number(c.tolerances.quadrature) +
            " ode_rel=" + format_number(c.tolerances.ode_rel) +
            " friedmann_rel=" + format_number(c.tolerances.friedmann_rel) +
            " subtraction_order=" + std::to_string(c.tolerances.subtraction_order),
        "units: H0 = 1 internally; densities in rho0 = 3 H0^2/(8 pi G); G = " + format_number(p.newton_constant) +
            " H0^-2 (" + c.cosmology.units + ")",
        "conversions: H0 = " + format_number(units::hubble_gev(c.cosmology.little_h)) + " GeV (h = " +
            format_number(c.cosmology.little_h) + "; order 1e-33 eV); M_pl = " + format_number(units::planck_mass_gev) +
            " GeV; k_B = " + format_number(units::boltzmann_gev_per_kelvin) + " GeV/K",
    };
}

inline void write_table(std::ostream& os, const Table& t, const RunConfig& c, const std::string& format) {
    const auto meta = provenance_lines(c, t.command);
    if (format == "jsonl") {
        nlohmann::ordered_json m;
        m["meta"] = meta;
        m["columns"] = t.columns;
        os << m.dump() << '\n';
        for (const auto& r : t.rows) {
            os << '{';
            for (std::size_t i = 0; i < r.size(); ++i)
                os << (i ? "," : "") << nlohmann::json(t.columns[i]).dump() << ':' << detail::json_cell(r[i]);
            os << "}\n";
        }
        return;
    }
    for (const auto& l : meta) os << "# " << l << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << detail::cell_text(r[i]);
        os << '\n';
    }
}

inline Table cmd_background(const RunConfig& c) {
    const LcdmBackground bg = detail::background(c);
    Table t{"background", {"z", "a", "t", "tau", "H_over_H0", "R", "G00", "I00", "J00"}, {}, 0};
    for (double z : c.z_grid.values()) {
        const TimePoint p = time_point_at(1.0 / (1.0 + z), bg);
        const CurvatureTensors00 k = curvature_at(p, bg);
        t.rows.push_back({z, p.a, p.t, p.tau, bg.hubble(p.a) / bg.params().hubble_constant, k.ricci_scalar, k.G00,
                          k.I00, k.J00});
    }
    return t;
}

inline Table cmd_modes(const RunConfig& c) {
    const LcdmBackground bg = detail::background(c);
    const double m = c.massive.mass_h0(c.cosmology.little_h);
    auto a_out = detail::scale_factors(c.z_grid.values());
    std::sort(a_out.begin(), a_out.end());
    const TimePoint start = time_point_at(a_out.front(), bg);
    std::vector<TimePoint> pts;
    std::vector<double> taus;
    for (double a : a_out) {
        pts.push_back(time_point_at(a, bg));
        taus.push_back(pts.back().tau);
    }
    ModeSolveOptions opt;
    opt.rel_tol = c.tolerances.ode_rel;
    Table t{"modes",
            {"k", "route", "z", "a", "tau", "chi_re", "chi_im", "dchi_re", "dchi_im", "wronskian_error", "e1", "e2"},
            {},
            0};
    for (double k : c.k_grid.values()) {
        const ModeData u = wkb_local(k, m, start.a, bg.derivatives(start.a));
        std::vector<ModeData> data;
        std::string route = "ode";
        if (m > 0.0 && wkb_gate(k, m, bg, a_out.front(), a_out.back())) route = "wkb";
        if (route == "ode") {
            try {
                const ModeFunction mf = solve_mode(k, m, 1.0 / 6.0, bg, {start.tau, start.a, start.t, u.chi, u.dchi},
                                                   taus, opt);
                for (std::size_t i = 0; i < taus.size(); ++i) data.push_back({mf.chi[i], mf.dchi[i]});
            } catch (const mode_infeasible&) {
                route = "wkb";
            }
        }
        if (route == "wkb")
            for (const auto& p : pts) data.push_back(wkb_mode(k, m, bg, start, p));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const AdiabaticError e = m > 0.0 ? adiabatic_error(k, m, bg, pts[i].a) : AdiabaticError{};
            t.rows.push_back({k, route, 1.0 / pts[i].a - 1.0, pts[i].a, pts[i].tau, data[i].chi.real(),
                              data[i].chi.imag(), data[i].dchi.real(), data[i].dchi.imag(),
                              std::abs(wronskian(data[i].chi, data[i].dchi) - cplx(0.0, 1.0)), e.e1, e.e2});
        }
    }
    return t;
}

inline SamplingFunction default_sampling(const RunConfig& c, const LcdmBackground& bg) {
    return SamplingFunction::from_redshift_window(c.sampling.z_center, c.sampling.efolds, bg);
}

inline Table cmd_sle(const RunConfig& c) {
    const LcdmBackground bg = detail::background(c);
    const double m = c.massive.mass_h0(c.cosmology.little_h);
    const SamplingFunction f = default_sampling(c, bg);
    const SleGrid grid = SleGrid::build(bg, f, {1.0});
    SleOptions opt;
    opt.ode.rel_tol = std::min(opt.ode.rel_tol, c.tolerances.ode_rel);
    Table t{"sle",
            {"k", "route", "c1", "c2_re", "c2_im", "lambda_re", "lambda_im", "mu_re", "mu_im", "theta", "min_energy"},
            {},
            0};
    for (double k : c.k_grid.values()) {
        const SleMode s = solve_sle_mode(k, m, bg, f, grid, opt);
        const auto& mn = s.minimum;
        t.rows.push_back({k, std::string(s.wkb_reference ? "wkb" : "ode"), s.form.c1, s.form.c2.real(),
                          s.form.c2.imag(), mn.pair.lambda.real(), mn.pair.lambda.imag(), mn.pair.mu.real(),
                          mn.pair.mu.imag(), mn.theta, mn.value});
    }
    return t;
}

// Inverse temperature (H0 units) of the massive field and its freeze-out data.
inline std::pair<double, double> massive_beta_aF(const RunConfig& c) {
    const double m = c.massive.mass_h0(c.cosmology.little_h);
    if (!(m > 0.0)) throw config_error("config: massive thermal state needs a positive mass");
    FreezeOutParams fo{c.massive.x_F, c.massive.a_F, 0.0};
    if (c.massive.freeze_out == "wimp") {
        const double m_gev = c.massive.mass_unit == "GeV" ? c.massive.mass
                                                          : c.massive.mass * units::hubble_gev(c.cosmology.little_h);
        fo = wimp_freeze_out(m_gev);
    }
    fo.validate();
    return {fo.x_F / (fo.a_F * m), fo.a_F};
}

namespace detail {

template <class F>
auto attributed(const char* component, F&& f) {
    try {
        return f();
    } catch (const numerical_error& e) {
        throw numerical_error(std::string(component) + ": " + e.what(), e.achieved);
    } catch (const domain_error& e) {
        throw numerical_error(std::string(component) + ": " + e.what(), 0.0);
    }
}

}  // namespace detail

inline Table cmd_rho(const RunConfig& c) {
    const LcdmBackground bg = detail::background(c);
    const CosmologyParams p = bg.params();
    const SamplingFunction f = default_sampling(c, bg);
    const std::vector<double> zs = c.z_grid.values();
    const std::vector<double> as = detail::scale_factors(zs);
    const std::size_t n = zs.size();
    StateDensityOptions opt;
    opt.tolerance = c.tolerances.quadrature;
    opt.subtraction_order = c.tolerances.subtraction_order;

    // rho_state_dependent sorts by a; map back to the z order
    auto by_z = [&](const StateDensities& s, const std::vector<double>& v) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = v[static_cast<std::size_t>(std::lower_bound(s.a.begin(), s.a.end(), as[i]) - s.a.begin())];
        return out;
    };

    const double m = c.massive.mass_h0(c.cosmology.little_h);
    std::vector<double> gvac_m(n, 0.0), gvac_m_err(n, 0.0), gth_m(n, 0.0), gvac_0(n, 0.0), gth_0(n, 0.0);
    if (m > 0.0) {
        FieldSpec field{m, 1.0 / 6.0, {}};
        if (c.massive.thermal == "quadrature") {
            const auto [beta, aF] = massive_beta_aF(c);
            field.thermal = {beta, aF};
        }
        const StateDensities s = detail::attributed("rho_gvac_m", [&] { return rho_state_dependent(field, bg, p, f, as, opt); });
        gvac_m = by_z(s, s.rho_gvac);
        gvac_m_err = by_z(s, s.rho_gvac_err);
        if (c.massive.thermal == "quadrature") gth_m = by_z(s, s.rho_gth);
        if (c.massive.thermal == "closed_form") {
            const auto [beta, aF] = massive_beta_aF(c);
            for (std::size_t i = 0; i < n; ++i)
                gth_m[i] = detail::attributed("rho_gth_m", [&] { return rho_thermal_massive(m, beta, aF, as[i], p); });
        }
    }
    const double beta0 = c.massless.beta_h0(c.cosmology.little_h);
    if (c.massless.thermal == "closed_form") {
        for (std::size_t i = 0; i < n; ++i) gth_0[i] = rho_thermal_massless(beta0, as[i], p);
    } else if (c.massless.thermal == "quadrature") {
        const StateDensities s = detail::attributed(
            "rho_gth_0", [&] { return rho_state_dependent(FieldSpec{0.0, 1.0 / 6.0, {beta0, 1.0}}, bg, p, f, as, opt); });
        gvac_0 = by_z(s, s.rho_gvac);
        gth_0 = by_z(s, s.rho_gth);
    }

    Table t{"rho",
            {"z", "a", "rho_gvac_m", "rho_gvac_0", "rho_gth_m", "rho_gth_0", "anomaly", "lambda_term", "delta_term",
             "epsilon_term", "total", "rho_lcdm", "total_over_lcdm", "rho_gvac_m_over_lcdm", "rho_gvac_m_error"},
            {},
            0};
    for (std::size_t i = 0; i < n; ++i) {
        const StateContributions sc{gvac_m[i], gvac_0[i], gth_m[i], gth_0[i]};
        const EnergyDensityBreakdown e = rho_total(sc, as[i], c.renorm, bg, p);
        const double lcdm = bg.e2(as[i]);
        t.rows.push_back({zs[i], as[i], e.rho_gvac_m, e.rho_gvac_0, e.rho_gth_m, e.rho_gth_0, e.anomaly, e.lambda_term,
                          e.delta_term, e.epsilon_term, e.total, lcdm, e.total / lcdm, e.rho_gvac_m / lcdm,
                          gvac_m_err[i]});
    }
    return t;
}

inline Table cmd_scan(const RunConfig& c) {
    const LcdmBackground bg = detail::background(c);
    const CosmologyParams p = bg.params();
    const SamplingFunction f = default_sampling(c, bg);
    const std::vector<double> zs = c.z_grid.values();
    std::vector<double> as = detail::scale_factors(zs);
    StateDensityOptions opt;
    opt.tolerance = c.tolerances.quadrature;
    opt.subtraction_order = c.tolerances.subtraction_order;
    Table t{"scan", {"z"}, {}, 0};
    std::vector<std::vector<double>> cols;
    for (double m : c.scan_masses) {
        t.columns.push_back("rho_gvac_over_lcdm_m" + format_number(m));
        const StateDensities s = rho_state_dependent(FieldSpec{m, 1.0 / 6.0, {}}, bg, p, f, as, opt);
        std::vector<double> col;
        for (double a : as) {
            const auto j = static_cast<std::size_t>(std::lower_bound(s.a.begin(), s.a.end(), a) - s.a.begin());
            col.push_back(s.rho_gvac[j] / bg.e2(a));
        }
        cols.push_back(col);
    }
    for (std::size_t i = 0; i < zs.size(); ++i) {
        std::vector<Cell> row{zs[i]};
        for (const auto& col : cols) row.emplace_back(col[i]);
        t.rows.push_back(row);
    }
    return t;
}

inline Table cmd_friedmann(const RunConfig& c, const std::vector<double>& eps_list) {
    const CosmologyParams p = c.cosmology.resolved();
    FriedmannOptions opt;
    opt.z_max = c.z_max;
    opt.rel_tol = c.tolerances.friedmann_rel;
    Table t{"friedmann",
            {"epsilon", "bounded", "blowup_z", "omega_r_tilde", "fit_residual", "status", "bbn", "starobinsky",
             "torsion"},
            {},
            0};
    std::size_t diverged = 0;
    for (double eps : eps_list) {
        const ExtendedFriedmannSolution sol = solve_extended(eps, p, {}, opt);
        double om = std::nan(""), res = std::nan("");
        std::string status = "ok";
        if (sol.diverged) {
            ++diverged;
            status = sol.divergence_reason;
        } else if (c.z_max >= 1e9) {
            try {
                const EffectiveRadiation r = extract_effective_radiation(sol, p);
                om = r.omega_r_tilde;
                res = r.residual;
            } catch (const numerical_error& e) {
                status = e.what();
                res = e.achieved;
            }
        } else {
            status = "z_max below the fit window";
        }
        const EpsilonBoundsReport b = epsilon_bounds_report(eps);
        auto v = [](const BoundVerdict& x) { return std::string(x.compatible ? "compatible" : "incompatible"); };
        t.rows.push_back({eps, std::string(sol.diverged ? "no" : "yes"), sol.blowup_z, om, res, status, v(b.bbn),
                          v(b.starobinsky), v(b.torsion)});
    }
    if (eps_list.size() == 1 && diverged == 1) t.exit_code = 3;
    return t;
}

}  // namespace slecosmo
