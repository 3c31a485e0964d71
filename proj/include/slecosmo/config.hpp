#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "energy.hpp"
#include "units.hpp"

namespace slecosmo {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double min = 0.0;
    double max = 1.0;
    int count = 21;
    bool log = false;
    std::vector<double> explicit_values;  // takes precedence when non-empty

    std::vector<double> values() const {
        if (!explicit_values.empty()) return explicit_values;
        if (count < 1) throw config_error("grid count must be >= 1");
        if (count == 1) return {min};
        if (log && !(min > 0.0 && max > 0.0)) throw config_error("log grid needs positive bounds");
        std::vector<double> v;
        for (int i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) / (count - 1);
            v.push_back(log ? min * std::pow(max / min, t) : min + (max - min) * t);
        }
        return v;
    }
    bool operator==(const GridSpec&) const = default;
};

struct CosmologyConfig {
    CosmologyParams params{};
    std::string units = "rho0";  // "rho0": G = 3/(8 pi) so rho0 = 1; "physical": G from h and M_pl
    double little_h = units::default_little_h;

    CosmologyParams resolved() const {
        CosmologyParams p = params;
        if (units == "physical") p.newton_constant = units::physical_newton_constant(little_h);
        else if (units != "rho0" && units != "explicit") throw config_error("cosmology.units must be rho0, physical or explicit");
        return p;
    }
    bool operator==(const CosmologyConfig&) const = default;
};

struct MassiveFieldConfig {
    double mass = 100.0;
    std::string mass_unit = "H0";        // "H0" or "GeV"
    std::string thermal = "none";        // "none", "closed_form", "quadrature"
    std::string freeze_out = "explicit"; // "explicit" (x_F, a_F below) or "wimp"
    double x_F = 21.0;
    double a_F = 1e-14;

    double mass_h0(double little_h) const {
        if (mass_unit == "H0") return mass;
        if (mass_unit == "GeV") return units::mass_in_h0(mass, little_h);
        throw config_error("massive.mass_unit must be H0 or GeV");
    }
    bool operator==(const MassiveFieldConfig&) const = default;
};

struct MasslessFieldConfig {
    std::string thermal = "closed_form";  // "none", "closed_form", "quadrature"
    double temperature_kelvin = 0.0;      // used when > 0, otherwise beta
    double beta = 7.573464999288949;              // comoving, units of 1/H0; pi^2/(30 beta^4) = 1e-4

    double beta_h0(double little_h) const {
        return temperature_kelvin > 0.0 ? units::beta_from_kelvin(temperature_kelvin, little_h) : beta;
    }
    bool operator==(const MasslessFieldConfig&) const = default;
};

struct SamplingConfig {
    double z_center = 1e-2;
    double efolds = 1.0;
    bool operator==(const SamplingConfig&) const = default;
};

struct ToleranceConfig {
    double quadrature = 1e-6;
    double ode_rel = 1e-11;
    double friedmann_rel = 1e-10;
    int subtraction_order = 4;
    bool operator==(const ToleranceConfig&) const = default;
};

struct RunConfig {
    CosmologyConfig cosmology{};
    RenormalizationChoice renorm{};
    MassiveFieldConfig massive{};
    MasslessFieldConfig massless{};
    SamplingConfig sampling{};
    GridSpec z_grid{};
    GridSpec k_grid{0.1, 100.0, 7, true, {}};
    std::vector<double> scan_masses{1.0, 10.0, 100.0};
    std::vector<double> epsilons{0.0};
    double z_max = 1e9;
    ToleranceConfig tolerances{};
    std::string output_path;
    std::string format = "csv";

    bool operator==(const RunConfig&) const = default;
};

// ---- JSON mapping -----------------------------------------------------------

inline void to_json(nlohmann::ordered_json& j, const GridSpec& g) {
    j = {{"min", g.min}, {"max", g.max}, {"count", g.count}, {"log", g.log}, {"values", g.explicit_values}};
}

inline nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    const auto& p = c.cosmology.params;
    j["cosmology"] = {{"hubble_constant", p.hubble_constant}, {"omega_lambda", p.omega_lambda},
                      {"omega_m", p.omega_m},                 {"omega_r", p.omega_r},
                      {"newton_constant", p.newton_constant}, {"units", c.cosmology.units},
                      {"little_h", c.cosmology.little_h}};
    j["renorm"] = {{"omega_lambda_ren", c.renorm.omega_lambda_ren}, {"delta", c.renorm.delta},
                   {"epsilon", c.renorm.epsilon},                   {"gamma", c.renorm.gamma},
                   {"mu_scale", c.renorm.mu_scale},                 {"mu_reference", c.renorm.mu_reference}};
    j["massive"] = {{"mass", c.massive.mass},         {"mass_unit", c.massive.mass_unit},
                    {"thermal", c.massive.thermal},   {"freeze_out", c.massive.freeze_out},
                    {"x_F", c.massive.x_F},           {"a_F", c.massive.a_F}};
    j["massless"] = {{"thermal", c.massless.thermal},
                     {"temperature_kelvin", c.massless.temperature_kelvin},
                     {"beta", c.massless.beta}};
    j["sampling"] = {{"z_center", c.sampling.z_center}, {"efolds", c.sampling.efolds}};
    nlohmann::ordered_json zg, kg;
    to_json(zg, c.z_grid);
    to_json(kg, c.k_grid);
    j["z_grid"] = zg;
    j["k_grid"] = kg;
    j["scan_masses"] = c.scan_masses;
    j["epsilons"] = c.epsilons;
    j["z_max"] = c.z_max;
    j["tolerances"] = {{"quadrature", c.tolerances.quadrature},
                       {"ode_rel", c.tolerances.ode_rel},
                       {"friedmann_rel", c.tolerances.friedmann_rel},
                       {"subtraction_order", c.tolerances.subtraction_order}};
    j["output"] = {{"path", c.output_path}, {"format", c.format}};
    return j;
}

namespace detail {

template <class T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config: bad value for " + where + "." + key + ": " + e.what());
    }
}

inline void read_grid(const nlohmann::json& j, const char* key, GridSpec& g) {
    if (!j.contains(key)) return;
    const auto& s = j.at(key);
    const std::string w = key;
    read(s, "min", g.min, w);
    read(s, "max", g.max, w);
    read(s, "count", g.count, w);
    read(s, "log", g.log, w);
    read(s, "values", g.explicit_values, w);
}

inline const nlohmann::json& section(const nlohmann::json& j, const char* key) {
    static const nlohmann::json empty = nlohmann::json::object();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw config_error(std::string("config: section ") + key + " must be an object");
    return j.at(key);
}

inline int line_of(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
    using detail::read;
    if (!j.is_object()) throw config_error("config: top level must be an object");
    static const char* known[] = {"cosmology", "renorm", "massive", "massless", "sampling", "z_grid", "k_grid",
                                  "scan_masses", "epsilons", "z_max", "tolerances", "output"};
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw config_error("config: unknown key '" + key + "'");
    }
    RunConfig c;
    const auto& co = detail::section(j, "cosmology");
    auto& p = c.cosmology.params;
    read(co, "hubble_constant", p.hubble_constant, "cosmology");
    read(co, "omega_lambda", p.omega_lambda, "cosmology");
    read(co, "omega_m", p.omega_m, "cosmology");
    read(co, "omega_r", p.omega_r, "cosmology");
    read(co, "newton_constant", p.newton_constant, "cosmology");
    read(co, "units", c.cosmology.units, "cosmology");
    read(co, "little_h", c.cosmology.little_h, "cosmology");
    const auto& re = detail::section(j, "renorm");
    read(re, "omega_lambda_ren", c.renorm.omega_lambda_ren, "renorm");
    read(re, "delta", c.renorm.delta, "renorm");
    read(re, "epsilon", c.renorm.epsilon, "renorm");
    read(re, "gamma", c.renorm.gamma, "renorm");
    read(re, "mu_scale", c.renorm.mu_scale, "renorm");
    read(re, "mu_reference", c.renorm.mu_reference, "renorm");
    const auto& ma = detail::section(j, "massive");
    read(ma, "mass", c.massive.mass, "massive");
    read(ma, "mass_unit", c.massive.mass_unit, "massive");
    read(ma, "thermal", c.massive.thermal, "massive");
    read(ma, "freeze_out", c.massive.freeze_out, "massive");
    read(ma, "x_F", c.massive.x_F, "massive");
    read(ma, "a_F", c.massive.a_F, "massive");
    const auto& ml = detail::section(j, "massless");
    read(ml, "thermal", c.massless.thermal, "massless");
    read(ml, "temperature_kelvin", c.massless.temperature_kelvin, "massless");
    read(ml, "beta", c.massless.beta, "massless");
    const auto& sa = detail::section(j, "sampling");
    read(sa, "z_center", c.sampling.z_center, "sampling");
    read(sa, "efolds", c.sampling.efolds, "sampling");
    detail::read_grid(j, "z_grid", c.z_grid);
    detail::read_grid(j, "k_grid", c.k_grid);
    read(j, "scan_masses", c.scan_masses, "");
    read(j, "epsilons", c.epsilons, "");
    read(j, "z_max", c.z_max, "");
    const auto& to = detail::section(j, "tolerances");
    read(to, "quadrature", c.tolerances.quadrature, "tolerances");
    read(to, "ode_rel", c.tolerances.ode_rel, "tolerances");
    read(to, "friedmann_rel", c.tolerances.friedmann_rel, "tolerances");
    read(to, "subtraction_order", c.tolerances.subtraction_order, "tolerances");
    const auto& ou = detail::section(j, "output");
    read(ou, "path", c.output_path, "output");
    read(ou, "format", c.format, "output");
    return c;
}

inline void validate(const RunConfig& c) {
    try {
        c.cosmology.resolved().validate();
    } catch (const domain_error& e) {
        throw config_error(std::string("config: cosmology: ") + e.what());
    }
    for (const auto* s : {&c.massive.thermal, &c.massless.thermal})
        if (*s != "none" && *s != "closed_form" && *s != "quadrature")
            throw config_error("config: thermal must be none, closed_form or quadrature");
    if (c.massive.freeze_out != "explicit" && c.massive.freeze_out != "wimp")
        throw config_error("config: massive.freeze_out must be explicit or wimp");
    if (c.massive.mass_unit != "H0" && c.massive.mass_unit != "GeV")
        throw config_error("config: massive.mass_unit must be H0 or GeV");
    if (!(c.massive.mass >= 0.0)) throw config_error("config: massive.mass must be >= 0");
    if (!(c.sampling.efolds > 0.0)) throw config_error("config: sampling.efolds must be positive");
    if (c.format != "csv" && c.format != "jsonl") throw config_error("config: output.format must be csv or jsonl");
    if (!(c.tolerances.quadrature > 0.0) || !(c.tolerances.ode_rel > 0.0) || !(c.tolerances.friedmann_rel > 0.0))
        throw config_error("config: tolerances must be positive");
    if (c.tolerances.subtraction_order != 0 && c.tolerances.subtraction_order != 2 && c.tolerances.subtraction_order != 4)
        throw config_error("config: tolerances.subtraction_order must be 0, 2 or 4");
    if (!(c.z_max > 0.0)) throw config_error("config: z_max must be positive");
    (void)c.z_grid.values();
    (void)c.k_grid.values();
}

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("config parse error at line " + std::to_string(detail::line_of(text, e.byte)) + ": " +
                           e.what());
    }
    RunConfig c = config_from_json(j);
    validate(c);
    return c;
}

inline std::string serialize_config(const RunConfig& c) { return to_json(c).dump(2); }

// FNV-1a over the canonical serialisation; used to tag output files. Where the
// output goes is not part of what produced it.
inline std::string config_hash(const RunConfig& c) {
    nlohmann::ordered_json j = to_json(c);
    j["output"].erase("path");
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace slecosmo
