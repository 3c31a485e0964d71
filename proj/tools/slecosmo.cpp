#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "slecosmo/commands.hpp"

namespace {

slecosmo::RunConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw slecosmo::config_error("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return slecosmo::parse_config(ss.str());
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw slecosmo::config_error("bad number in --epsilon: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw slecosmo::config_error("--epsilon needs at least one value");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Renormalised energy densities of conformally coupled scalars in states of low energy on LCDM"};
    app.set_version_flag("--version", std::string(slecosmo::tool_version));
    app.require_subcommand(1);

    std::string config_path, out_path, format, epsilon_list;
    double tolerance = 0.0;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    app.add_option("--tolerance", tolerance, "main tolerance of the subcommand")->check(CLI::PositiveNumber);

    app.add_subcommand("background", "z, a, t, tau, H/H0 and curvature tensors on the z grid");
    app.add_subcommand("modes", "mode functions on the k grid between the ends of the z grid");
    app.add_subcommand("sle", "state-of-low-energy Bogoliubov data on the k grid");
    app.add_subcommand("rho", "energy-density breakdown on the z grid");
    auto* fr = app.add_subcommand("friedmann", "extended Friedmann equation per epsilon");
    fr->add_option("--epsilon", epsilon_list, "comma-separated epsilon values");
    app.add_subcommand("scan", "rho_gvac/rho_LCDM over the z grid for each scan mass");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        slecosmo::RunConfig cfg = load_config(config_path);
        if (!format.empty()) cfg.format = format;
        if (!out_path.empty()) cfg.output_path = out_path;
        if (tolerance > 0.0) {
            if (cmd == "rho" || cmd == "scan") cfg.tolerances.quadrature = tolerance;
            if (cmd == "modes" || cmd == "sle") cfg.tolerances.ode_rel = tolerance;
            if (cmd == "friedmann") cfg.tolerances.friedmann_rel = tolerance;
        }
        slecosmo::validate(cfg);

        slecosmo::Table t;
        if (cmd == "background") t = slecosmo::cmd_background(cfg);
        else if (cmd == "modes") t = slecosmo::cmd_modes(cfg);
        else if (cmd == "sle") t = slecosmo::cmd_sle(cfg);
        else if (cmd == "rho") t = slecosmo::cmd_rho(cfg);
        else if (cmd == "scan") t = slecosmo::cmd_scan(cfg);
        else t = slecosmo::cmd_friedmann(cfg, epsilon_list.empty() ? cfg.epsilons : parse_list(epsilon_list));

        if (cfg.output_path.empty()) {
            slecosmo::write_table(std::cout, t, cfg, cfg.format);
        } else {
            std::ofstream out(cfg.output_path, std::ios::binary);
            if (!out) throw slecosmo::config_error("cannot write " + cfg.output_path);
            slecosmo::write_table(out, t, cfg, cfg.format);
        }
        return t.exit_code;
    } catch (const slecosmo::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const slecosmo::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << " (best estimate reached: " << e.achieved << ")\n";
        return 2;
    } catch (const slecosmo::domain_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
}
