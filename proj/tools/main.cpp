// Command-line front end: analysis, tuning, spectra, simulation and design
// optimization for delayed-resonator vibration absorption on serial chains.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drchain/cli.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config JSON")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory (default: .)");
    cmd->add_option("--override", args.overrides,
                    "config override key.path=value (repeatable)");
}

drchain::ExperimentConfig load(const CommonArgs& args) {
    std::ifstream in(args.config_path);
    if (!in) {
        throw drchain::ValidationError("config: cannot open '" + args.config_path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw drchain::ValidationError("config: '" + args.config_path +
                                       "' is not valid JSON: " + e.what());
    }
    for (const auto& assignment : args.overrides) {
        drchain::apply_override(j, assignment);
    }
    return drchain::parse_config(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delayed-resonator design toolkit for serial mass-spring-damper chains"};
    app.require_subcommand(1);

    CommonArgs analyze_args, tune_args, spectrum_args, simulate_args, optimize_args;
    std::optional<std::uint64_t> seed_override;

    auto* analyze = app.add_subcommand(
        "analyze", "steady-state forces, link energies, power, tuning and abscissa");
    add_common(analyze, analyze_args);
    auto* tune = app.add_subcommand("tune", "gain/delay candidates and selection");
    add_common(tune, tune_args);
    auto* spectrum = app.add_subcommand(
        "spectrum", "characteristic roots right of the scan bound, as CSV");
    add_common(spectrum, spectrum_args);
    auto* simulate = app.add_subcommand(
        "simulate", "closed-loop time response with passive-to-active switch");
    add_common(simulate, simulate_args);
    auto* optimize = app.add_subcommand(
        "optimize", "structural design optimization (continuous or grid mode)");
    add_common(optimize, optimize_args);
    std::uint64_t seed_value = 0;
    auto* seed_opt = optimize->add_option("--seed", seed_value,
                                          "override the seed from the config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems are validation errors
    }

    try {
        if (*analyze) {
            drchain::cli::cmd_analyze(load(analyze_args), analyze_args.out_dir);
        } else if (*tune) {
            drchain::cli::cmd_tune(load(tune_args), tune_args.out_dir);
        } else if (*spectrum) {
            drchain::cli::cmd_spectrum(load(spectrum_args), spectrum_args.out_dir);
        } else if (*simulate) {
            drchain::cli::cmd_simulate(load(simulate_args), simulate_args.out_dir);
        } else if (*optimize) {
            if (seed_opt->count() > 0) seed_override = seed_value;
            drchain::cli::cmd_optimize(load(optimize_args), optimize_args.out_dir,
                                       seed_override);
        }
    } catch (const drchain::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const drchain::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
