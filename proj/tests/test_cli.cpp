#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drchain/cli.hpp"

using namespace drchain;
namespace fs = std::filesystem;

namespace {

fs::path fixture(const char* name) {
    return fs::path(DRCHAIN_FIXTURE_DIR) / name;
}

fs::path scratch_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / "drchain_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    return j;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DRCHAIN_CLI_BIN) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("fixture configs load and validate") {
    for (const char* name :
         {"three_cart_nominal.json", "three_cart_optimized.json", "three_cart_grid.json",
          "five_mass_nominal.json", "five_mass_optimized.json", "five_mass_solve.json"}) {
        const ExperimentConfig config = load_config(fixture(name));
        CHECK(config.schema_version == 1);
        CHECK(config.model.d >= 3);
    }
    const ExperimentConfig grid = load_config(fixture("three_cart_grid.json"));
    REQUIRE(grid.design.has_value());
    CHECK(grid.design->mode == DesignMode::kGrid);
    CHECK(grid.design->problem.linear_constraints.size() == 1);
}

TEST_CASE("unknown keys are rejected with their path") {
    nlohmann::json j = config_to_json(load_config(fixture("five_mass_nominal.json")));
    j["model"]["unexpected"] = 1;
    try {
        parse_config(j);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("$.model.unexpected") != std::string::npos);
    }
}

TEST_CASE("non-collocated arrangement is enforced at parse time") {
    nlohmann::json j = config_to_json(load_config(fixture("five_mass_nominal.json")));
    j["model"]["absorber_index"] = 3;
    j["model"]["target_index"] = 3;
    try {
        parse_config(j);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("1 <= p < s <= d") != std::string::npos);
    }
}

TEST_CASE("dotted-path overrides") {
    nlohmann::json j = config_to_json(load_config(fixture("five_mass_nominal.json")));
    apply_override(j, "simulation.t_end_s=42.5");
    apply_override(j, "absorber.mass_kg=0.6");
    const ExperimentConfig config = parse_config(j);
    CHECK(config.simulation.t_end == 42.5);
    CHECK(config.absorber.mass == 0.6);
    CHECK_THROWS_AS(apply_override(j, "no_equals_sign"), ValidationError);
}

TEST_CASE("analyze report round-trips through its embedded config") {
    const ExperimentConfig config = load_config(fixture("three_cart_nominal.json"));
    const nlohmann::json first = cli::analyze_report(config);
    const ExperimentConfig reloaded = parse_config(first.at("config"));
    const nlohmann::json second = cli::analyze_report(reloaded);
    CHECK(first.dump() == second.dump());
}

TEST_CASE("analyze emits the three-cart table row") {
    const ExperimentConfig config = load_config(fixture("three_cart_nominal.json"));
    const fs::path out = scratch_dir("analyze");
    cli::cmd_analyze(config, out);
    const nlohmann::json report = read_json(out / "analyze_report.json");
    CHECK(report["max_link_energy_J"].get<double>() == doctest::Approx(0.00232).epsilon(0.01));
    CHECK(report["power_W"]["max_W"].get<double>() == doctest::Approx(0.03129).epsilon(0.01));
    CHECK(report["feedback"]["gain_N_per_m"].get<double>() ==
          doctest::Approx(-78.05282).epsilon(1e-3));
    CHECK(report["spectral_abscissa_per_s"].get<double>() ==
          doctest::Approx(-0.62415).epsilon(2e-3));
    CHECK(report["max_link_energy_link"].get<int>() == 4);
}

TEST_CASE("spectrum CSV is plot-ready and consistent with the abscissa") {
    const ExperimentConfig config = load_config(fixture("three_cart_nominal.json"));
    const fs::path out = scratch_dir("spectrum");
    cli::cmd_spectrum(config, out);

    std::ifstream csv(out / "spectrum.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "re_per_s,im_per_s,residual");
    double max_re = -1e300;
    int rows = 0;
    std::string line;
    while (std::getline(csv, line)) {
        std::istringstream ss(line);
        std::string re_s, im_s, res_s;
        std::getline(ss, re_s, ',');
        std::getline(ss, im_s, ',');
        std::getline(ss, res_s, ',');
        max_re = std::max(max_re, std::stod(re_s));
        CHECK(std::stod(res_s) < 1e-8);
        ++rows;
    }
    CHECK(rows > 2);
    const nlohmann::json meta = read_json(out / "spectrum.json");
    CHECK(meta["spectral_abscissa_per_s"].get<double>() == doctest::Approx(max_re));
}

TEST_CASE("zero excitation simulates to all-zero columns") {
    const ExperimentConfig base = load_config(fixture("five_mass_nominal.json"));
    nlohmann::json j = config_to_json(base);
    apply_override(j, "excitation.amplitude_N=0.0");
    apply_override(j, "simulation.t_end_s=2.0");
    apply_override(j, "simulation.switch_time_s=1.0");
    const ExperimentConfig config = parse_config(j);
    const fs::path out = scratch_dir("simulate_zero");
    cli::cmd_simulate(config, out);

    std::ifstream csv(out / "trajectory.csv");
    std::string header, line;
    std::getline(csv, header);
    CHECK(header.rfind("time_s,x1_m", 0) == 0);
    while (std::getline(csv, line)) {
        std::istringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // time
        while (std::getline(ss, cell, ',')) {
            CHECK(std::stod(cell) == 0.0);
        }
    }
}

TEST_CASE("optimize requires a design block") {
    const ExperimentConfig config = load_config(fixture("five_mass_nominal.json"));
    CHECK_THROWS_AS(cli::cmd_optimize(config, scratch_dir("opt_missing"), std::nullopt),
                    ValidationError);
}

TEST_CASE("process exit codes: success, validation, usage") {
    const fs::path out = scratch_dir("proc");
    CHECK(run_cli("tune --config " + fixture("five_mass_nominal.json").string() +
                  " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "tuning.json"));

    // Unknown key in the config: validation error, exit 2.
    const fs::path bad = out / "bad.json";
    {
        nlohmann::json j = config_to_json(load_config(fixture("five_mass_nominal.json")));
        j["typo"] = true;
        std::ofstream f(bad);
        f << j.dump();
    }
    CHECK(run_cli("analyze --config " + bad.string() + " --out " + out.string()) == 2);

    // Missing required option.
    CHECK(run_cli("analyze") == 2);
    // Missing file.
    CHECK(run_cli("analyze --config /nonexistent.json") == 2);
    // optimize without a design block.
    CHECK(run_cli("optimize --config " + fixture("five_mass_nominal.json").string() +
                  " --out " + out.string()) == 2);
}

TEST_CASE("numerical failures exit with code 3") {
    // Driving an almost undamped chain exactly at a resonating-block
    // eigenfrequency makes the required force computation throw.
    const fs::path out = scratch_dir("numfail");
    nlohmann::json j = config_to_json(load_config(fixture("five_mass_nominal.json")));
    j["model"]["dampings_Ns_per_m"] = {1e-30, 1e-30, 1e-30, 1.0, 1.0, 1.0};
    j["model"]["stiffnesses_N_per_m"] = {100.0, 100.0, 100.0, 100.0, 100.0, 100.0};
    j["excitation"]["omega_rad_per_s"] = 10.0;  // omega^2 = 100
    const fs::path cfg = out / "resonant.json";
    {
        std::ofstream f(cfg);
        f << j.dump();
    }
    CHECK(run_cli("analyze --config " + cfg.string() + " --out " + out.string()) == 3);
}
