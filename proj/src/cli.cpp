#include "drchain/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "drchain/phasor_analysis.hpp"

namespace drchain::cli {

namespace {

using nlohmann::json;

bool quiet() {
    const char* level = std::getenv("DRCHAIN_LOG");
    return level != nullptr && std::string(level) == "quiet";
}

void info(const std::string& line) {
    if (!quiet()) std::cout << line << "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot open '" + path.string() + "' for writing");
    }
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

json phasor_json(const Phasor& value) {
    return {{"re", value.real()},
            {"im", value.imag()},
            {"abs", std::abs(value)},
            {"arg_rad", std::arg(value)}};
}

json feedback_json(const DrFeedback& fb) {
    return {{"gain_N_per_m", fb.gain},
            {"delay_s", fb.delay},
            {"branch", fb.branch == Branch::kPlus ? "plus" : "minus"},
            {"k", fb.k}};
}

json energy_json(const EnergyTriple& e) {
    return {{"mean_J", e.mean}, {"phasor_J", e.phasor_mag}, {"max_J", e.max}};
}

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
}

}  // namespace

json analyze_report(const ExperimentConfig& config) {
    const ChainModel& model = config.model;
    const AbsorberModel& absorber = config.absorber;
    const HarmonicExcitation& excitation = config.excitation;

    const TuningSet tuning = tune(model, absorber, excitation);
    const TargetStageState state = target_stage_state(model, absorber, excitation);
    EnergyReport energies = link_energy_maxima(model, state.x_R, state.x_V);
    energies.absorber = absorber_energy_max(model, absorber, state.f_a, excitation);
    const Phasor x_p = state.x_R(model.p - 1);
    const PowerReport power = actuation_power(state.u, x_p, state.x_a, excitation.omega);

    const DdaeSystem sys = build_ddae(model, absorber, tuning.selected);
    const Spectrum spectrum = compute_spectrum(sys, config.spectrum);

    const PassiveSteadyState passive = passive_steady_state(model, absorber, excitation);

    json report;
    report["schema_version"] = 1;
    report["absorber_force_N"] = phasor_json(state.f_a);
    report["control_force_N"] = phasor_json(state.u);
    report["q"] = phasor_json(tuning.q);
    report["feedback"] = feedback_json(tuning.selected);

    double w_max = 0.0;
    int w_argmax = 1;
    json links = json::array();
    for (std::size_t i = 0; i < energies.links.size(); ++i) {
        links.push_back(energy_json(energies.links[i]));
        if (energies.links[i].max > w_max) {
            w_max = energies.links[i].max;
            w_argmax = static_cast<int>(i) + 1;
        }
    }
    report["link_energy_J"] = links;
    report["max_link_energy_J"] = w_max;
    report["max_link_energy_link"] = w_argmax;
    report["absorber_energy_J"] = energy_json(energies.absorber);
    report["power_W"] = {{"mean_W", power.mean},
                         {"oscillation_W", power.oscillation},
                         {"max_W", power.max}};
    report["spectral_abscissa_per_s"] = spectrum.abscissa;
    report["spectrum_grid_size"] = spectrum.grid_size_used;

    json amplitudes = json::array();
    for (int i = 1; i <= model.d; ++i) {
        if (i < model.s) {
            amplitudes.push_back(std::abs(state.x_R(i - 1)));
        } else if (i == model.s) {
            amplitudes.push_back(0.0);
        } else {
            amplitudes.push_back(std::abs(state.x_V(i - model.s - 1)));
        }
    }
    report["displacement_amplitudes_m"] = amplitudes;
    report["absorber_amplitude_m"] = std::abs(state.x_a);

    json passive_amp = json::array();
    for (int i = 0; i < model.d; ++i) passive_amp.push_back(std::abs(passive.x(i)));
    json passive_links = json::array();
    for (const auto& link : passive.energies.links) passive_links.push_back(energy_json(link));
    report["passive"] = {{"displacement_amplitudes_m", passive_amp},
                         {"absorber_amplitude_m", std::abs(passive.x_a)},
                         {"link_energy_J", passive_links},
                         {"absorber_energy_J", energy_json(passive.energies.absorber)}};

    if (config.design) {
        const DesignProblem resolved = resolve_normalization(config.design->problem);
        report["objective_J"] =
            resolved.gamma * w_max / resolved.w_nom +
            (1.0 - resolved.gamma) * power.max / resolved.p_nom;
    }
    report["config"] = config_to_json(config);
    return report;
}

void cmd_analyze(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    const json report = analyze_report(config);
    std::filesystem::create_directories(out_dir);
    write_json(out_dir / "analyze_report.json", report);
    info("max W_i = " + format_double(report["max_link_energy_J"].get<double>()) +
         " J (link " + std::to_string(report["max_link_energy_link"].get<int>()) +
         "), P_max = " + format_double(report["power_W"]["max_W"].get<double>()) +
         " W, W_a = " + format_double(report["absorber_energy_J"]["max_J"].get<double>()) +
         " J, alpha = " + format_double(report["spectral_abscissa_per_s"].get<double>()) +
         " 1/s, g = " + format_double(report["feedback"]["gain_N_per_m"].get<double>()) +
         " N/m, tau = " + format_double(report["feedback"]["delay_s"].get<double>()) + " s");
    info("wrote " + (out_dir / "analyze_report.json").string());
}

void cmd_tune(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    const TuningSet tuning = tune(config.model, config.absorber, config.excitation);
    json j;
    j["schema_version"] = 1;
    j["q"] = phasor_json(tuning.q);
    j["selected"] = feedback_json(tuning.selected);
    j["candidates"] = json::array();
    for (const auto& c : tuning.candidates) j["candidates"].push_back(feedback_json(c));
    j["config"] = config_to_json(config);
    std::filesystem::create_directories(out_dir);
    write_json(out_dir / "tuning.json", j);
    info("selected g = " + format_double(tuning.selected.gain) + " N/m, tau = " +
         format_double(tuning.selected.delay) + " s (" +
         std::string(tuning.selected.branch == Branch::kPlus ? "plus" : "minus") +
         " branch, k = " + std::to_string(tuning.selected.k) + ")");
    info("wrote " + (out_dir / "tuning.json").string());
}

void cmd_spectrum(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    const TuningSet tuning = tune(config.model, config.absorber, config.excitation);
    const DdaeSystem sys = build_ddae(config.model, config.absorber, tuning.selected);
    const Spectrum spectrum = compute_spectrum(sys, config.spectrum);

    std::ostringstream csv;
    csv << "re_per_s,im_per_s,residual\n";
    csv << std::setprecision(16);
    for (std::size_t i = 0; i < spectrum.roots.size(); ++i) {
        csv << spectrum.roots[i].real() << "," << spectrum.roots[i].imag() << ","
            << spectrum.residuals[i] << "\n";
    }
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / "spectrum.csv", csv.str());

    json j;
    j["schema_version"] = 1;
    j["spectral_abscissa_per_s"] = spectrum.abscissa;
    j["root_count"] = spectrum.roots.size();
    j["grid_size_used"] = spectrum.grid_size_used;
    j["dropped_candidates"] = spectrum.dropped;
    j["feedback"] = feedback_json(tuning.selected);
    j["config"] = config_to_json(config);
    write_json(out_dir / "spectrum.json", j);
    info("alpha = " + format_double(spectrum.abscissa) + " 1/s over " +
         std::to_string(spectrum.roots.size()) + " certified roots");
    info("wrote " + (out_dir / "spectrum.csv").string());
}

void cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    const TuningSet tuning = tune(config.model, config.absorber, config.excitation);
    SimulationConfig sim = config.simulation;
    sim.excitation = config.excitation;
    const Trajectory traj = simulate(config.model, config.absorber, tuning.selected, sim);

    const int d = config.model.d;
    std::ostringstream csv;
    csv << "time_s";
    for (int i = 1; i <= d; ++i) csv << ",x" << i << "_m";
    for (int i = 1; i <= d; ++i) csv << ",v" << i << "_m_per_s";
    csv << ",xa_m,va_m_per_s,fa_N,u_N";
    for (int i = 1; i <= d + 1; ++i) csv << ",W" << i << "_J";
    csv << ",Wa_J,p_W\n";
    csv << std::setprecision(12);
    for (std::size_t row = 0; row < traj.time.size(); ++row) {
        const auto i = static_cast<Eigen::Index>(row);
        csv << traj.time[row];
        for (int c = 0; c < d; ++c) csv << "," << traj.x(i, c);
        for (int c = 0; c < d; ++c) csv << "," << traj.v(i, c);
        csv << "," << traj.x_a(i) << "," << traj.v_a(i) << "," << traj.f_a(i) << ","
            << traj.u(i);
        for (int c = 0; c <= d; ++c) csv << "," << traj.link_energy(i, c);
        csv << "," << traj.absorber_energy(i) << "," << traj.power(i) << "\n";
    }
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / "trajectory.csv", csv.str());
    info("simulated " + format_double(traj.time.back()) + " s at dt = " +
         format_double(traj.dt) + " s (" + std::to_string(traj.time.size()) + " rows)");
    info("wrote " + (out_dir / "trajectory.csv").string());
}

void cmd_optimize(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                  std::optional<std::uint64_t> seed_override) {
    if (!config.design) {
        throw ValidationError("optimize: the config has no 'design' block");
    }
    const DesignConfig& design = *config.design;
    std::filesystem::create_directories(out_dir);

    DesignResult best;
    if (design.mode == DesignMode::kGrid) {
        const GridResult grid = grid_search(design.problem, design.solver);
        best = grid.best;

        std::ostringstream csv;
        for (const auto& p : design.problem.parameters) csv << p.id << ",";
        csv << "objective,w_max_J,p_max_W,alpha_per_s,wa_max_J,feasible\n";
        csv << std::setprecision(12);
        for (const auto& point : grid.map) {
            for (Eigen::Index i = 0; i < point.theta.size(); ++i) csv << point.theta(i) << ",";
            csv << point.objective << "," << point.w_max << "," << point.p_max << ","
                << point.alpha << "," << point.wa_max << "," << (point.feasible ? 1 : 0)
                << "\n";
        }
        write_text(out_dir / "grid_map.csv", csv.str());
        info("wrote " + (out_dir / "grid_map.csv").string());
    } else {
        if (design.starts < 1) {
            throw ValidationError("optimize: starts must be at least 1");
        }
        const std::uint64_t seed = seed_override.value_or(design.seed);
        best = solve(design.problem, design.starts, seed, design.solver);

        std::ostringstream lines;
        lines << std::setprecision(12);
        for (const auto& log : best.starts) {
            json line = {{"start", log.start},
                         {"iterations", log.iterations},
                         {"objective", log.objective},
                         {"violation", log.violation},
                         {"feasible", log.feasible},
                         {"tunable", log.tunable}};
            line["theta"] = std::vector<double>(log.theta.data(),
                                                log.theta.data() + log.theta.size());
            lines << line.dump() << "\n";
        }
        write_text(out_dir / "optimize_starts.jsonl", lines.str());
        info("wrote " + (out_dir / "optimize_starts.jsonl").string());
    }

    json result;
    result["schema_version"] = 1;
    result["feasible"] = best.feasible;
    json theta = json::object();
    for (std::size_t i = 0; i < design.problem.parameters.size(); ++i) {
        theta[design.problem.parameters[i].id] = best.theta(static_cast<Eigen::Index>(i));
    }
    result["theta"] = theta;
    result["objective"] = best.objective;
    result["w_max_J"] = best.w_max;
    result["p_max_W"] = best.p_max;
    result["feedback"] = feedback_json(best.feedback);
    result["alpha_per_s"] = best.alpha;
    result["wa_max_J"] = best.wa_max;
    result["alpha_slack_per_s"] = best.alpha_slack;
    result["wa_slack_J"] = best.wa_slack;
    result["linear_residuals"] = std::vector<double>(
        best.linear_residuals.data(),
        best.linear_residuals.data() + best.linear_residuals.size());
    result["start_index"] = best.start_index;
    result["config"] = config_to_json(config);
    write_json(out_dir / "optimize_result.json", result);

    // Ready-to-analyze config with theta* applied. The normalization is
    // pinned to the original nominal point so the objective stays comparable.
    ExperimentConfig optimized = config;
    apply_theta(design.problem, best.theta, optimized.model, optimized.absorber);
    if (optimized.design) {
        const DesignProblem resolved = resolve_normalization(design.problem);
        optimized.design->problem.chain = optimized.model;
        optimized.design->problem.absorber = optimized.absorber;
        optimized.design->problem.w_nom = resolved.w_nom;
        optimized.design->problem.p_nom = resolved.p_nom;
    }
    write_json(out_dir / "optimized_config.json", config_to_json(optimized));

    info(std::string("best ") + (best.feasible ? "feasible" : "INFEASIBLE") +
         " objective = " + format_double(best.objective) + " (W = " +
         format_double(best.w_max) + " J, P = " + format_double(best.p_max) +
         " W, alpha = " + format_double(best.alpha) + " 1/s, W_a = " +
         format_double(best.wa_max) + " J)");
    info("wrote " + (out_dir / "optimize_result.json").string());
    info("wrote " + (out_dir / "optimized_config.json").string());
}

}  // namespace drchain::cli
