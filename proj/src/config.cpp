#include "drchain/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace drchain {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ValidationError("config: " + path + ": " + message);
}

void require_keys(const json& j, const std::string& path,
                  const std::set<std::string>& allowed,
                  const std::set<std::string>& required) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) fail(path + "." + key, "unknown key");
    }
    for (const auto& key : required) {
        if (!j.contains(key)) fail(path + "." + key, "missing required key");
    }
}

double get_number(const json& j, const std::string& path, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

double get_number_or(const json& j, const std::string& path, const char* key,
                     double fallback) {
    if (!j.contains(key)) return fallback;
    return get_number(j, path, key);
}

int get_int(const json& j, const std::string& path, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
    return v.get<int>();
}

std::vector<double> get_array(const json& j, const std::string& path, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_array()) fail(path + "." + key, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& item : v) {
        if (!item.is_number()) fail(path + "." + key, "expected an array of numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

ChainModel parse_model(const json& j, const std::string& path) {
    require_keys(j, path,
                 {"d", "masses_kg", "stiffnesses_N_per_m", "dampings_Ns_per_m",
                  "absorber_index", "target_index"},
                 {"d", "masses_kg", "stiffnesses_N_per_m", "dampings_Ns_per_m",
                  "absorber_index", "target_index"});
    ChainModel model;
    model.d = get_int(j, path, "d");
    model.masses = get_array(j, path, "masses_kg");
    model.stiffnesses = get_array(j, path, "stiffnesses_N_per_m");
    model.dampings = get_array(j, path, "dampings_Ns_per_m");
    model.p = get_int(j, path, "absorber_index");
    model.s = get_int(j, path, "target_index");
    model.validate();
    return model;
}

AbsorberModel parse_absorber(const json& j, const std::string& path) {
    require_keys(j, path, {"mass_kg", "damping_Ns_per_m", "stiffness_N_per_m"},
                 {"mass_kg", "damping_Ns_per_m", "stiffness_N_per_m"});
    AbsorberModel absorber;
    absorber.mass = get_number(j, path, "mass_kg");
    absorber.damping = get_number(j, path, "damping_Ns_per_m");
    absorber.stiffness = get_number(j, path, "stiffness_N_per_m");
    absorber.validate();
    return absorber;
}

HarmonicExcitation parse_excitation(const json& j, const std::string& path) {
    require_keys(j, path, {"amplitude_N", "omega_rad_per_s"},
                 {"amplitude_N", "omega_rad_per_s"});
    HarmonicExcitation excitation;
    excitation.amplitude = get_number(j, path, "amplitude_N");
    excitation.omega = get_number(j, path, "omega_rad_per_s");
    excitation.validate();
    return excitation;
}

SpectrumOptions parse_spectrum(const json& j, const std::string& path) {
    require_keys(j, path,
                 {"rhp_bound_per_s", "grid_size", "newton_tol", "newton_max_iter",
                  "adaptive", "residual_tol"},
                 {});
    SpectrumOptions opt;
    opt.rhp_bound = get_number_or(j, path, "rhp_bound_per_s", opt.rhp_bound);
    if (j.contains("grid_size")) opt.grid_size = get_int(j, path, "grid_size");
    opt.newton_tol = get_number_or(j, path, "newton_tol", opt.newton_tol);
    if (j.contains("newton_max_iter")) opt.newton_max_iter = get_int(j, path, "newton_max_iter");
    if (j.contains("adaptive")) {
        if (!j.at("adaptive").is_boolean()) fail(path + ".adaptive", "expected a boolean");
        opt.adaptive = j.at("adaptive").get<bool>();
    }
    opt.residual_tol = get_number_or(j, path, "residual_tol", opt.residual_tol);
    if (opt.grid_size < 4) fail(path + ".grid_size", "must be at least 4");
    return opt;
}

SimulationConfig parse_simulation(const json& j, const std::string& path) {
    require_keys(j, path, {"t_end_s", "dt_s", "switch_time_s", "initial_state"}, {});
    SimulationConfig sim;
    sim.t_end = get_number_or(j, path, "t_end_s", sim.t_end);
    sim.dt = get_number_or(j, path, "dt_s", sim.dt);
    sim.switch_time = get_number_or(j, path, "switch_time_s", sim.switch_time);
    if (j.contains("initial_state")) {
        const auto values = get_array(j, path, "initial_state");
        sim.initial_state = Eigen::Map<const Eigen::VectorXd>(
            values.data(), static_cast<Eigen::Index>(values.size()));
    }
    return sim;
}

DesignConfig parse_design(const json& j, const std::string& path,
                          const ExperimentConfig& experiment) {
    require_keys(j, path,
                 {"mode", "parameters", "gamma", "w_nom_J", "p_nom_W",
                  "xi_alpha_per_s", "xi_a_J", "linear_constraints", "starts", "seed",
                  "solver"},
                 {"mode", "parameters", "xi_alpha_per_s", "xi_a_J"});
    DesignConfig design;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "continuous") {
        design.mode = DesignMode::kContinuous;
    } else if (mode == "grid") {
        design.mode = DesignMode::kGrid;
    } else {
        fail(path + ".mode", "expected 'continuous' or 'grid'");
    }

    DesignProblem& problem = design.problem;
    problem.chain = experiment.model;
    problem.absorber = experiment.absorber;
    problem.excitation = experiment.excitation;
    problem.spectrum_options = experiment.spectrum;

    const auto& params = j.at("parameters");
    if (!params.is_array() || params.empty()) {
        fail(path + ".parameters", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::string ppath = path + ".parameters[" + std::to_string(i) + "]";
        require_keys(params[i], ppath, {"id", "lower", "upper", "step"},
                     {"id", "lower", "upper"});
        ParameterBound bound;
        bound.id = params[i].at("id").get<std::string>();
        bound.lower = get_number(params[i], ppath, "lower");
        bound.upper = get_number(params[i], ppath, "upper");
        bound.step = get_number_or(params[i], ppath, "step", 0.0);
        problem.parameters.push_back(bound);
    }
    problem.gamma = get_number_or(j, path, "gamma", 0.5);
    problem.w_nom = get_number_or(j, path, "w_nom_J", 0.0);
    problem.p_nom = get_number_or(j, path, "p_nom_W", 0.0);
    problem.xi_alpha = get_number(j, path, "xi_alpha_per_s");
    problem.xi_a = get_number(j, path, "xi_a_J");
    if (j.contains("linear_constraints")) {
        const auto& lins = j.at("linear_constraints");
        if (!lins.is_array()) fail(path + ".linear_constraints", "expected an array");
        for (std::size_t i = 0; i < lins.size(); ++i) {
            const std::string lpath = path + ".linear_constraints[" + std::to_string(i) + "]";
            require_keys(lins[i], lpath, {"coefficients", "bound"}, {"coefficients", "bound"});
            LinearConstraintSpec spec;
            const auto& coeffs = lins[i].at("coefficients");
            if (!coeffs.is_object()) fail(lpath + ".coefficients", "expected an object");
            for (const auto& [id, value] : coeffs.items()) {
                if (!value.is_number()) fail(lpath + ".coefficients." + id, "expected a number");
                spec.coefficients[id] = value.get<double>();
            }
            spec.bound = get_number(lins[i], lpath, "bound");
            problem.linear_constraints.push_back(spec);
        }
    }
    if (j.contains("starts")) design.starts = get_int(j, path, "starts");
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer()) fail(path + ".seed", "expected an integer");
        design.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("solver")) {
        const std::string spath = path + ".solver";
        const auto& s = j.at("solver");
        require_keys(s, spath,
                     {"max_iter", "mu0", "opt_tol", "step_tol", "feas_tol", "fd_step",
                      "threads", "inner_grid_size"},
                     {});
        if (s.contains("max_iter")) design.solver.max_iter = get_int(s, spath, "max_iter");
        design.solver.mu0 = get_number_or(s, spath, "mu0", design.solver.mu0);
        design.solver.opt_tol = get_number_or(s, spath, "opt_tol", design.solver.opt_tol);
        design.solver.step_tol = get_number_or(s, spath, "step_tol", design.solver.step_tol);
        design.solver.feas_tol = get_number_or(s, spath, "feas_tol", design.solver.feas_tol);
        design.solver.fd_step = get_number_or(s, spath, "fd_step", design.solver.fd_step);
        if (s.contains("threads")) design.solver.threads = get_int(s, spath, "threads");
        if (s.contains("inner_grid_size")) {
            design.solver.inner_spectrum.grid_size = get_int(s, spath, "inner_grid_size");
        }
    }
    design.solver.inner_spectrum.rhp_bound = problem.spectrum_options.rhp_bound;
    design.solver.inner_spectrum.newton_tol = problem.spectrum_options.newton_tol;
    design.solver.inner_spectrum.newton_max_iter = problem.spectrum_options.newton_max_iter;
    design.solver.inner_spectrum.residual_tol = problem.spectrum_options.residual_tol;
    problem.validate();
    return design;
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
    require_keys(j, "$",
                 {"schema_version", "model", "absorber", "excitation", "spectrum",
                  "simulation", "design"},
                 {"schema_version", "model", "absorber", "excitation"});
    ExperimentConfig config;
    config.schema_version = get_int(j, "$", "schema_version");
    if (config.schema_version != 1) {
        fail("$.schema_version", "unsupported schema version " +
                                     std::to_string(config.schema_version));
    }
    config.model = parse_model(j.at("model"), "$.model");
    config.absorber = parse_absorber(j.at("absorber"), "$.absorber");
    config.excitation = parse_excitation(j.at("excitation"), "$.excitation");
    if (j.contains("spectrum")) {
        config.spectrum = parse_spectrum(j.at("spectrum"), "$.spectrum");
    }
    if (j.contains("simulation")) {
        config.simulation = parse_simulation(j.at("simulation"), "$.simulation");
    }
    config.simulation.excitation = config.excitation;
    if (j.contains("design")) {
        config.design = parse_design(j.at("design"), "$.design", config);
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("config: cannot open '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config: '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["schema_version"] = config.schema_version;
    j["model"] = {
        {"d", config.model.d},
        {"masses_kg", config.model.masses},
        {"stiffnesses_N_per_m", config.model.stiffnesses},
        {"dampings_Ns_per_m", config.model.dampings},
        {"absorber_index", config.model.p},
        {"target_index", config.model.s},
    };
    j["absorber"] = {
        {"mass_kg", config.absorber.mass},
        {"damping_Ns_per_m", config.absorber.damping},
        {"stiffness_N_per_m", config.absorber.stiffness},
    };
    j["excitation"] = {
        {"amplitude_N", config.excitation.amplitude},
        {"omega_rad_per_s", config.excitation.omega},
    };
    j["spectrum"] = {
        {"rhp_bound_per_s", config.spectrum.rhp_bound},
        {"grid_size", config.spectrum.grid_size},
        {"newton_tol", config.spectrum.newton_tol},
        {"newton_max_iter", config.spectrum.newton_max_iter},
        {"adaptive", config.spectrum.adaptive},
        {"residual_tol", config.spectrum.residual_tol},
    };
    nlohmann::json sim = {
        {"t_end_s", config.simulation.t_end},
        {"dt_s", config.simulation.dt},
        {"switch_time_s", config.simulation.switch_time},
    };
    if (config.simulation.initial_state.size() > 0) {
        sim["initial_state"] = std::vector<double>(
            config.simulation.initial_state.data(),
            config.simulation.initial_state.data() + config.simulation.initial_state.size());
    }
    j["simulation"] = sim;
    if (config.design) {
        const DesignConfig& design = *config.design;
        nlohmann::json dj;
        dj["mode"] = design.mode == DesignMode::kContinuous ? "continuous" : "grid";
        dj["parameters"] = nlohmann::json::array();
        for (const auto& p : design.problem.parameters) {
            nlohmann::json pj = {{"id", p.id}, {"lower", p.lower}, {"upper", p.upper}};
            if (p.step > 0.0) pj["step"] = p.step;
            dj["parameters"].push_back(pj);
        }
        dj["gamma"] = design.problem.gamma;
        if (design.problem.w_nom > 0.0) dj["w_nom_J"] = design.problem.w_nom;
        if (design.problem.p_nom > 0.0) dj["p_nom_W"] = design.problem.p_nom;
        dj["xi_alpha_per_s"] = design.problem.xi_alpha;
        dj["xi_a_J"] = design.problem.xi_a;
        if (!design.problem.linear_constraints.empty()) {
            dj["linear_constraints"] = nlohmann::json::array();
            for (const auto& lin : design.problem.linear_constraints) {
                dj["linear_constraints"].push_back(
                    {{"coefficients", lin.coefficients}, {"bound", lin.bound}});
            }
        }
        dj["starts"] = design.starts;
        dj["seed"] = design.seed;
        dj["solver"] = {
            {"max_iter", design.solver.max_iter},
            {"mu0", design.solver.mu0},
            {"opt_tol", design.solver.opt_tol},
            {"step_tol", design.solver.step_tol},
            {"feas_tol", design.solver.feas_tol},
            {"fd_step", design.solver.fd_step},
            {"threads", design.solver.threads},
            {"inner_grid_size", design.solver.inner_spectrum.grid_size},
        };
        j["design"] = dj;
    }
    return j;
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ValidationError("override: expected key.path=value, got '" + assignment + "'");
    }
    const std::string key_path = assignment.substr(0, eq);
    const std::string raw_value = assignment.substr(eq + 1);

    nlohmann::json value;
    try {
        value = nlohmann::json::parse(raw_value);
    } catch (const nlohmann::json::exception&) {
        value = raw_value;  // plain string
    }

    nlohmann::json* node = &j;
    std::istringstream keys(key_path);
    std::string key;
    std::vector<std::string> parts;
    while (std::getline(keys, key, '.')) parts.push_back(key);
    if (parts.empty()) {
        throw ValidationError("override: empty key path in '" + assignment + "'");
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        node = &(*node)[parts[i]];
    }
    (*node)[parts.back()] = value;
}

}  // namespace drchain
