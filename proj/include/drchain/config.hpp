#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "drchain/chain_model.hpp"
#include "drchain/ddae_stability.hpp"
#include "drchain/optimizer.hpp"
#include "drchain/time_simulation.hpp"

namespace drchain {

enum class DesignMode { kContinuous, kGrid };

struct DesignConfig {
    DesignMode mode = DesignMode::kContinuous;
    DesignProblem problem;  // chain/absorber/excitation filled from the experiment
    int starts = 100;
    std::uint64_t seed = 1;
    SolverOptions solver;
};

// Top-level experiment description. The JSON schema is strict: unknown keys
// anywhere are rejected with the offending path.
struct ExperimentConfig {
    int schema_version = 1;
    ChainModel model;
    AbsorberModel absorber;
    HarmonicExcitation excitation;
    SpectrumOptions spectrum;
    SimulationConfig simulation;
    std::optional<DesignConfig> design;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical JSON emission; parse(config_to_json(c)) round-trips exactly.
nlohmann::json config_to_json(const ExperimentConfig& config);

// Applies "--override key.path=value" style overrides to raw config JSON.
// The value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace drchain
