#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "drchain/config.hpp"

namespace drchain::cli {

// Full steady-state/tuning/stability report for one configuration; the
// resolved config is echoed under "config" so reports are re-ingestable.
nlohmann::json analyze_report(const ExperimentConfig& config);

void cmd_analyze(const ExperimentConfig& config, const std::filesystem::path& out_dir);
void cmd_tune(const ExperimentConfig& config, const std::filesystem::path& out_dir);
void cmd_spectrum(const ExperimentConfig& config, const std::filesystem::path& out_dir);
void cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);
void cmd_optimize(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                  std::optional<std::uint64_t> seed_override);

}  // namespace drchain::cli
