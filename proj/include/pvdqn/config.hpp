#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "pvdqn/env.hpp"
#include "pvdqn/rl.hpp"

namespace pvdqn {

struct TrainConfig {
  std::size_t episodes = 500;
  EnvConfig env;
  AgentConfig agent;
  std::size_t log_every = 10;
  std::uint64_t seed = 42;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& cfg);

/// Default evaluation grid: every state variable swept over its configured range, with an
/// optional slice value used when a variable is held fixed.
struct GridDefaults {
  std::size_t points = 10;
  std::optional<double> slice_load;
  std::optional<double> slice_incentives;
  std::optional<double> slice_budget;

  friend bool operator==(const GridDefaults&, const GridDefaults&) = default;
};

/// The on-disk experiment document.
struct ExperimentConfig {
  TrainConfig train;
  GridDefaults grid;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::json to_json(const EnvConfig& cfg);
nlohmann::json to_json(const AgentConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);

// Missing keys take defaults; unknown keys and ill-typed values throw ConfigError.
EnvConfig env_config_from_json(const nlohmann::json& j);
AgentConfig agent_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

/// Reads and validates an experiment file. Throws ConfigError with the path on failure.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Resolves the config path: explicit flag, else $PV_ADVISOR_CONFIG, else none.
std::optional<std::filesystem::path> resolve_config_path(const std::string& flag_value);

/// FNV-1a 64 over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const TrainConfig& cfg);

}  // namespace pvdqn
