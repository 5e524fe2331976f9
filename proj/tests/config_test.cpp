#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "pvdqn/config.hpp"
#include "pvdqn/error.hpp"

using namespace pvdqn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("pvdqn_config_" + name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Defaults, HyperparametersAndEnvironment) {
  const ExperimentConfig cfg;
  EXPECT_EQ(cfg.train.episodes, 500u);
  EXPECT_EQ(cfg.train.seed, 42u);
  EXPECT_EQ(cfg.train.agent.batch_size, 128u);
  EXPECT_EQ(cfg.train.agent.learning_rate, 0.1);
  EXPECT_EQ(cfg.train.agent.hidden, (std::vector<std::size_t>{32, 32}));
  EXPECT_EQ(cfg.train.agent.epsilon_base, 0.99999);
  EXPECT_EQ(cfg.train.agent.epsilon_floor, 0.01);
  EXPECT_EQ(cfg.train.env.horizon, 24u);
  EXPECT_EQ(cfg.grid.points, 10u);
  EXPECT_NO_THROW(validate(cfg.train));
}

TEST(Json, RoundTrip) {
  ExperimentConfig cfg;
  cfg.train.episodes = 77;
  cfg.train.env.load_range = {1, 9};
  cfg.train.env.system_cost = 1234.5;
  cfg.train.agent.hidden = {5, 6, 7};
  cfg.train.agent.gamma = 0.25;
  cfg.train.seed = 9;
  cfg.grid.points = 4;
  cfg.grid.slice_budget = 2500;
  const json j = to_json(cfg);
  EXPECT_EQ(experiment_config_from_json(j), cfg);
  EXPECT_EQ(experiment_config_from_json(json::parse(j.dump())), cfg);
}

TEST(Json, MissingKeysKeepDefaults) {
  const auto cfg = experiment_config_from_json(json::parse(R"({"episodes": 3, "agent": {"gamma": 0.7}})"));
  EXPECT_EQ(cfg.train.episodes, 3u);
  EXPECT_EQ(cfg.train.agent.gamma, 0.7);
  EXPECT_EQ(cfg.train.agent.batch_size, 128u);
  EXPECT_EQ(cfg.train.env, EnvConfig{});
}

TEST(Json, UnknownKeysAreRejected) {
  EXPECT_THROW(experiment_config_from_json(json::parse(R"({"episode": 3})")), ConfigError);
  EXPECT_THROW(experiment_config_from_json(json::parse(R"({"agent": {"lr": 0.1}})")), ConfigError);
  EXPECT_THROW(experiment_config_from_json(json::parse(R"({"env": {"horizon": 1, "colour": 2}})")), ConfigError);
  EXPECT_THROW(experiment_config_from_json(json::parse(R"({"grid": {"slice": {"price": 1}}})")), ConfigError);
}

TEST(Json, IllTypedValuesAreRejected) {
  EXPECT_THROW(experiment_config_from_json(json::parse(R"({"episodes": "many"})")), ConfigError);
  EXPECT_THROW(experiment_config_from_json(json::parse(R"({"env": {"load_range": [1]}})")), ConfigError);
  EXPECT_THROW(experiment_config_from_json(json::parse(R"([1, 2])")), ConfigError);
}

TEST(Load, MissingFileNamesThePath) {
  const fs::path p = fs::temp_directory_path() / "pvdqn_config_absent.json";
  fs::remove(p);
  try {
    load_experiment_config(p);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(p.string()), std::string::npos);
  }
}

TEST(Load, MalformedAndInvalidFiles) {
  const auto bad = write_temp("bad.json", "{ not json");
  EXPECT_THROW(load_experiment_config(bad), ConfigError);
  const auto invalid = write_temp("invalid.json", R"({"agent": {"learning_rate": -1}})");
  EXPECT_THROW(load_experiment_config(invalid), ConfigError);
  const auto good = write_temp("good.json", R"({"episodes": 5, "grid": {"points": 3}})");
  const auto cfg = load_experiment_config(good);
  EXPECT_EQ(cfg.train.episodes, 5u);
  EXPECT_EQ(cfg.grid.points, 3u);
  fs::remove(bad);
  fs::remove(invalid);
  fs::remove(good);
}

TEST(Resolve, FlagThenEnvironment) {
  ::unsetenv("PV_ADVISOR_CONFIG");
  EXPECT_FALSE(resolve_config_path("").has_value());
  ::setenv("PV_ADVISOR_CONFIG", "/tmp/from-env.json", 1);
  EXPECT_EQ(resolve_config_path("").value(), fs::path("/tmp/from-env.json"));
  EXPECT_EQ(resolve_config_path("flag.json").value(), fs::path("flag.json"));
  ::unsetenv("PV_ADVISOR_CONFIG");
}

TEST(Hash, StableAndSensitive) {
  TrainConfig a;
  EXPECT_EQ(config_hash(a), config_hash(TrainConfig{}));
  EXPECT_EQ(config_hash(a).size(), 16u);
  TrainConfig b = a;
  b.agent.gamma = 0.51;
  EXPECT_NE(config_hash(a), config_hash(b));
}
