#include "pvdqn/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "pvdqn/error.hpp"

namespace pvdqn {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void read_count(const json& j, const char* key, std::size_t& out, const std::string& where) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  out = v.get<std::size_t>();
}

void read_range(const json& j, const char* key, Range& out, const std::string& where) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(where + "." + key + ": expected [min, max]");
  out = {v[0].get<double>(), v[1].get<double>()};
}

json range_json(const Range& r) { return json::array({r.min, r.max}); }

}  // namespace

nlohmann::json to_json(const EnvConfig& c) {
  return {{"load_range", range_json(c.load_range)},
          {"incentive_range", range_json(c.incentive_range)},
          {"budget_range", range_json(c.budget_range)},
          {"price_range", range_json(c.price_range)},
          {"system_cost", c.system_cost},
          {"pv_capacity_kw", c.pv_capacity_kw},
          {"capacity_factor_range", range_json(c.capacity_factor_range)},
          {"infeasible_penalty", c.infeasible_penalty},
          {"horizon", c.horizon},
          {"seed", c.seed}};
}

nlohmann::json to_json(const AgentConfig& c) {
  return {{"hidden", c.hidden},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"gamma", c.gamma},
          {"replay_capacity", c.replay_capacity},
          {"epsilon_base", c.epsilon_base},
          {"epsilon_floor", c.epsilon_floor}};
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"episodes", c.episodes},
          {"env", to_json(c.env)},
          {"agent", to_json(c.agent)},
          {"log_every", c.log_every},
          {"seed", c.seed}};
}

nlohmann::json to_json(const ExperimentConfig& c) {
  json j = to_json(c.train);
  json grid = {{"points", c.grid.points}};
  json slice = json::object();
  if (c.grid.slice_load) slice["farm_load"] = *c.grid.slice_load;
  if (c.grid.slice_incentives) slice["incentives"] = *c.grid.slice_incentives;
  if (c.grid.slice_budget) slice["budget"] = *c.grid.slice_budget;
  if (!slice.empty()) grid["slice"] = slice;
  j["grid"] = grid;
  return j;
}

EnvConfig env_config_from_json(const json& j) {
  const std::string w = "env";
  require_object(j, w,
                 {"load_range", "incentive_range", "budget_range", "price_range", "system_cost", "pv_capacity_kw",
                  "capacity_factor_range", "infeasible_penalty", "horizon", "seed"});
  EnvConfig c;
  read_range(j, "load_range", c.load_range, w);
  read_range(j, "incentive_range", c.incentive_range, w);
  read_range(j, "budget_range", c.budget_range, w);
  read_range(j, "price_range", c.price_range, w);
  read(j, "system_cost", c.system_cost, w);
  read(j, "pv_capacity_kw", c.pv_capacity_kw, w);
  read_range(j, "capacity_factor_range", c.capacity_factor_range, w);
  read(j, "infeasible_penalty", c.infeasible_penalty, w);
  read_count(j, "horizon", c.horizon, w);
  read(j, "seed", c.seed, w);
  return c;
}

AgentConfig agent_config_from_json(const json& j) {
  const std::string w = "agent";
  require_object(j, w,
                 {"hidden", "learning_rate", "batch_size", "gamma", "replay_capacity", "epsilon_base",
                  "epsilon_floor"});
  AgentConfig c;
  read(j, "hidden", c.hidden, w);
  read(j, "learning_rate", c.learning_rate, w);
  read_count(j, "batch_size", c.batch_size, w);
  read(j, "gamma", c.gamma, w);
  read_count(j, "replay_capacity", c.replay_capacity, w);
  read(j, "epsilon_base", c.epsilon_base, w);
  read(j, "epsilon_floor", c.epsilon_floor, w);
  return c;
}

namespace {

TrainConfig train_fields(const json& j) {
  const std::string w = "config";
  TrainConfig c;
  read_count(j, "episodes", c.episodes, w);
  if (j.contains("env")) c.env = env_config_from_json(j.at("env"));
  if (j.contains("agent")) c.agent = agent_config_from_json(j.at("agent"));
  read_count(j, "log_every", c.log_every, w);
  read(j, "seed", c.seed, w);
  return c;
}

}  // namespace

TrainConfig train_config_from_json(const json& j) {
  require_object(j, "config", {"episodes", "env", "agent", "log_every", "seed"});
  return train_fields(j);
}

ExperimentConfig experiment_config_from_json(const json& j) {
  require_object(j, "config", {"episodes", "env", "agent", "log_every", "seed", "grid"});
  ExperimentConfig c;
  c.train = train_fields(j);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    require_object(g, "grid", {"points", "slice"});
    read_count(g, "points", c.grid.points, "grid");
    if (g.contains("slice")) {
      const auto& s = g.at("slice");
      require_object(s, "grid.slice", {"farm_load", "incentives", "budget"});
      double v = 0.0;
      if (s.contains("farm_load")) read(s, "farm_load", v, "grid.slice"), c.grid.slice_load = v;
      if (s.contains("incentives")) read(s, "incentives", v, "grid.slice"), c.grid.slice_incentives = v;
      if (s.contains("budget")) read(s, "budget", v, "grid.slice"), c.grid.slice_budget = v;
    }
  }
  return c;
}

void validate(const TrainConfig& cfg) {
  if (cfg.episodes < 1) throw InvalidArgument("episodes must be >= 1");
  validate(cfg.env);
  validate(cfg.agent);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    auto cfg = experiment_config_from_json(j);
    validate(cfg.train);
    if (cfg.grid.points < 1) throw ConfigError("grid.points must be >= 1");
    return cfg;
  } catch (const InvalidArgument& e) {
    throw ConfigError("config file '" + path.string() + "': " + e.what());
  }
}

std::optional<std::filesystem::path> resolve_config_path(const std::string& flag_value) {
  if (!flag_value.empty()) return std::filesystem::path(flag_value);
  if (const char* env = std::getenv("PV_ADVISOR_CONFIG"); env && *env) return std::filesystem::path(env);
  return std::nullopt;
}

std::string config_hash(const TrainConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pvdqn
