#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pvdqn/config.hpp"
#include "pvdqn/report.hpp"
#include "pvdqn/rl.hpp"
#include "pvdqn/trainer.hpp"

namespace httplib {
class Server;
}

namespace pvdqn {

struct Recommendation {
  Action action = Action::DontInstall;
  double q_dont_install = 0.0;
  double q_install = 0.0;
};

/// {"action": "Install" | "Don't Install", "q_dont_install": x, "q_install": y}
nlohmann::json to_json(const Recommendation& r);

/// Parses a non-negative finite decimal; throws InvalidArgument naming `what`.
double parse_quantity(const std::string& text, const std::string& what);

enum class GridMode { Map, Surface };

/// Builds a grid from textual axis and fix specs.
///
/// An axis is "name", "name:points" or "name:min:max:points"; a fix is "name=value".
/// Without any axis, Map mode sweeps all three variables and Surface mode sweeps
/// budget x farm_load. Unswept variables sit at the configured slice.
GridSpec parse_grid(const std::vector<std::string>& axes, const std::vector<std::string>& fixes,
                    const EnvConfig& cfg, const GridDefaults& defaults, GridMode mode);

/// A frozen checkpoint plus everything needed to answer advisor queries. Read-only after
/// construction, so one instance can serve concurrent requests.
class AdvisorService {
 public:
  AdvisorService(const Checkpoint& ckpt, GridDefaults grid = {}, std::vector<EpisodeRecord> curve = {});

  Recommendation recommend(const State& state) const;
  nlohmann::json health() const;
  nlohmann::json map(const GridSpec& grid) const;
  nlohmann::json surface(const GridSpec& grid, Action action) const;
  nlohmann::json curve() const;

  const EnvConfig& env_config() const { return env_; }
  const GridDefaults& grid_defaults() const { return grid_; }
  const DqnAgent& agent() const { return agent_; }

 private:
  DqnAgent agent_;
  EnvConfig env_;
  GridDefaults grid_;
  std::vector<EpisodeRecord> curve_;
  int version_;
  std::string hash_;
};

/// Registers the GET /api/* routes on `server`.
void mount_api(httplib::Server& server, const AdvisorService& service);

}  // namespace pvdqn
