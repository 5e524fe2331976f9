#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pvdqn/config.hpp"
#include "pvdqn/env.hpp"
#include "pvdqn/mlp.hpp"
#include "pvdqn/rl.hpp"

namespace pvdqn {

enum class StateVar : std::size_t { FarmLoad = 0, Incentives = 1, Budget = 2 };

inline constexpr std::array<StateVar, 3> kStateVars{StateVar::FarmLoad, StateVar::Incentives, StateVar::Budget};

/// "farm_load", "incentives", "budget".
const char* name(StateVar v);
/// Accepts the canonical names plus "load".
StateVar state_var_from_string(const std::string& s);
double get(const State& s, StateVar v);
void set(State& s, StateVar v, double value);
const Range& range_of(const EnvConfig& cfg, StateVar v);

struct Axis {
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 1;

  /// i-th of `points` evenly spaced values; a single point sits at `min`.
  double value(std::size_t i) const;
  friend bool operator==(const Axis&, const Axis&) = default;
};

/// Swept variables take evenly spaced values; the rest stay at `slice`.
struct GridSpec {
  std::array<std::optional<Axis>, 3> sweep;
  State slice;

  std::vector<StateVar> swept() const;
  std::size_t cardinality() const;
  /// States in row-major order: farm_load outermost, budget innermost.
  std::vector<State> states() const;
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Range midpoints, overridden by any slice values in the defaults.
State default_slice(const EnvConfig& cfg, const GridDefaults& defaults = {});
/// All three variables swept over their configured ranges.
GridSpec default_grid(const EnvConfig& cfg, const GridDefaults& defaults = {});
/// Two variables swept over their configured ranges, the third fixed at the slice.
GridSpec surface_grid(const EnvConfig& cfg, StateVar first, StateVar second, const GridDefaults& defaults = {});

struct DecisionEntry {
  State state;
  Action action = Action::DontInstall;
  std::array<double, 2> q{};  // [DontInstall, Install]
};

struct DecisionMap {
  GridSpec grid;
  std::vector<DecisionEntry> entries;
};

/// Exact expected one-step reward under the uniform sampling model.
double expected_reward(const EnvConfig& cfg, const State& state, Action action);

/// Ground-truth policy: argmax of expected one-step reward (ties to DontInstall). The stored
/// "Q-values" are the two expected rewards.
DecisionMap oracle_policy(const EnvConfig& cfg, const GridSpec& grid);

/// Greedy DQN decisions and Q-values at every grid state.
DecisionMap decision_map(const DqnAgent& agent, const GridSpec& grid, const EnvConfig& cfg);

/// Fraction of grid points where both maps choose the same action.
double policy_agreement(const DecisionMap& a, const DecisionMap& b);

struct QSurface {
  std::array<StateVar, 2> vars{};
  std::array<Axis, 2> axes{};
  State slice;
  Action action = Action::Install;
  RowMatrix<double> values;  // axes[0].points x axes[1].points
};

/// Q(s, action) over a grid with exactly two swept variables.
QSurface q_surface(const DqnAgent& agent, const GridSpec& grid, Action action, const EnvConfig& cfg);

// Exports
inline constexpr const char* kDecisionMapHeader = "farm_load,incentives,budget,action,q_dont_install,q_install";
void write_decision_map_csv(std::ostream& out, const DecisionMap& map);
nlohmann::json decision_map_to_json(const DecisionMap& map);
nlohmann::json q_surface_to_json(const QSurface& surface);
/// "install" / "dont_install" wire names.
std::string action_key(Action a);
Action action_from_key(const std::string& s);

/// Tabular action values over a finite state index set.
class QTable {
 public:
  explicit QTable(std::size_t state_count);

  /// 10 uniform bins per state variable over the configured ranges by default.
  static QTable discretized(const EnvConfig& cfg, std::size_t bins_per_axis = 10);

  std::size_t state_count() const { return values_.size(); }
  std::size_t bins_per_axis() const { return bins_per_axis_; }

  /// Bin index of a state; only for discretized tables. Values outside a range clamp to the
  /// edge bin.
  std::size_t bin(const State& s) const;
  /// Lower edges of the bins of one variable, plus the upper range end.
  std::vector<double> boundaries(StateVar v) const;

  double at(std::size_t s, Action a) const;
  double& at(std::size_t s, Action a);
  std::array<double, 2> row(std::size_t s) const;

 private:
  std::vector<std::array<double, 2>> values_;
  std::size_t bins_per_axis_ = 0;
  std::array<Range, 3> ranges_{};
};

/// Q(s,a) += eta [r + gamma max_a' Q(s',a') - Q(s,a)], bootstrap dropped when done.
void tabular_q_update(QTable& table, std::size_t s, Action a, double r, std::size_t s_next, bool done, double eta,
                      double gamma);

struct TabularOptions {
  std::size_t bins_per_axis = 10;
  std::size_t steps = 200000;
  double eta = 0.1;
  double gamma = 0.99;
  double epsilon = 1.0;  // behaviour policy exploration rate
  std::uint64_t seed = 7;
};

/// Tabular Q-learning on the environment; a baseline for the DQN decision map.
QTable train_tabular(const EnvConfig& cfg, const TabularOptions& opts);
DecisionMap tabular_decision_map(const QTable& table, const GridSpec& grid);

}  // namespace pvdqn
