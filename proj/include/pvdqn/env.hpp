#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "pvdqn/random.hpp"

namespace pvdqn {

/// An investor's situation: farm load (kW), government incentives and installation budget
/// (currency units).
struct State {
  double farm_load = 0.0;
  double incentives = 0.0;
  double budget = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

/// Integer codes are part of the checkpoint and API contract.
enum class Action : std::size_t { DontInstall = 0, Install = 1 };

inline constexpr std::size_t kActionCount = 2;

inline std::size_t index(Action a) { return static_cast<std::size_t>(a); }
Action action_from_index(std::size_t i);
/// "Install" / "Don't Install".
std::string label(Action a);

struct Range {
  double min = 0.0;
  double max = 0.0;

  double mean() const { return 0.5 * (min + max); }
  double width() const { return max - min; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Every parameter of the stochastic farm model. All draws are uniform over the ranges.
struct EnvConfig {
  Range load_range{0.0, 20.0};           // kW
  Range incentive_range{0.0, 4000.0};    // currency
  Range budget_range{0.0, 10000.0};      // currency
  Range price_range{0.1, 0.3};           // currency / kWh
  double system_cost = 7500.0;           // currency
  double pv_capacity_kw = 10.0;          // kW nameplate
  Range capacity_factor_range{0.1, 0.3};
  double infeasible_penalty = 5.0;
  std::size_t horizon = 24;
  std::uint64_t seed = 42;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

/// Throws InvalidArgument naming the first offending field.
void validate(const EnvConfig& cfg);

struct StepOutcome {
  State next_state;
  double reward = 0.0;
  bool done = false;
  // Exogenous draws of this step, exposed for trajectory taps.
  double price = 0.0;
  double pv_power = 0.0;
};

/// PV output in kW for a capacity factor in [0, 1].
double pv_generation(const EnvConfig& cfg, double capacity_factor);

/// System price net of incentives, never negative.
double effective_cost(const EnvConfig& cfg, const State& state);

bool is_feasible(const EnvConfig& cfg, const State& state);

/// Per-step reward: the farm pays for the load not covered by PV at the current price.
/// Not installing leaves PV at zero. Installing without the budget to cover the effective
/// cost deploys nothing and costs `infeasible_penalty` on top.
double reward(const State& state, Action action, double price, double pv_power, const EnvConfig& cfg);

/// Maps each field affinely from its configured range onto [0, 1]; a degenerate range maps to 0.5.
Eigen::Vector3d normalize_state(const State& state, const EnvConfig& cfg);
State denormalize_state(const Eigen::Vector3d& x, const EnvConfig& cfg);

State sample_state(const EnvConfig& cfg, Rng& rng);

/// Episodic farm-PV environment. Next states are i.i.d. draws independent of the action.
class Environment {
 public:
  explicit Environment(EnvConfig cfg);

  State reset();
  StepOutcome step(Action action);

  const EnvConfig& config() const { return cfg_; }
  const State& state() const { return state_; }
  std::size_t step_index() const { return step_; }
  bool done() const { return done_; }

 private:
  EnvConfig cfg_;
  Rng rng_;
  State state_;
  std::size_t step_ = 0;
  bool done_ = true;
};

}  // namespace pvdqn
