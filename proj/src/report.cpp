#include "pvdqn/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pvdqn/error.hpp"
#include "pvdqn/trainer.hpp"

namespace pvdqn {

using nlohmann::json;

const char* name(StateVar v) {
  switch (v) {
    case StateVar::FarmLoad:
      return "farm_load";
    case StateVar::Incentives:
      return "incentives";
    case StateVar::Budget:
      return "budget";
  }
  return "?";
}

StateVar state_var_from_string(const std::string& s) {
  if (s == "farm_load" || s == "load") return StateVar::FarmLoad;
  if (s == "incentives") return StateVar::Incentives;
  if (s == "budget") return StateVar::Budget;
  throw InvalidArgument("unknown state variable '" + s + "'");
}

double get(const State& s, StateVar v) {
  switch (v) {
    case StateVar::FarmLoad:
      return s.farm_load;
    case StateVar::Incentives:
      return s.incentives;
    case StateVar::Budget:
      return s.budget;
  }
  return 0.0;
}

void set(State& s, StateVar v, double value) {
  switch (v) {
    case StateVar::FarmLoad:
      s.farm_load = value;
      break;
    case StateVar::Incentives:
      s.incentives = value;
      break;
    case StateVar::Budget:
      s.budget = value;
      break;
  }
}

const Range& range_of(const EnvConfig& cfg, StateVar v) {
  switch (v) {
    case StateVar::FarmLoad:
      return cfg.load_range;
    case StateVar::Incentives:
      return cfg.incentive_range;
    case StateVar::Budget:
      break;
  }
  return cfg.budget_range;
}

double Axis::value(std::size_t i) const {
  if (points <= 1) return min;
  if (i + 1 == points) return max;
  return min + double(i) * (max - min) / double(points - 1);
}

std::vector<StateVar> GridSpec::swept() const {
  std::vector<StateVar> out;
  for (auto v : kStateVars)
    if (sweep[std::size_t(v)]) out.push_back(v);
  return out;
}

std::size_t GridSpec::cardinality() const {
  std::size_t n = 1;
  for (const auto& a : sweep)
    if (a) n *= a->points;
  return n;
}

void GridSpec::validate() const {
  for (auto v : kStateVars) {
    const auto& a = sweep[std::size_t(v)];
    if (!a) {
      if (!std::isfinite(get(slice, v)) || get(slice, v) < 0.0)
        throw InvalidArgument(std::string("grid: slice value for ") + name(v) + " must be finite and >= 0");
      continue;
    }
    if (a->points < 1) throw InvalidArgument(std::string("grid: ") + name(v) + " needs at least one point");
    if (!std::isfinite(a->min) || !std::isfinite(a->max) || a->min > a->max || a->min < 0.0)
      throw InvalidArgument(std::string("grid: ") + name(v) + " needs finite 0 <= min <= max");
  }
}

std::vector<State> GridSpec::states() const {
  validate();
  auto count = [&](StateVar v) { return sweep[std::size_t(v)] ? sweep[std::size_t(v)]->points : std::size_t{1}; };
  auto value = [&](StateVar v, std::size_t i) {
    return sweep[std::size_t(v)] ? sweep[std::size_t(v)]->value(i) : get(slice, v);
  };
  std::vector<State> out;
  out.reserve(cardinality());
  for (std::size_t i = 0; i < count(StateVar::FarmLoad); ++i)
    for (std::size_t j = 0; j < count(StateVar::Incentives); ++j)
      for (std::size_t k = 0; k < count(StateVar::Budget); ++k)
        out.push_back({value(StateVar::FarmLoad, i), value(StateVar::Incentives, j), value(StateVar::Budget, k)});
  return out;
}

State default_slice(const EnvConfig& cfg, const GridDefaults& d) {
  return {d.slice_load.value_or(cfg.load_range.mean()), d.slice_incentives.value_or(cfg.incentive_range.mean()),
          d.slice_budget.value_or(cfg.budget_range.mean())};
}

GridSpec default_grid(const EnvConfig& cfg, const GridDefaults& d) {
  GridSpec g;
  g.slice = default_slice(cfg, d);
  for (auto v : kStateVars) g.sweep[std::size_t(v)] = Axis{range_of(cfg, v).min, range_of(cfg, v).max, d.points};
  return g;
}

GridSpec surface_grid(const EnvConfig& cfg, StateVar first, StateVar second, const GridDefaults& d) {
  if (first == second) throw InvalidArgument("surface axes must be two different variables");
  GridSpec g;
  g.slice = default_slice(cfg, d);
  for (auto v : {first, second}) g.sweep[std::size_t(v)] = Axis{range_of(cfg, v).min, range_of(cfg, v).max, d.points};
  return g;
}

double expected_reward(const EnvConfig& cfg, const State& state, Action action) {
  const double price = cfg.price_range.mean();
  if (action == Action::DontInstall) return -price * state.farm_load;
  if (is_feasible(cfg, state)) return -price * (state.farm_load - cfg.pv_capacity_kw * cfg.capacity_factor_range.mean());
  return -price * state.farm_load - cfg.infeasible_penalty;
}

DecisionMap oracle_policy(const EnvConfig& cfg, const GridSpec& grid) {
  DecisionMap map{grid, {}};
  for (const auto& s : grid.states()) {
    const std::array<double, 2> q{expected_reward(cfg, s, Action::DontInstall), expected_reward(cfg, s, Action::Install)};
    map.entries.push_back({s, greedy_action(q), q});
  }
  return map;
}

DecisionMap decision_map(const DqnAgent& agent, const GridSpec& grid, const EnvConfig& cfg) {
  DecisionMap map{grid, {}};
  for (const auto& s : grid.states()) {
    const auto q = agent.q_values(s, cfg);
    map.entries.push_back({s, greedy_action(q), q});
  }
  return map;
}

double policy_agreement(const DecisionMap& a, const DecisionMap& b) {
  if (a.entries.size() != b.entries.size() || a.entries.empty())
    throw InvalidArgument("policy_agreement: maps cover different grids");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    if (!(a.entries[i].state == b.entries[i].state))
      throw InvalidArgument("policy_agreement: maps cover different grids");
    same += a.entries[i].action == b.entries[i].action;
  }
  return double(same) / double(a.entries.size());
}

QSurface q_surface(const DqnAgent& agent, const GridSpec& grid, Action action, const EnvConfig& cfg) {
  const auto vars = grid.swept();
  if (vars.size() != 2)
    throw InvalidArgument("q_surface needs exactly 2 swept variables, got " + std::to_string(vars.size()));
  QSurface out;
  out.vars = {vars[0], vars[1]};
  out.axes = {*grid.sweep[std::size_t(vars[0])], *grid.sweep[std::size_t(vars[1])]};
  out.slice = grid.slice;
  out.action = action;
  out.values.resize(Eigen::Index(out.axes[0].points), Eigen::Index(out.axes[1].points));
  // grid.states() is row-major in canonical variable order, which matches (vars[0], vars[1]).
  const auto states = grid.states();
  for (std::size_t i = 0; i < states.size(); ++i)
    out.values(Eigen::Index(i / out.axes[1].points), Eigen::Index(i % out.axes[1].points)) =
        agent.q_values(states[i], cfg)[index(action)];
  return out;
}

void write_decision_map_csv(std::ostream& out, const DecisionMap& map) {
  out << kDecisionMapHeader << '\n';
  for (const auto& e : map.entries) {
    out << format_double(e.state.farm_load) << ',' << format_double(e.state.incentives) << ','
        << format_double(e.state.budget) << ',' << action_key(e.action) << ',' << format_double(e.q[0]) << ','
        << format_double(e.q[1]) << '\n';
  }
}

std::string action_key(Action a) { return a == Action::Install ? "install" : "dont_install"; }

Action action_from_key(const std::string& s) {
  if (s == "install" || s == "Install" || s == "1") return Action::Install;
  if (s == "dont_install" || s == "Don't Install" || s == "0") return Action::DontInstall;
  throw InvalidArgument("unknown action '" + s + "'");
}

namespace {

json axis_json(StateVar v, const Axis& a) {
  std::vector<double> values;
  for (std::size_t i = 0; i < a.points; ++i) values.push_back(a.value(i));
  return {{"name", name(v)}, {"min", a.min}, {"max", a.max}, {"points", a.points}, {"values", values}};
}

}  // namespace

json decision_map_to_json(const DecisionMap& map) {
  json axes = json::array();
  json slice = json::object();
  for (auto v : kStateVars) {
    if (map.grid.sweep[std::size_t(v)])
      axes.push_back(axis_json(v, *map.grid.sweep[std::size_t(v)]));
    else
      slice[name(v)] = get(map.grid.slice, v);
  }
  json entries = json::array();
  for (const auto& e : map.entries) {
    entries.push_back({{"farm_load", e.state.farm_load},
                       {"incentives", e.state.incentives},
                       {"budget", e.state.budget},
                       {"action", label(e.action)},
                       {"q_dont_install", e.q[0]},
                       {"q_install", e.q[1]}});
  }
  return {{"axes", axes}, {"slice", slice}, {"entries", entries}};
}

json q_surface_to_json(const QSurface& s) {
  json slice = json::object();
  for (auto v : kStateVars)
    if (v != s.vars[0] && v != s.vars[1]) slice[name(v)] = get(s.slice, v);
  std::vector<double> values(s.values.data(), s.values.data() + s.values.size());
  return {{"axes", json::array({axis_json(s.vars[0], s.axes[0]), axis_json(s.vars[1], s.axes[1])})},
          {"slice", slice},
          {"action", action_key(s.action)},
          {"rows", s.values.rows()},
          {"cols", s.values.cols()},
          {"values", values}};
}

// ---------------------------------------------------------------------------
// Tabular baseline

QTable::QTable(std::size_t state_count) : values_(state_count, {0.0, 0.0}) {
  if (state_count == 0) throw InvalidArgument("QTable needs at least one state");
}

QTable QTable::discretized(const EnvConfig& cfg, std::size_t bins_per_axis) {
  if (bins_per_axis == 0) throw InvalidArgument("bins_per_axis must be >= 1");
  QTable t(bins_per_axis * bins_per_axis * bins_per_axis);
  t.bins_per_axis_ = bins_per_axis;
  t.ranges_ = {cfg.load_range, cfg.incentive_range, cfg.budget_range};
  return t;
}

std::size_t QTable::bin(const State& s) const {
  if (bins_per_axis_ == 0) throw IllegalState("QTable::bin needs a discretized table");
  std::size_t idx = 0;
  for (auto v : kStateVars) {
    const auto& r = ranges_[std::size_t(v)];
    std::size_t b = 0;
    if (r.max > r.min) {
      const double u = (get(s, v) - r.min) / (r.max - r.min);
      b = std::size_t(std::clamp(std::floor(u * double(bins_per_axis_)), 0.0, double(bins_per_axis_ - 1)));
    }
    idx = idx * bins_per_axis_ + b;
  }
  return idx;
}

std::vector<double> QTable::boundaries(StateVar v) const {
  if (bins_per_axis_ == 0) throw IllegalState("QTable::boundaries needs a discretized table");
  const auto& r = ranges_[std::size_t(v)];
  std::vector<double> out;
  for (std::size_t i = 0; i <= bins_per_axis_; ++i) out.push_back(r.min + double(i) * r.width() / double(bins_per_axis_));
  return out;
}

double QTable::at(std::size_t s, Action a) const {
  if (s >= values_.size()) throw InvalidArgument("QTable: state index out of range");
  return values_[s][index(a)];
}

double& QTable::at(std::size_t s, Action a) {
  if (s >= values_.size()) throw InvalidArgument("QTable: state index out of range");
  return values_[s][index(a)];
}

std::array<double, 2> QTable::row(std::size_t s) const {
  if (s >= values_.size()) throw InvalidArgument("QTable: state index out of range");
  return values_[s];
}

void tabular_q_update(QTable& table, std::size_t s, Action a, double r, std::size_t s_next, bool done, double eta,
                      double gamma) {
  if (s >= table.state_count() || s_next >= table.state_count())
    throw InvalidArgument("tabular_q_update: invalid state bin");
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("tabular_q_update: eta must lie in [0, 1]");
  const auto next = table.row(s_next);
  const double bootstrap = done ? 0.0 : gamma * std::max(next[0], next[1]);
  double& q = table.at(s, a);
  q += eta * (r + bootstrap - q);
}

QTable train_tabular(const EnvConfig& cfg, const TabularOptions& opts) {
  EnvConfig env_cfg = cfg;
  env_cfg.seed = derive_seed(opts.seed, "tabular-env");
  Environment env(env_cfg);
  Rng rng(derive_seed(opts.seed, "tabular-explore"));
  QTable table = QTable::discretized(cfg, opts.bins_per_axis);
  State s = env.reset();
  for (std::size_t t = 0; t < opts.steps; ++t) {
    const std::size_t sb = table.bin(s);
    const Action a = rng.bernoulli(opts.epsilon) ? action_from_index(std::size_t(rng.below(kActionCount)))
                                                 : greedy_action(table.row(sb));
    const StepOutcome out = env.step(a);
    tabular_q_update(table, sb, a, out.reward, table.bin(out.next_state), out.done, opts.eta, opts.gamma);
    s = out.done ? env.reset() : out.next_state;
  }
  return table;
}

DecisionMap tabular_decision_map(const QTable& table, const GridSpec& grid) {
  DecisionMap map{grid, {}};
  for (const auto& s : grid.states()) {
    const auto q = table.row(table.bin(s));
    map.entries.push_back({s, greedy_action(q), q});
  }
  return map;
}

}  // namespace pvdqn
