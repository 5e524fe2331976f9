#include "pvdqn/env.hpp"

#include <algorithm>
#include <cmath>

#include "pvdqn/error.hpp"

namespace pvdqn {

namespace {

void check_range(const Range& r, const char* name, double lo = 0.0, double hi = HUGE_VAL) {
  if (!std::isfinite(r.min) || !std::isfinite(r.max)) throw InvalidArgument(std::string(name) + ": non-finite bound");
  if (r.min > r.max) throw InvalidArgument(std::string(name) + ": min exceeds max");
  if (r.min < lo || r.max > hi) throw InvalidArgument(std::string(name) + ": bounds outside the allowed domain");
}

void check_nonneg(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) throw InvalidArgument(std::string(name) + " must be finite and >= 0");
}

void check_state(const State& s) {
  check_nonneg(s.farm_load, "farm_load");
  check_nonneg(s.incentives, "incentives");
  check_nonneg(s.budget, "budget");
}

double to_unit(double v, const Range& r) { return r.min == r.max ? 0.5 : (v - r.min) / (r.max - r.min); }

double from_unit(double u, const Range& r) { return r.min == r.max ? r.min : r.min + u * (r.max - r.min); }

}  // namespace

Action action_from_index(std::size_t i) {
  if (i >= kActionCount) throw InvalidArgument("action index " + std::to_string(i) + " out of range");
  return static_cast<Action>(i);
}

std::string label(Action a) { return a == Action::Install ? "Install" : "Don't Install"; }

void validate(const EnvConfig& cfg) {
  check_range(cfg.load_range, "load_range");
  check_range(cfg.incentive_range, "incentive_range");
  check_range(cfg.budget_range, "budget_range");
  check_range(cfg.price_range, "price_range");
  check_range(cfg.capacity_factor_range, "capacity_factor_range", 0.0, 1.0);
  check_nonneg(cfg.system_cost, "system_cost");
  check_nonneg(cfg.pv_capacity_kw, "pv_capacity_kw");
  check_nonneg(cfg.infeasible_penalty, "infeasible_penalty");
  if (cfg.horizon < 1) throw InvalidArgument("horizon must be >= 1");
}

double pv_generation(const EnvConfig& cfg, double capacity_factor) {
  if (!(capacity_factor >= 0.0 && capacity_factor <= 1.0))
    throw InvalidArgument("capacity factor must lie in [0, 1]");
  return cfg.pv_capacity_kw * capacity_factor;
}

double effective_cost(const EnvConfig& cfg, const State& state) {
  return std::max(0.0, cfg.system_cost - state.incentives);
}

bool is_feasible(const EnvConfig& cfg, const State& state) { return state.budget >= effective_cost(cfg, state); }

double reward(const State& state, Action action, double price, double pv_power, const EnvConfig& cfg) {
  check_state(state);
  check_nonneg(price, "price");
  check_nonneg(pv_power, "pv_power");
  if (action == Action::DontInstall) return -price * state.farm_load;
  if (is_feasible(cfg, state)) return -price * (state.farm_load - pv_power);
  return -price * state.farm_load - cfg.infeasible_penalty;
}

Eigen::Vector3d normalize_state(const State& state, const EnvConfig& cfg) {
  return {to_unit(state.farm_load, cfg.load_range), to_unit(state.incentives, cfg.incentive_range),
          to_unit(state.budget, cfg.budget_range)};
}

State denormalize_state(const Eigen::Vector3d& x, const EnvConfig& cfg) {
  return {from_unit(x[0], cfg.load_range), from_unit(x[1], cfg.incentive_range), from_unit(x[2], cfg.budget_range)};
}

State sample_state(const EnvConfig& cfg, Rng& rng) {
  State s;
  s.farm_load = rng.uniform(cfg.load_range.min, cfg.load_range.max);
  s.incentives = rng.uniform(cfg.incentive_range.min, cfg.incentive_range.max);
  s.budget = rng.uniform(cfg.budget_range.min, cfg.budget_range.max);
  return s;
}

Environment::Environment(EnvConfig cfg) : cfg_(cfg), rng_(cfg.seed) { validate(cfg_); }

State Environment::reset() {
  state_ = sample_state(cfg_, rng_);
  step_ = 0;
  done_ = false;
  return state_;
}

StepOutcome Environment::step(Action action) {
  if (done_) throw IllegalState("step called on a terminated episode; call reset() first");
  StepOutcome out;
  out.price = rng_.uniform(cfg_.price_range.min, cfg_.price_range.max);
  const double cf = rng_.uniform(cfg_.capacity_factor_range.min, cfg_.capacity_factor_range.max);
  out.pv_power = pv_generation(cfg_, cf);
  out.reward = reward(state_, action, out.price, out.pv_power, cfg_);
  out.next_state = sample_state(cfg_, rng_);
  ++step_;
  out.done = step_ >= cfg_.horizon;
  done_ = out.done;
  state_ = out.next_state;
  return out;
}

}  // namespace pvdqn
