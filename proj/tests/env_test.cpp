#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "pvdqn/env.hpp"
#include "pvdqn/error.hpp"

using namespace pvdqn;

namespace {

EnvConfig degenerate_config() {
  EnvConfig cfg;
  cfg.load_range = {5, 5};
  cfg.incentive_range = {0, 0};
  cfg.budget_range = {1000, 1000};
  cfg.price_range = {0.2, 0.2};
  cfg.capacity_factor_range = {0.25, 0.25};
  return cfg;
}

// Cost 8000 leaves an effective cost of 6000 with 2000 of incentives.
EnvConfig reward_config() {
  EnvConfig cfg;
  cfg.system_cost = 8000;
  cfg.infeasible_penalty = 5;
  return cfg;
}

}  // namespace

TEST(Reset, DegenerateRangesGiveExactState) {
  Environment env(degenerate_config());
  const State s = env.reset();
  EXPECT_EQ(s, (State{5, 0, 1000}));
  EXPECT_EQ(env.step_index(), 0u);
  EXPECT_FALSE(env.done());
}

TEST(Reset, DeterministicForSeedAndResetIndex) {
  EnvConfig cfg;
  cfg.seed = 99;
  Environment a(cfg), b(cfg);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(a.reset(), b.reset());
  EnvConfig other = cfg;
  other.seed = 100;
  Environment c(other);
  Environment d(cfg);
  EXPECT_NE(c.reset(), d.reset());
}

TEST(Reset, UniformLoadMeanMonteCarlo) {
  EnvConfig cfg;
  cfg.load_range = {0, 10};
  cfg.seed = 5;
  Environment env(cfg);
  double sum = 0;
  for (int i = 0; i < 10000; ++i) sum += env.reset().farm_load;
  const double mean = sum / 10000;
  EXPECT_GE(mean, 4.8);
  EXPECT_LE(mean, 5.2);
}

TEST(PvGeneration, NameplateTimesCapacityFactor) {
  EnvConfig cfg;
  cfg.pv_capacity_kw = 10;
  EXPECT_EQ(pv_generation(cfg, 0.0), 0.0);
  EXPECT_EQ(pv_generation(cfg, 0.25), 2.5);
  cfg.pv_capacity_kw = 0;
  EXPECT_EQ(pv_generation(cfg, 0.7), 0.0);
  EXPECT_THROW(pv_generation(cfg, 1.5), InvalidArgument);
  EXPECT_THROW(pv_generation(cfg, -0.1), InvalidArgument);
}

TEST(EffectiveCost, SubtractsIncentivesAndClamps) {
  EnvConfig cfg;
  cfg.system_cost = 8000;
  EXPECT_EQ(effective_cost(cfg, {0, 2000, 0}), 6000);
  EXPECT_EQ(effective_cost(cfg, {0, 0, 0}), 8000);
  EXPECT_EQ(effective_cost(cfg, {0, 10000, 0}), 0);
}

TEST(Reward, WorkedExamples) {
  const EnvConfig cfg = reward_config();
  EXPECT_DOUBLE_EQ(reward({10, 2000, 9000}, Action::DontInstall, 0.2, 8, cfg), -2.0);
  EXPECT_DOUBLE_EQ(reward({10, 2000, 9000}, Action::Install, 0.2, 8, cfg), -0.4);
  EXPECT_DOUBLE_EQ(reward({10, 2000, 5000}, Action::Install, 0.2, 8, cfg), -7.0);
}

TEST(Reward, PositiveWhenPvExceedsLoad) {
  EXPECT_GT(reward({2, 2000, 9000}, Action::Install, 0.2, 8, reward_config()), 0.0);
}

TEST(Reward, RejectsNegativeInputs) {
  const EnvConfig cfg = reward_config();
  EXPECT_THROW(reward({10, 0, 0}, Action::Install, -0.1, 1, cfg), InvalidArgument);
  EXPECT_THROW(reward({10, 0, 0}, Action::Install, 0.1, -1, cfg), InvalidArgument);
  EXPECT_THROW(reward({-1, 0, 0}, Action::DontInstall, 0.1, 1, cfg), InvalidArgument);
}

TEST(Reward, SignAndOrderingProperties) {
  EnvConfig cfg;
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const State s{rng.uniform(0, 30), rng.uniform(0, 9000), rng.uniform(0, 12000)};
    const double price = rng.uniform(0, 0.5);
    const double pv = rng.below(4) == 0 ? 0.0 : rng.uniform(0, 10);
    const double dont = reward(s, Action::DontInstall, price, pv, cfg);
    EXPECT_LE(dont, 0.0);
    if (is_feasible(cfg, s) && price > 0) {
      EXPECT_EQ(reward(s, Action::Install, price, pv, cfg) > dont, pv > 0.0);
    }
  }
}

TEST(Reward, MoreIncentivesNeverLowerInstallReward) {
  EnvConfig cfg;
  Rng rng(23);
  for (int i = 0; i < 2000; ++i) {
    State s{rng.uniform(0, 20), rng.uniform(0, 4000), rng.uniform(0, 10000)};
    const double price = rng.uniform(0, 0.5);
    const double pv = rng.uniform(0, 5);
    const double before = reward(s, Action::Install, price, pv, cfg);
    s.incentives += rng.uniform(0, 5000);
    EXPECT_GE(reward(s, Action::Install, price, pv, cfg), before);
  }
}

TEST(Step, HorizonOneEndsImmediately) {
  EnvConfig cfg = degenerate_config();
  cfg.horizon = 1;
  Environment env(cfg);
  env.reset();
  EXPECT_TRUE(env.step(Action::Install).done);
  EXPECT_THROW(env.step(Action::Install), IllegalState);
}

TEST(Step, BeforeResetIsIllegal) {
  Environment env(EnvConfig{});
  EXPECT_THROW(env.step(Action::DontInstall), IllegalState);
}

TEST(Step, DegenerateRangesMatchRewardFunction) {
  EnvConfig cfg = degenerate_config();
  cfg.system_cost = 800;
  Environment env(cfg);
  env.reset();
  const auto install = env.step(Action::Install);
  EXPECT_DOUBLE_EQ(install.reward, -0.2 * (5 - 2.5));
  EXPECT_EQ(install.pv_power, 2.5);
  EXPECT_EQ(install.next_state, (State{5, 0, 1000}));
  EXPECT_DOUBLE_EQ(env.step(Action::DontInstall).reward, -1.0);
}

TEST(Step, EpisodeHasExactlyHorizonSteps) {
  for (std::size_t h : {1u, 3u, 24u}) {
    EnvConfig cfg;
    cfg.horizon = h;
    Environment env(cfg);
    for (int ep = 0; ep < 3; ++ep) {
      env.reset();
      std::size_t n = 0;
      bool done = false;
      while (!done) {
        done = env.step(n % 2 ? Action::Install : Action::DontInstall).done;
        ++n;
        EXPECT_EQ(done, n == h);
      }
      EXPECT_EQ(n, h);
    }
  }
}

TEST(Step, IdenticalConfigsGiveIdenticalTrajectories) {
  EnvConfig cfg;
  cfg.seed = 1234;
  Environment a(cfg), b(cfg);
  Rng actions(5);
  for (int ep = 0; ep < 4; ++ep) {
    EXPECT_EQ(a.reset(), b.reset());
    bool done = false;
    while (!done) {
      const Action act = action_from_index(actions.below(2));
      const auto x = a.step(act);
      const auto y = b.step(act);
      EXPECT_EQ(x.reward, y.reward);
      EXPECT_EQ(x.next_state, y.next_state);
      done = x.done;
    }
  }
}

// With load/incentives/budget pinned, E[r | Install, feasible] = -E[price] (load - cap E[cf]).
TEST(Step, InstallMeanRewardMatchesClosedForm) {
  EnvConfig cfg;
  cfg.load_range = {10, 10};
  cfg.incentive_range = {2000, 2000};
  cfg.budget_range = {9000, 9000};
  cfg.price_range = {0.1, 0.3};
  cfg.capacity_factor_range = {0.1, 0.3};
  cfg.pv_capacity_kw = 10;
  cfg.horizon = 10000;
  cfg.seed = 8;
  Environment env(cfg);
  env.reset();
  double sum = 0;
  for (int i = 0; i < 10000; ++i) sum += env.step(Action::Install).reward;
  const double expected = -0.2 * (10 - 10 * 0.2);
  EXPECT_NEAR(sum / 10000, expected, 0.02 * std::abs(expected));
}

TEST(NormalizeState, AffineMapAndDegenerateRanges) {
  EnvConfig cfg;
  cfg.load_range = {0, 20};
  EXPECT_EQ(normalize_state({20, 0, 0}, cfg)[0], 1.0);
  EXPECT_EQ(normalize_state({10, 0, 0}, cfg)[0], 0.5);
  cfg.incentive_range = {3, 3};
  EXPECT_EQ(normalize_state({10, 3, 0}, cfg)[1], 0.5);
}

TEST(NormalizeState, RoundTripAndUnitImage) {
  EnvConfig cfg;
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const State s = sample_state(cfg, rng);
    const Eigen::Vector3d x = normalize_state(s, cfg);
    EXPECT_GE(x.minCoeff(), 0.0);
    EXPECT_LE(x.maxCoeff(), 1.0);
    const State back = denormalize_state(x, cfg);
    EXPECT_NEAR(back.farm_load, s.farm_load, 1e-12);
    EXPECT_NEAR(back.incentives, s.incentives, 1e-12 * cfg.incentive_range.max);
    EXPECT_NEAR(back.budget, s.budget, 1e-12 * cfg.budget_range.max);
  }
}

TEST(EnvConfig, ValidationRejectsBadRanges) {
  EnvConfig cfg;
  cfg.load_range = {5, 1};
  EXPECT_THROW(validate(cfg), InvalidArgument);
  cfg = {};
  cfg.capacity_factor_range = {0.5, 1.5};
  EXPECT_THROW(validate(cfg), InvalidArgument);
  cfg = {};
  cfg.horizon = 0;
  EXPECT_THROW(Environment{cfg}, InvalidArgument);
  cfg = {};
  cfg.infeasible_penalty = -1;
  EXPECT_THROW(validate(cfg), InvalidArgument);
  EXPECT_NO_THROW(validate(EnvConfig{}));
}

TEST(Action, CodesAndLabels) {
  EXPECT_EQ(index(Action::DontInstall), 0u);
  EXPECT_EQ(index(Action::Install), 1u);
  EXPECT_EQ(label(Action::Install), "Install");
  EXPECT_EQ(label(Action::DontInstall), "Don't Install");
  EXPECT_THROW(action_from_index(2), InvalidArgument);
}
