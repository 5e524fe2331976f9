#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pvdqn/env.hpp"
#include "pvdqn/mlp.hpp"
#include "pvdqn/random.hpp"

namespace pvdqn {

/// One experience tuple, with states already normalized to [0, 1]^3.
struct Transition {
  Eigen::Vector3d state = Eigen::Vector3d::Zero();
  Action action = Action::DontInstall;
  double reward = 0.0;
  Eigen::Vector3d next_state = Eigen::Vector3d::Zero();
  bool done = false;
};

/// Fixed-capacity FIFO ring of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void store(const Transition& t);

  /// Uniform draw of `batch_size` distinct transitions. Throws NotReady when the buffer is
  /// shorter than the batch.
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  /// i-th element in insertion order, 0 being the oldest retained transition.
  const Transition& operator[](std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest element once full
  std::vector<Transition> items_;
};

/// epsilon(n) = max(floor, base^n), evaluated as exp(n ln base).
class EpsilonSchedule {
 public:
  EpsilonSchedule(double base = 0.99999, double floor = 0.01, std::uint64_t steps = 0);

  double value() const { return at(steps_); }
  double at(std::uint64_t n) const;

  void advance() { ++steps_; }
  std::uint64_t steps() const { return steps_; }
  void set_steps(std::uint64_t n) { steps_ = n; }

  double base() const { return base_; }
  double floor() const { return floor_; }

 private:
  double base_;
  double floor_;
  std::uint64_t steps_;
};

/// Greedy action over two Q-values; an exact tie goes to DontInstall.
Action greedy_action(const std::array<double, 2>& q);

struct AgentConfig {
  std::vector<std::size_t> hidden{32, 32};
  double learning_rate = 0.1;
  std::size_t batch_size = 128;
  double gamma = 0.5;
  std::size_t replay_capacity = 10000;
  double epsilon_base = 0.99999;
  double epsilon_floor = 0.01;

  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

void validate(const AgentConfig& cfg);

/// Bellman regression target; the bootstrap term is dropped for terminal transitions.
double bellman_target(double reward, bool done, double gamma, double max_next_q);

/// Single-network DQN: the online network also produces the bootstrap, with no gradient
/// flowing through it.
class DqnAgent {
 public:
  DqnAgent(const AgentConfig& cfg, std::uint64_t init_seed);
  DqnAgent(const AgentConfig& cfg, Mlp network, std::uint64_t schedule_steps = 0);

  /// Epsilon-greedy with the schedule's current epsilon.
  Action select_action(const Eigen::Vector3d& state, Rng& rng) const;
  Action select_action(const Eigen::Vector3d& state, Rng& rng, double epsilon) const;

  void store(const Transition& t) { buffer_.store(t); }
  bool ready() const { return buffer_.size() >= batch_size_; }

  /// One semi-gradient SGD step on the masked squared Bellman error; returns the batch loss.
  double train_step(std::span<const Transition> batch);

  /// [Q(DontInstall), Q(Install)] for a normalized state.
  std::array<double, 2> q_values(const Eigen::Vector3d& normalized) const;
  std::array<double, 2> q_values(const State& state, const EnvConfig& cfg) const;

  const Mlp& network() const { return network_; }
  Mlp& network() { return network_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  EpsilonSchedule& schedule() { return schedule_; }
  const EpsilonSchedule& schedule() const { return schedule_; }
  double gamma() const { return gamma_; }
  double learning_rate() const { return learning_rate_; }
  std::size_t batch_size() const { return batch_size_; }

 private:
  Mlp network_;
  ReplayBuffer buffer_;
  EpsilonSchedule schedule_;
  double gamma_;
  double learning_rate_;
  std::size_t batch_size_;
};

}  // namespace pvdqn
