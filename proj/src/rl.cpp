#include "pvdqn/rl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pvdqn/error.hpp"

namespace pvdqn {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InvalidArgument("replay capacity must be >= 1");
  items_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::store(const Transition& t) {
  if (items_.size() < capacity_) {
    items_.push_back(t);
    return;
  }
  items_[head_] = t;
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::operator[](std::size_t i) const {
  if (i >= items_.size()) throw InvalidArgument("replay index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0) throw InvalidArgument("batch size must be >= 1");
  if (items_.size() < batch_size)
    throw NotReady("replay holds " + std::to_string(items_.size()) + " transitions, batch needs " +
                   std::to_string(batch_size));
  // Partial Fisher-Yates over the index set.
  std::vector<std::size_t> idx(items_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<Transition> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t j = i + std::size_t(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
    out.push_back((*this)[idx[i]]);
  }
  return out;
}

EpsilonSchedule::EpsilonSchedule(double base, double floor, std::uint64_t steps)
    : base_(base), floor_(floor), steps_(steps) {
  if (!(base > 0.0 && base <= 1.0)) throw InvalidArgument("epsilon base must lie in (0, 1]");
  if (!(floor >= 0.0 && floor <= 1.0)) throw InvalidArgument("epsilon floor must lie in [0, 1]");
}

double EpsilonSchedule::at(std::uint64_t n) const {
  return std::max(floor_, std::exp(double(n) * std::log1p(base_ - 1.0)));
}

Action greedy_action(const std::array<double, 2>& q) {
  return q[1] > q[0] ? Action::Install : Action::DontInstall;
}

void validate(const AgentConfig& cfg) {
  if (cfg.hidden.empty()) throw InvalidArgument("agent.hidden must list at least one layer width");
  for (auto h : cfg.hidden)
    if (h == 0) throw InvalidArgument("agent.hidden widths must be >= 1");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    throw InvalidArgument("agent.learning_rate must be positive");
  if (cfg.batch_size == 0) throw InvalidArgument("agent.batch_size must be >= 1");
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw InvalidArgument("agent.gamma must lie in [0, 1]");
  if (cfg.replay_capacity < cfg.batch_size)
    throw InvalidArgument("agent.replay_capacity must be at least agent.batch_size");
  if (!(cfg.epsilon_base > 0.0 && cfg.epsilon_base <= 1.0))
    throw InvalidArgument("agent.epsilon_base must lie in (0, 1]");
  if (!(cfg.epsilon_floor >= 0.0 && cfg.epsilon_floor <= 1.0))
    throw InvalidArgument("agent.epsilon_floor must lie in [0, 1]");
}

double bellman_target(double reward, bool done, double gamma, double max_next_q) {
  return done ? reward : reward + gamma * max_next_q;
}

DqnAgent::DqnAgent(const AgentConfig& cfg, std::uint64_t init_seed)
    : DqnAgent(cfg, init_mlp<double>(3, cfg.hidden, kActionCount, init_seed)) {}

DqnAgent::DqnAgent(const AgentConfig& cfg, Mlp network, std::uint64_t schedule_steps)
    : network_(std::move(network)),
      buffer_(cfg.replay_capacity),
      schedule_(cfg.epsilon_base, cfg.epsilon_floor, schedule_steps),
      gamma_(cfg.gamma),
      learning_rate_(cfg.learning_rate),
      batch_size_(cfg.batch_size) {
  validate(cfg);
  if (network_.input_dim() != 3 || network_.output_dim() != kActionCount)
    throw InvalidArgument("agent network must map 3 inputs to 2 Q-values");
}

std::array<double, 2> DqnAgent::q_values(const Eigen::Vector3d& normalized) const {
  const Vector<double> q = predict(network_, normalized);
  return {q[0], q[1]};
}

std::array<double, 2> DqnAgent::q_values(const State& state, const EnvConfig& cfg) const {
  return q_values(normalize_state(state, cfg));
}

Action DqnAgent::select_action(const Eigen::Vector3d& state, Rng& rng) const {
  return select_action(state, rng, schedule_.value());
}

Action DqnAgent::select_action(const Eigen::Vector3d& state, Rng& rng, double epsilon) const {
  if (rng.bernoulli(epsilon)) return action_from_index(std::size_t(rng.below(kActionCount)));
  return greedy_action(q_values(state));
}

double DqnAgent::train_step(std::span<const Transition> batch) {
  if (batch.empty()) throw InvalidArgument("train_step: empty batch");
  const auto n = Eigen::Index(batch.size());
  ColMatrix<double> states(3, n);
  ColMatrix<double> next_states(3, n);
  std::vector<std::size_t> actions(batch.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = batch[std::size_t(i)];
    states.col(i) = t.state;
    next_states.col(i) = t.next_state;
    actions[std::size_t(i)] = index(t.action);
  }

  // Bootstrap values are constants of this step.
  const auto [next_q, unused] = forward(network_, next_states);
  std::vector<double> targets(batch.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = batch[std::size_t(i)];
    targets[std::size_t(i)] = bellman_target(t.reward, t.done, gamma_, next_q.col(i).maxCoeff());
  }

  const auto [predicted, cache] = forward(network_, states);
  const auto loss = masked_q_loss<double>(predicted, actions, targets);
  const auto grads = backward(network_, cache, loss.output_grads);
  sgd_step(network_, grads, learning_rate_);
  return loss.loss;
}

}  // namespace pvdqn
