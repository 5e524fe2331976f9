#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvdqn/config.hpp"
#include "pvdqn/env.hpp"
#include "pvdqn/mlp.hpp"
#include "pvdqn/rl.hpp"

namespace pvdqn {

inline constexpr int kCheckpointFormatVersion = 1;

struct EpisodeRecord {
  std::size_t episode = 0;          // 1-based
  double total_reward = 0.0;        // undiscounted sum of step rewards
  double discounted_return = 0.0;   // sum of gamma^t r_t
  std::optional<double> mean_loss;  // absent when no learning step ran
  double epsilon = 1.0;             // epsilon after the episode's last step
  std::size_t steps = 0;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

/// Sub-seeds fanned out from the master seed.
struct SeedSet {
  std::uint64_t master = 0;
  std::uint64_t init = 0;
  std::uint64_t env = 0;
  std::uint64_t explore = 0;
  std::uint64_t replay = 0;

  static SeedSet derive(std::uint64_t master);
  friend bool operator==(const SeedSet&, const SeedSet&) = default;
};

struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  TrainConfig config;
  Mlp network;
  std::uint64_t n_i = 0;  // epsilon schedule step counter
  std::uint64_t total_steps = 0;
  SeedSet seeds;
};

/// Rebuilds a frozen agent (empty replay memory) from a checkpoint.
DqnAgent make_agent(const Checkpoint& ckpt);

/// Per-step observation for trajectory taps.
struct StepEvent {
  std::size_t episode = 0;
  std::size_t step = 0;  // 0-based within the episode
  State state;
  Action action = Action::DontInstall;
  StepOutcome outcome;
  std::optional<double> loss;
};

/// Training observers. Both callbacks are optional and run on the training thread.
struct ProgressSink {
  std::function<void(const StepEvent&)> on_step;
  std::function<void(const EpisodeRecord&)> on_episode;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpisodeRecord> episodes;
};

/// Runs the full DQN training loop. Throws InvalidArgument on a bad config and Diverged
/// when a loss or parameter becomes non-finite.
TrainResult train(const TrainConfig& cfg, const ProgressSink& sink = {});

double discounted_return(std::span<const double> rewards, double gamma);

// Checkpoint file: versioned JSON. Loading distinguishes a missing file, malformed content
// and a version mismatch via CheckpointError::Kind.
std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(const std::string& text);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Training log CSV: episode,total_reward,discounted_return,mean_loss,epsilon,steps
inline constexpr const char* kTrainingLogHeader = "episode,total_reward,discounted_return,mean_loss,epsilon,steps";
void write_training_log(std::ostream& out, std::span<const EpisodeRecord> records);
std::string training_log_to_string(std::span<const EpisodeRecord> records);
std::vector<EpisodeRecord> read_training_log(std::istream& in);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace pvdqn
