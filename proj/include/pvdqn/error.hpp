#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pvdqn {

/// Precondition violated by a caller-supplied value (bad shape, out-of-range number).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation called in a state that does not allow it, e.g. stepping a finished episode.
class IllegalState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Replay memory does not hold enough transitions for the requested batch.
class NotReady : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss or parameter.
class Diverged : public std::runtime_error {
 public:
  Diverged(std::size_t episode, std::size_t step, const std::string& what)
      : std::runtime_error("training diverged at episode " + std::to_string(episode) + ", step " +
                           std::to_string(step) + ": " + what),
        episode_(episode),
        step_(step) {}

  std::size_t episode() const noexcept { return episode_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t episode_;
  std::size_t step_;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { MissingFile, Malformed, VersionMismatch };

  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Experiment configuration could not be read or failed validation.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace pvdqn
