#pragma once

#include "smpe/nncore/params.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace smpe::envs {

using nn::Matrix;
using nn::RowVector;

struct EnvSpec {
  std::string name;
  int n_agents = 0;
  int obs_dim = 0;
  int n_actions = 0;
  int max_episode_len = 0;
  /// Dimension of the joint state fed to centralized critics.
  int state_dim = 0;
};

/// Per-agent observations (one row per agent) and the joint state.
struct Observation {
  Matrix obs;
  RowVector state;
};

struct StepResult {
  Matrix obs;
  /// Shared team reward for this step (sum of the per-agent contributions).
  double reward = 0.0;
  std::vector<double> agent_rewards;
  /// The task ended (e.g. all food collected); no bootstrapping past this step.
  bool terminated = false;
  /// The episode hit its step cap.
  bool truncated = false;
  RowVector state;

  bool done() const { return terminated || truncated; }
};

/// A cooperative, partially observable multi-agent task.
class Env {
public:
  virtual ~Env() = default;

  virtual const EnvSpec& spec() const = 0;
  /// Starts a fresh episode whose layout is fully determined by `seed`.
  virtual Observation reset(std::uint64_t seed) = 0;
  /// Throws UsageError on a wrong action count, out-of-range action, or a step
  /// after the episode has ended.
  virtual StepResult step(std::span<const int> actions) = 0;
  virtual Matrix observe() const = 0;
  virtual RowVector joint_state() const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;
};

/// Builds an environment from a preset name: "Ss-GxG-Pp-Ff[-coop]" or "spread-N".
/// Throws ConfigError on malformed or unsolvable presets.
std::unique_ptr<Env> make_env(const std::string& name);

/// Stateless 64-bit mixer used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace smpe::envs
