#pragma once

#include "smpe/envs/env.hpp"

#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace smpe::envs {

/// One joint transition of one environment. Fields after `next_state` are
/// filled in by the policy (belief noise, intrinsic and mixed rewards).
struct Transition {
  Matrix obs;
  RowVector state;
  std::vector<int> actions;
  double reward = 0.0;
  std::vector<double> agent_rewards;
  bool terminated = false;
  bool truncated = false;
  Matrix next_obs;
  RowVector next_state;

  /// Row i: standard-normal noise used for agent i's belief sample at `obs`.
  Matrix belief_noise;
  std::vector<double> intrinsic;
  std::vector<double> mixed_reward;

  bool done() const { return terminated || truncated; }
};

/// Per-environment episodes collected by one synchronized rollout.
struct TrajectoryBatch {
  std::vector<std::vector<Transition>> episodes;

  std::size_t transitions() const;
  std::size_t max_len() const;
};

/// Acting interface used by the runner. Observations are indexed by env.
class RolloutPolicy {
public:
  virtual ~RolloutPolicy() = default;
  /// Called once per rollout with each env's initial observation.
  virtual void on_reset(std::span<const Matrix> obs) = 0;
  /// Returns a joint action for each env listed in `active`, in that order.
  virtual std::vector<std::vector<int>> act(std::span<const std::size_t> active, std::span<const Matrix> obs) = 0;
  /// Called after the step for each active env, in `active` order.
  virtual void on_step(std::span<const std::size_t> /*active*/, std::span<Transition* const> /*transitions*/) {}
};

/// Steps a set of environments in lockstep until every episode has ended.
///
/// Episode k of env e is seeded with mix_seed(mix_seed(seed, e), k), so each
/// env's trajectory does not depend on how many envs run alongside it.
class ParallelRunner {
public:
  ParallelRunner(std::vector<std::unique_ptr<Env>> envs, std::uint64_t seed);

  /// Runs one batch of episodes. At most `budget` transitions are taken; an
  /// episode cut short by the budget is marked truncated.
  TrajectoryBatch run(RolloutPolicy& policy, std::size_t budget = std::numeric_limits<std::size_t>::max());

  std::size_t size() const { return envs_.size(); }
  const EnvSpec& spec() const { return envs_.front()->spec(); }
  Env& env(std::size_t i) { return *envs_[i]; }
  std::uint64_t episodes_started() const;

private:
  std::vector<std::unique_ptr<Env>> envs_;
  std::vector<std::uint64_t> episode_counter_;
  std::uint64_t seed_;
};

}  // namespace smpe::envs
