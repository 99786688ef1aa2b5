#pragma once

#include "smpe/envs/env.hpp"

#include <Eigen/Dense>

namespace smpe::envs {

/// Cooperative navigation: N agents should cover N static landmarks.
///
/// Actions: 0 stay, 1 right (+x), 2 left (-x), 3 up (+y), 4 down (-y).
/// Observation: own velocity (2), own position (2), landmark positions
/// relative to the agent (2N), other agents' relative positions (2(N-1)).
struct SpreadParams {
  int n_agents = 3;
  int max_episode_len = 25;
  double dt = 0.1;
  double damping = 0.25;
  double accel = 5.0;
  double agent_radius = 0.15;

  /// Parses "spread-N".
  static SpreadParams parse(const std::string& name);
};

struct SpreadState {
  Eigen::MatrixX2d pos;
  Eigen::MatrixX2d vel;
  Eigen::MatrixX2d landmarks;
  int steps = 0;
};

inline constexpr int kSpreadActions = 5;

/// Applies one damped point-mass integration step in place.
void spread_step_physics(const SpreadParams& params, SpreadState& state, std::span<const int> actions);

/// Sum over landmarks of minus the nearest agent distance, minus one per
/// colliding agent pair (distance below two radii).
double spread_reward(const SpreadParams& params, const SpreadState& state);

class Spread final : public Env {
public:
  explicit Spread(SpreadParams params);

  const EnvSpec& spec() const override { return spec_; }
  const SpreadParams& params() const { return params_; }
  Observation reset(std::uint64_t seed) override;
  StepResult step(std::span<const int> actions) override;
  Matrix observe() const override;
  RowVector joint_state() const override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<Spread>(*this); }

  const SpreadState& state() const { return state_; }
  void set_state(SpreadState state);

private:
  SpreadParams params_;
  EnvSpec spec_;
  SpreadState state_;
  bool done_ = true;
};

}  // namespace smpe::envs
