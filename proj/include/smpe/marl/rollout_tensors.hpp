#pragma once

#include "smpe/envs/env.hpp"
#include "smpe/envs/runner.hpp"

#include <vector>

namespace smpe::marl {

using nn::Matrix;

/// A TrajectoryBatch laid out time-major and padded: row t*B + b holds step t
/// of env b. Padding rows have valid = 0.
struct RolloutTensors {
  int steps = 0;
  int envs = 0;
  int n_agents = 0;
  std::vector<Matrix> obs;           ///< per agent, rows x obs_dim
  std::vector<Matrix> next_obs;      ///< per agent
  std::vector<Matrix> prev_actions;  ///< per agent one-hot of the previous action (zeros at t = 0)
  std::vector<std::vector<int>> actions;
  std::vector<Matrix> noise;    ///< per agent belief noise, rows x latent_dim
  std::vector<Matrix> rewards;  ///< per agent mixed reward, rows x 1
  Matrix extrinsic;             ///< shared extrinsic reward, rows x 1
  Matrix state;
  Matrix next_state;
  Matrix bootstrap;  ///< 1 where the next state may be bootstrapped (not terminated)
  Matrix valid;
  double n_valid = 0.0;

  Eigen::Index rows() const { return valid.rows(); }
  Eigen::Index row(int t, int b) const { return static_cast<Eigen::Index>(t) * envs + b; }

  /// Missing belief noise is treated as zeros; missing mixed rewards fall back
  /// to the shared extrinsic reward.
  static RolloutTensors from_batch(const envs::TrajectoryBatch& batch, const envs::EnvSpec& spec, int latent_dim);
};

/// Per-row n-step TD targets, sum_k gamma^k r_{t+k} + gamma^m V'(s_{t+m}),
/// truncated at the end of each env's episode; no bootstrap past termination.
/// `next_values` holds V'(next_state) for every row.
Matrix td_targets(const RolloutTensors& rt, const Matrix& rewards, const Matrix& next_values, double gamma,
                  int n_step);

}  // namespace smpe::marl
