#include "smpe/marl/rollout_tensors.hpp"

#include "smpe/errors.hpp"

#include <cmath>

namespace smpe::marl {

RolloutTensors RolloutTensors::from_batch(const envs::TrajectoryBatch& batch, const envs::EnvSpec& spec,
                                          int latent_dim) {
  RolloutTensors rt;
  rt.steps = static_cast<int>(batch.max_len());
  rt.envs = static_cast<int>(batch.episodes.size());
  rt.n_agents = spec.n_agents;
  if (rt.steps == 0 || rt.envs == 0) throw UsageError("empty trajectory batch");
  const Eigen::Index rows = static_cast<Eigen::Index>(rt.steps) * rt.envs;
  const auto n = static_cast<std::size_t>(spec.n_agents);

  rt.obs.assign(n, Matrix::Zero(rows, spec.obs_dim));
  rt.next_obs.assign(n, Matrix::Zero(rows, spec.obs_dim));
  rt.prev_actions.assign(n, Matrix::Zero(rows, spec.n_actions));
  rt.actions.assign(n, std::vector<int>(static_cast<std::size_t>(rows), 0));
  rt.noise.assign(n, Matrix::Zero(rows, latent_dim));
  rt.rewards.assign(n, Matrix::Zero(rows, 1));
  rt.extrinsic = Matrix::Zero(rows, 1);
  rt.state = Matrix::Zero(rows, spec.state_dim);
  rt.next_state = Matrix::Zero(rows, spec.state_dim);
  rt.bootstrap = Matrix::Zero(rows, 1);
  rt.valid = Matrix::Zero(rows, 1);

  for (int b = 0; b < rt.envs; ++b) {
    const auto& episode = batch.episodes[static_cast<std::size_t>(b)];
    for (std::size_t t = 0; t < episode.size(); ++t) {
      const envs::Transition& tr = episode[t];
      const Eigen::Index r = rt.row(static_cast<int>(t), b);
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        rt.obs[i].row(r) = tr.obs.row(ii);
        rt.next_obs[i].row(r) = tr.next_obs.row(ii);
        rt.actions[i][static_cast<std::size_t>(r)] = tr.actions[i];
        if (t > 0) rt.prev_actions[i](r, episode[t - 1].actions[i]) = 1.0;
        if (tr.belief_noise.size() > 0) rt.noise[i].row(r) = tr.belief_noise.row(ii);
        rt.rewards[i](r, 0) = tr.mixed_reward.empty() ? tr.reward : tr.mixed_reward[i];
      }
      rt.extrinsic(r, 0) = tr.reward;
      rt.state.row(r) = tr.state;
      rt.next_state.row(r) = tr.next_state;
      rt.bootstrap(r, 0) = tr.terminated ? 0.0 : 1.0;
      rt.valid(r, 0) = 1.0;
      rt.n_valid += 1.0;
    }
  }
  return rt;
}

Matrix td_targets(const RolloutTensors& rt, const Matrix& rewards, const Matrix& next_values, double gamma,
                  int n_step) {
  if (n_step < 1) throw ConfigError("n_step must be >= 1");
  Matrix y = Matrix::Zero(rt.rows(), 1);
  for (int b = 0; b < rt.envs; ++b) {
    int len = 0;
    while (len < rt.steps && rt.valid(rt.row(len, b), 0) > 0.0) ++len;
    for (int t = 0; t < len; ++t) {
      const int m = std::min(n_step, len - t);
      double acc = 0.0;
      double disc = 1.0;
      for (int k = 0; k < m; ++k) {
        acc += disc * rewards(rt.row(t + k, b), 0);
        disc *= gamma;
      }
      const Eigen::Index last = rt.row(t + m - 1, b);
      acc += disc * rt.bootstrap(last, 0) * next_values(last, 0);
      y(rt.row(t, b), 0) = acc;
    }
  }
  return y;
}

}  // namespace smpe::marl
