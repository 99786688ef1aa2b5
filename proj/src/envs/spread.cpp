#include "smpe/envs/spread.hpp"

#include "smpe/errors.hpp"

#include <random>
#include <regex>

namespace smpe::envs {

SpreadParams SpreadParams::parse(const std::string& name) {
  static const std::regex pattern(R"(spread-(\d+))");
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) throw ConfigError("spread preset '" + name + "' does not match spread-N");
  SpreadParams p;
  p.n_agents = std::stoi(m[1]);
  return p;
}

void spread_step_physics(const SpreadParams& params, SpreadState& state, std::span<const int> actions) {
  for (Eigen::Index i = 0; i < state.pos.rows(); ++i) {
    Eigen::RowVector2d dir = Eigen::RowVector2d::Zero();
    switch (actions[static_cast<std::size_t>(i)]) {
      case 1: dir(0) = 1.0; break;
      case 2: dir(0) = -1.0; break;
      case 3: dir(1) = 1.0; break;
      case 4: dir(1) = -1.0; break;
      default: break;
    }
    state.vel.row(i) = state.vel.row(i) * (1.0 - params.damping) + dir * params.accel * params.dt;
    state.pos.row(i) += state.vel.row(i) * params.dt;
  }
}

double spread_reward(const SpreadParams& params, const SpreadState& state) {
  double r = 0.0;
  for (Eigen::Index l = 0; l < state.landmarks.rows(); ++l) {
    r -= (state.pos.rowwise() - state.landmarks.row(l)).rowwise().norm().minCoeff();
  }
  const double contact = 2.0 * params.agent_radius;
  for (Eigen::Index i = 0; i < state.pos.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < state.pos.rows(); ++j) {
      if ((state.pos.row(i) - state.pos.row(j)).norm() < contact) r -= 1.0;
    }
  }
  return r;
}

Spread::Spread(SpreadParams params) : params_(params) {
  if (params_.n_agents < 1) throw ConfigError("spread: need at least one agent");
  if (params_.max_episode_len <= 0) throw ConfigError("spread: episode length must be positive");
  const int n = params_.n_agents;
  spec_.name = "spread-" + std::to_string(n);
  spec_.n_agents = n;
  spec_.obs_dim = 4 + 2 * n + 2 * (n - 1);
  spec_.n_actions = kSpreadActions;
  spec_.max_episode_len = params_.max_episode_len;
  spec_.state_dim = n * spec_.obs_dim;
}

Observation Spread::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = params_.n_agents;
  state_.pos.resize(n, 2);
  state_.vel = Eigen::MatrixX2d::Zero(n, 2);
  state_.landmarks.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    state_.pos(i, 0) = u(rng);
    state_.pos(i, 1) = u(rng);
  }
  for (int i = 0; i < n; ++i) {
    state_.landmarks(i, 0) = u(rng);
    state_.landmarks(i, 1) = u(rng);
  }
  state_.steps = 0;
  done_ = false;
  return {observe(), joint_state()};
}

void Spread::set_state(SpreadState state) {
  if (state.pos.rows() != params_.n_agents || state.vel.rows() != params_.n_agents ||
      state.landmarks.rows() != params_.n_agents) {
    throw UsageError("spread: state does not match the agent count");
  }
  state_ = std::move(state);
  done_ = state_.steps >= params_.max_episode_len;
}

StepResult Spread::step(std::span<const int> actions) {
  if (done_) throw UsageError("spread: step called on a finished episode; call reset first");
  if (static_cast<int>(actions.size()) != params_.n_agents) {
    throw UsageError("spread: expected " + std::to_string(params_.n_agents) + " actions");
  }
  for (int a : actions) {
    if (a < 0 || a >= kSpreadActions) throw UsageError("spread: action " + std::to_string(a) + " out of range");
  }
  spread_step_physics(params_, state_, actions);
  ++state_.steps;
  StepResult result;
  result.reward = spread_reward(params_, state_);
  result.agent_rewards.assign(static_cast<std::size_t>(params_.n_agents), result.reward / params_.n_agents);
  result.truncated = state_.steps >= params_.max_episode_len;
  done_ = result.truncated;
  result.obs = observe();
  result.state = joint_state();
  return result;
}

Matrix Spread::observe() const {
  const int n = params_.n_agents;
  Matrix obs(n, spec_.obs_dim);
  for (int i = 0; i < n; ++i) {
    Eigen::Index k = 0;
    obs.block(i, k, 1, 2) = state_.vel.row(i);
    k += 2;
    obs.block(i, k, 1, 2) = state_.pos.row(i);
    k += 2;
    for (int l = 0; l < n; ++l, k += 2) obs.block(i, k, 1, 2) = state_.landmarks.row(l) - state_.pos.row(i);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      obs.block(i, k, 1, 2) = state_.pos.row(j) - state_.pos.row(i);
      k += 2;
    }
  }
  return obs;
}

RowVector Spread::joint_state() const {
  const Matrix obs = observe();
  RowVector s(spec_.state_dim);
  for (Eigen::Index i = 0; i < obs.rows(); ++i) s.segment(i * spec_.obs_dim, spec_.obs_dim) = obs.row(i);
  return s;
}

}  // namespace smpe::envs
