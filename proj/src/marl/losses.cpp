#include "smpe/marl/learner.hpp"

namespace smpe::marl {

namespace {

/// Mean of a rows x 1 column over valid rows.
Var masked_mean(Tape& tape, Var x, const RolloutTensors& rt) {
  return tape.scale(tape.sum(tape.mul(x, tape.constant(rt.valid))), 1.0 / rt.n_valid);
}

double masked_mean(const Matrix& x, const RolloutTensors& rt) {
  return x.cwiseProduct(rt.valid).sum() / rt.n_valid;
}

Var mean_of(Tape& tape, const std::vector<Var>& parts) {
  return tape.scale(tape.sum(tape.concat_cols(parts)), 1.0 / static_cast<double>(parts.size()));
}

std::vector<Var> obs_constants(Tape& tape, const std::vector<Matrix>& obs) {
  std::vector<Var> out;
  out.reserve(obs.size());
  for (const auto& o : obs) out.push_back(tape.constant(o));
  return out;
}

}  // namespace

Var Learner::actor_input(Tape& tape, int agent, Var obs, Var prev_actions, Var belief) {
  std::vector<Var> parts{obs, prev_actions};
  if (config_.shared_policy) {
    Matrix id = Matrix::Zero(tape.value(obs).rows(), config_.env.n_agents);
    id.col(agent).setOnes();
    parts.push_back(tape.constant(std::move(id)));
  }
  parts.push_back(belief);
  return tape.concat_cols(parts);
}

Var Learner::hat_state(Tape& tape, int agent, const std::vector<Var>& obs, FilterMode mode) {
  std::vector<Var> parts{obs[static_cast<std::size_t>(agent)]};
  for (int j : statemodel::others_of(agent, config_.env.n_agents)) {
    const Var oj = obs[static_cast<std::size_t>(j)];
    if (mode == FilterMode::kOnes) {
      parts.push_back(oj);
    } else {
      const Var w = state_model_->filters(tape, agent, oj, mode == FilterMode::kTarget, mode == FilterMode::kLive);
      parts.push_back(tape.mul(w, oj));
    }
  }
  return tape.concat_cols(parts);
}

void Learner::policy_terms(Tape& tape, const RolloutTensors& rt, std::vector<Var>& log_probs,
                           std::vector<Var>& entropies) {
  log_probs.clear();
  entropies.clear();
  const Eigen::Index B = rt.envs;
  for (int i = 0; i < rt.n_agents; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const Var obs = tape.constant(rt.obs[ii]);
    Var belief;
    if (config_.zero_belief) {
      belief = tape.constant(Matrix::Zero(rt.rows(), config_.latent_dim));
    } else {
      const nn::GaussianHead head = state_model_->encode(tape, i, obs, true);
      belief = nn::gaussian_sample(tape, head, rt.noise[ii]);
    }
    ActorNet& net = actor(i);
    const Var features = net.embed(tape, actor_input(tape, i, obs, tape.constant(rt.prev_actions[ii]), belief));
    Var h = tape.constant(Matrix::Zero(B, config_.hidden_dim));
    std::vector<Var> hs;
    hs.reserve(static_cast<std::size_t>(rt.steps));
    for (int t = 0; t < rt.steps; ++t) {
      h = net.recur(tape, tape.slice_rows(features, static_cast<Eigen::Index>(t) * B, B), h);
      hs.push_back(h);
    }
    const Var logp_all = tape.log_softmax(net.logits(tape, tape.concat_rows(hs)));
    log_probs.push_back(tape.pick(logp_all, rt.actions[ii]));
    entropies.push_back(tape.scale(tape.row_sum(tape.mul(tape.exp(logp_all), logp_all)), -1.0));
  }
}

Matrix Learner::filtered_next_values(const RolloutTensors& rt, int agent) {
  Tape tape;
  const std::vector<Var> next = obs_constants(tape, rt.next_obs);
  const FilterMode mode = config_.flags.no_filters ? FilterMode::kOnes : FilterMode::kTarget;
  return tape.value(critic_w_target_.forward(tape, hat_state(tape, agent, next, mode), false));
}

std::vector<Matrix> Learner::advantages(const RolloutTensors& rt) {
  std::vector<Matrix> out;
  Tape tape;
  if (config_.flags.no_standard_critic) {
    const std::vector<Var> obs = obs_constants(tape, rt.obs);
    const FilterMode mode = config_.flags.no_filters ? FilterMode::kOnes : FilterMode::kFrozen;
    for (int i = 0; i < rt.n_agents; ++i) {
      const Matrix v = tape.value(critic_w_.forward(tape, hat_state(tape, i, obs, mode), false));
      const Matrix y = td_targets(rt, rt.rewards[static_cast<std::size_t>(i)], filtered_next_values(rt, i),
                                  config_.gamma, config_.n_step);
      out.push_back(y - v);
    }
    return out;
  }
  const Matrix v = tape.value(critic_.forward(tape, tape.constant(rt.state), false));
  const Matrix vn = tape.value(critic_target_.forward(tape, tape.constant(rt.next_state), false));
  for (int i = 0; i < rt.n_agents; ++i) {
    out.push_back(td_targets(rt, rt.rewards[static_cast<std::size_t>(i)], vn, config_.gamma, config_.n_step) - v);
  }
  return out;
}

Var Learner::critic_loss(Tape& tape, const RolloutTensors& rt) {
  const Var v = critic_.forward(tape, tape.constant(rt.state));
  Tape scratch;
  const Matrix vn = scratch.value(critic_target_.forward(scratch, scratch.constant(rt.next_state), false));
  std::vector<Var> per_agent;
  for (int i = 0; i < rt.n_agents; ++i) {
    const Matrix y = td_targets(rt, rt.rewards[static_cast<std::size_t>(i)], vn, config_.gamma, config_.n_step);
    per_agent.push_back(masked_mean(tape, tape.square(tape.sub(tape.constant(y), v)), rt));
  }
  return mean_of(tape, per_agent);
}

Var Learner::critic_w_loss(Tape& tape, const RolloutTensors& rt) {
  const std::vector<Var> obs = obs_constants(tape, rt.obs);
  const FilterMode mode = config_.flags.no_filters ? FilterMode::kOnes : FilterMode::kLive;
  std::vector<Var> per_agent;
  for (int i = 0; i < rt.n_agents; ++i) {
    const Var v = critic_w_.forward(tape, hat_state(tape, i, obs, mode));
    const Matrix y = td_targets(rt, rt.rewards[static_cast<std::size_t>(i)], filtered_next_values(rt, i),
                                config_.gamma, config_.n_step);
    per_agent.push_back(masked_mean(tape, tape.square(tape.sub(tape.constant(y), v)), rt));
  }
  return mean_of(tape, per_agent);
}

Var Learner::actor_loss(Tape& tape, const RolloutTensors& rt, const std::vector<Matrix>& adv, double* entropy) {
  std::vector<Var> log_probs;
  std::vector<Var> entropies;
  policy_terms(tape, rt, log_probs, entropies);
  std::vector<Var> per_agent;
  double ent = 0.0;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    const Var pg = tape.scale(tape.mul(log_probs[i], tape.constant(adv[i])), -1.0);
    const Var term = tape.sub(pg, tape.scale(entropies[i], config_.entropy_coef));
    per_agent.push_back(masked_mean(tape, term, rt));
    ent += masked_mean(tape.value(entropies[i]), rt);
  }
  if (entropy) *entropy = ent / static_cast<double>(log_probs.size());
  return mean_of(tape, per_agent);
}

RlLosses Learner::rl_losses(Tape& tape, const RolloutTensors& rt) {
  RlLosses out;
  out.advantages = advantages(rt);
  out.actor = actor_loss(tape, rt, out.advantages, &out.entropy);
  if (!config_.flags.no_standard_critic) out.critic = critic_loss(tape, rt);
  if (!config_.flags.no_critic_w) out.critic_w = critic_w_loss(tape, rt);
  return out;
}

}  // namespace smpe::marl
