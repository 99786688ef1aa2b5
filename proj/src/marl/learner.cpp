#include "smpe/marl/learner.hpp"

#include "smpe/errors.hpp"

#include <cmath>

namespace smpe::marl {

namespace {

statemodel::EdHyper ed_hyper(const LearnerConfig& c) {
  statemodel::EdHyper h;
  h.lambda_rec = c.lambda_rec;
  h.lambda_kl = c.flags.no_kl ? 0.0 : c.lambda_kl;
  h.lambda_norm = c.flags.no_L2_norm ? 0.0 : c.lambda_norm;
  h.lr_ed = c.lr_ed;
  h.lr_w = c.lr_w;
  h.batch_size = c.ed_batch_size;
  h.no_filters = c.flags.no_filters;
  return h;
}

}  // namespace

Learner::Learner(const LearnerConfig& config)
    : config_(config),
      critic_(make_value_net("critic", config.env.state_dim, config.hidden_dim)),
      critic_target_(make_value_net("critic_target", config.env.state_dim, config.hidden_dim)),
      critic_w_(make_value_net("critic_w", config.env.n_agents * config.env.obs_dim, config.hidden_dim)),
      critic_w_target_(make_value_net("critic_w_target", config.env.n_agents * config.env.obs_dim, config.hidden_dim)) {
  const envs::EnvSpec& env = config_.env;
  if (env.n_agents < 2) throw ConfigError("at least two agents are required");
  if (config_.flags.no_critic_w && config_.flags.no_standard_critic)
    throw ConfigError("no_critic_w and no_standard_critic together leave no trained critic");
  if (config_.n_tup < 1) throw ConfigError("n_tup must be >= 1");

  std::mt19937_64 rng(envs::mix_seed(config_.seed, 0xAC7));
  const int n_actors = config_.shared_policy ? 1 : env.n_agents;
  for (int i = 0; i < n_actors; ++i) {
    actors_.push_back(std::make_unique<ActorNet>("actor" + std::to_string(i), actor_input_dim(), config_.hidden_dim,
                                                 env.n_actions));
    actors_.back()->init(rng);
  }
  critic_.init(rng);
  critic_w_.init(rng);
  hard_copy(critic_params(), critic_target_params());
  hard_copy(critic_w_params(), critic_w_target_params());

  statemodel::StateModelDims dims{env.n_agents, env.obs_dim, config_.latent_dim, config_.ed_hidden_dim};
  state_model_ = std::make_unique<statemodel::StateModel>(dims, envs::mix_seed(config_.seed, 0x5A7E));
  ed_trainer_ = std::make_unique<statemodel::EdTrainer>(*state_model_, ed_hyper(config_));

  actor_opt_ = nn::Adam(actor_params(), config_.lr);
  belief_policy_opt_ = nn::Adam(state_model_->all_encoder_params(), config_.lr);
  critic_opt_ = nn::Adam(critic_params(), config_.lr);
  critic_w_opt_ = nn::Adam(critic_w_params(), config_.lr);
  filter_critic_opt_ = nn::Adam(state_model_->all_filter_params(), config_.lr_w_critic);
}

int Learner::actor_input_dim() const {
  const envs::EnvSpec& env = config_.env;
  return env.obs_dim + env.n_actions + (config_.shared_policy ? env.n_agents : 0) + config_.latent_dim;
}

nn::ParamGroup Learner::actor_params() {
  nn::ParamGroup g("actor");
  for (auto& a : actors_) a->collect(g);
  return g;
}

nn::ParamGroup Learner::critic_params() {
  nn::ParamGroup g("critic");
  critic_.collect(g);
  return g;
}

nn::ParamGroup Learner::critic_target_params() {
  nn::ParamGroup g("critic_target");
  critic_target_.collect(g);
  return g;
}

nn::ParamGroup Learner::critic_w_params() {
  nn::ParamGroup g("critic_w");
  critic_w_.collect(g);
  return g;
}

nn::ParamGroup Learner::critic_w_target_params() {
  nn::ParamGroup g("critic_w_target");
  critic_w_target_.collect(g);
  return g;
}

nn::ParamGroup Learner::all_params() {
  nn::ParamGroup g("all");
  g.extend(actor_params());
  g.extend(critic_params());
  g.extend(critic_target_params());
  g.extend(critic_w_params());
  g.extend(critic_w_target_params());
  g.extend(state_model_->all_params());
  return g;
}

nn::ParamGroup Learner::trainable_params() {
  nn::ParamGroup g("trainable");
  g.extend(actor_params());
  g.extend(critic_params());
  g.extend(critic_w_params());
  g.extend(state_model_->all_encoder_params());
  g.extend(state_model_->all_filter_params());
  return g;
}

void Learner::target_update() {
  hard_copy(critic_params(), critic_target_params());
  hard_copy(critic_w_params(), critic_w_target_params());
  ++target_updates_;
}

LossReport Learner::train_step(const envs::TrajectoryBatch& batch) {
  return train_step(RolloutTensors::from_batch(batch, config_.env, config_.latent_dim));
}

LossReport Learner::train_step(const RolloutTensors& rt) {
  trainable_params().zero_grads();
  Tape tape;
  const RlLosses losses = rl_losses(tape, rt);

  std::vector<Var> terms{losses.actor};
  if (losses.critic) terms.push_back(*losses.critic);
  if (losses.critic_w) terms.push_back(*losses.critic_w);
  const Var total = tape.sum(tape.concat_cols(terms));

  LossReport report;
  report.actor = tape.item(losses.actor);
  report.critic = losses.critic ? tape.item(*losses.critic) : 0.0;
  report.critic_w = losses.critic_w ? tape.item(*losses.critic_w) : 0.0;
  report.entropy = losses.entropy;
  if (!std::isfinite(tape.item(total))) {
    throw TrainingFault("non-finite loss at update " + std::to_string(updates_) + ": actor=" +
                        std::to_string(report.actor) + " critic=" + std::to_string(report.critic) +
                        " critic_w=" + std::to_string(report.critic_w));
  }
  tape.backward(total);

  actor_opt_.step();
  if (!config_.zero_belief) belief_policy_opt_.step();
  if (losses.critic) critic_opt_.step();
  if (losses.critic_w) {
    critic_w_opt_.step();
    if (!config_.flags.no_filters) filter_critic_opt_.step();
  }

  ++updates_;
  if (updates_ % static_cast<std::uint64_t>(config_.n_tup) == 0) target_update();
  return report;
}

}  // namespace smpe::marl
