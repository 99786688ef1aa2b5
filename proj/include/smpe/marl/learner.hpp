#pragma once

#include "smpe/envs/env.hpp"
#include "smpe/envs/runner.hpp"
#include "smpe/marl/ablation.hpp"
#include "smpe/marl/networks.hpp"
#include "smpe/marl/rollout_tensors.hpp"
#include "smpe/nncore/adam.hpp"
#include "smpe/statemodel/state_model.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace smpe::marl {

struct LearnerConfig {
  envs::EnvSpec env;
  int hidden_dim = 128;
  int latent_dim = 32;
  int ed_hidden_dim = 64;
  bool shared_policy = true;
  double gamma = 0.99;
  double lr = 5e-4;
  double lr_ed = 5e-4;
  double lr_w = 5e-4;
  double lr_w_critic = 5e-5;
  double lambda_rec = 0.5;
  double lambda_kl = 0.1;
  double lambda_norm = 1.0;
  double entropy_coef = 0.01;
  int n_step = 1;
  /// Target critics are refreshed every n_tup calls to train_step.
  int n_tup = 100;
  std::size_t ed_batch_size = 16;
  AblationFlags flags;
  /// Feed an all-zero belief to the actors (plain recurrent actor-critic).
  bool zero_belief = false;
  std::uint64_t seed = 0;
};

struct LossReport {
  double actor = 0.0;
  double critic = 0.0;
  double critic_w = 0.0;
  double rec = 0.0;
  double kl = 0.0;
  double norm = 0.0;
  /// critic_w + lambda_rec*rec + lambda_norm*norm + lambda_kl*kl
  double encodings = 0.0;
  double entropy = 0.0;
  double mean_intrinsic = 0.0;
};

/// Graph handles for the reinforcement-learning losses of one batch.
struct RlLosses {
  Var actor;
  std::optional<Var> critic;
  std::optional<Var> critic_w;
  double entropy = 0.0;
  /// Per agent advantage (constants), rows x 1.
  std::vector<Matrix> advantages;
};

/// kLive trains the filters, kFrozen uses them without gradient, kTarget uses
/// the filter target network, kOnes skips filtering.
enum class FilterMode { kLive, kFrozen, kTarget, kOnes };

/// Owns every network of the method, its optimizers and target copies.
///
/// Parameter groups: actors (psi), standard critic (xi) and target (xi'),
/// filtered-state critic (k) and target (k'), and the per-agent state model
/// (encoders, decoders, filters and filter targets).
class Learner {
public:
  explicit Learner(const LearnerConfig& config);
  Learner(const Learner&) = delete;
  Learner& operator=(const Learner&) = delete;

  const LearnerConfig& config() const { return config_; }
  const envs::EnvSpec& spec() const { return config_.env; }

  ActorNet& actor(int agent) { return *actors_[config_.shared_policy ? 0 : static_cast<std::size_t>(agent)]; }
  int actor_count() const { return static_cast<int>(actors_.size()); }
  int actor_input_dim() const;
  nn::Mlp& critic() { return critic_; }
  nn::Mlp& critic_target() { return critic_target_; }
  nn::Mlp& critic_w() { return critic_w_; }
  nn::Mlp& critic_w_target() { return critic_w_target_; }
  statemodel::StateModel& state_model() { return *state_model_; }
  statemodel::EdTrainer& ed_trainer() { return *ed_trainer_; }

  /// [obs, one-hot previous action, one-hot agent id (shared actors only), belief]
  Var actor_input(Tape& tape, int agent, Var obs, Var prev_actions, Var belief);

  /// o_i concatenated with filtered observations of the other agents (ascending).
  Var hat_state(Tape& tape, int agent, const std::vector<Var>& obs, FilterMode mode);

  /// Builds actor, critic and filtered-critic losses of a batch onto `tape`.
  /// Honours the ablation flags (absent losses are nullopt).
  RlLosses rl_losses(Tape& tape, const RolloutTensors& rt);

  /// Per agent log-probability of the taken action and policy entropy, rows x 1.
  void policy_terms(Tape& tape, const RolloutTensors& rt, std::vector<Var>& log_probs, std::vector<Var>& entropies);

  Var critic_loss(Tape& tape, const RolloutTensors& rt);
  Var critic_w_loss(Tape& tape, const RolloutTensors& rt);
  Var actor_loss(Tape& tape, const RolloutTensors& rt, const std::vector<Matrix>& advantages, double* entropy = nullptr);
  std::vector<Matrix> advantages(const RolloutTensors& rt);

  /// One optimization round on an on-policy batch: actors (and, through the
  /// belief, encoders), the standard critic and the filtered-state critic with
  /// its filters. Refreshes the target critics every n_tup rounds.
  LossReport train_step(const envs::TrajectoryBatch& batch);
  LossReport train_step(const RolloutTensors& rt);

  void target_update();
  void filter_target_update() { state_model_->filter_target_update(); }

  std::uint64_t updates() const { return updates_; }
  std::uint64_t target_updates() const { return target_updates_; }

  nn::ParamGroup actor_params();
  nn::ParamGroup critic_params();
  nn::ParamGroup critic_target_params();
  nn::ParamGroup critic_w_params();
  nn::ParamGroup critic_w_target_params();
  /// Every parameter array, including target copies (for snapshots).
  nn::ParamGroup all_params();
  /// Every array that some loss may train (excludes target copies).
  nn::ParamGroup trainable_params();

private:
  Matrix filtered_next_values(const RolloutTensors& rt, int agent);

  LearnerConfig config_;
  std::vector<std::unique_ptr<ActorNet>> actors_;
  nn::Mlp critic_;
  nn::Mlp critic_target_;
  nn::Mlp critic_w_;
  nn::Mlp critic_w_target_;
  std::unique_ptr<statemodel::StateModel> state_model_;
  std::unique_ptr<statemodel::EdTrainer> ed_trainer_;

  nn::Adam actor_opt_;
  nn::Adam belief_policy_opt_;
  nn::Adam critic_opt_;
  nn::Adam critic_w_opt_;
  nn::Adam filter_critic_opt_;
  std::uint64_t updates_ = 0;
  std::uint64_t target_updates_ = 0;
};

}  // namespace smpe::marl
