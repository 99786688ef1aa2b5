#pragma once

#include "smpe/envs/runner.hpp"
#include "smpe/explore/simhash.hpp"
#include "smpe/marl/learner.hpp"
#include "smpe/statemodel/ed_buffer.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace smpe::marl {

/// Everything the training loop needs. Defaults follow the gridforage column
/// of the hyperparameter table; env presets override a few of them.
struct TrainingConfig {
  std::string env = "2s-9x9-3p-2f";
  std::uint64_t horizon = 300000;
  std::uint64_t seed = 1;
  int n_envs = 10;

  double gamma = 0.99;
  double lr = 5e-4;
  double lr_ed = 5e-4;
  double lr_w = 5e-4;
  double lr_w_critic = 5e-5;
  double lambda_rec = 0.5;
  double lambda_kl = 0.1;
  double lambda_norm = 1.0;
  double beta = 0.1;
  double entropy_coef = 0.01;
  int n_step = 1;

  int hidden_dim = 128;
  int latent_dim = 32;
  int ed_hidden_dim = 64;
  bool shared_policy = true;

  std::uint64_t n_ed = 2000;        ///< env steps between ED updates
  std::size_t ed_capacity = 50000;  ///< N_D
  std::size_t ed_batch_size = 16;   ///< N_bs
  int n_tup = 100;                  ///< update rounds between critic target updates
  std::uint64_t n_wtup = 100000;    ///< env steps between filter target updates

  int hash_bits = 16;
  /// Hash the sampled belief ("sample") or its mean ("mean").
  std::string hash_input = "sample";
  bool reset_counts_on_ed_update = false;

  std::uint64_t metrics_interval = 1000;
  std::uint64_t eval_interval = 10000;
  int eval_episodes = 20;

  AblationFlags flags;

  bool operator==(const TrainingConfig&) const = default;
};

/// One metrics row. Loss columns average the updates inside the window; the ED
/// columns hold the most recent ED update (NaN before the first).
struct MetricsRow {
  std::uint64_t step = 0;
  std::uint64_t episodes = 0;
  /// Greedy evaluation return; NaN on rows without an evaluation.
  double eval_return = 0.0;
  /// Mean extrinsic return of training episodes finished in the window; NaN if none.
  double train_return = 0.0;
  double mean_intrinsic = 0.0;
  LossReport losses;
  std::uint64_t ed_updates = 0;
  std::uint64_t target_updates = 0;
  double wall_seconds = 0.0;
};

LearnerConfig learner_config(const TrainingConfig& config, const envs::EnvSpec& spec);

/// Greedy execution (z = mean belief, argmax action). Each agent reads only its
/// own observation, previous action, belief and recurrent state.
class GreedyPolicy : public envs::RolloutPolicy {
public:
  explicit GreedyPolicy(Learner& learner) : learner_(learner) {}
  void on_reset(std::span<const Matrix> obs) override;
  std::vector<std::vector<int>> act(std::span<const std::size_t> active, std::span<const Matrix> obs) override;
  void on_step(std::span<const std::size_t> active, std::span<envs::Transition* const> transitions) override;

private:
  Learner& learner_;
  std::vector<Matrix> hidden_;
  std::vector<Matrix> pending_hidden_;
  std::vector<Matrix> prev_actions_;
};

/// Seed of the periodic greedy evaluations of a training run.
std::uint64_t evaluation_seed(const TrainingConfig& config);

/// Mean extrinsic episodic return of greedy episodes, played in lockstep. The
/// result depends only on (parameters, seed, episodes).
double evaluate_policy(Learner& learner, const std::string& env, int episodes, std::uint64_t seed,
                       std::vector<double>* returns = nullptr);

/// The full training loop: act, step, intrinsic rewards, store, RL update per
/// synchronized batch, scheduled ED and target updates.
class Trainer {
public:
  using RowSink = std::function<void(const MetricsRow&)>;

  explicit Trainer(const TrainingConfig& config);
  ~Trainer();
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  /// Runs until `config.horizon` joint transitions have been consumed.
  void run(const RowSink& sink);

  Learner& learner() { return *learner_; }
  const TrainingConfig& config() const { return config_; }
  std::uint64_t env_steps() const { return env_steps_; }
  std::uint64_t episodes_done() const { return episodes_done_; }
  std::uint64_t filter_target_updates() const { return filter_target_updates_; }
  const explore::IntrinsicRewarder& rewarder() const { return rewarder_; }
  const statemodel::EdBuffer& ed_buffer() const { return ed_buffer_; }
  /// Observations of the first env's first training episode (rows = agents), for embedding dumps.
  const std::vector<Matrix>& sample_episode() const { return sample_episode_; }

  /// Called by the acting policy after each synchronized env step.
  void after_env_step(std::span<const std::size_t> active, std::span<envs::Transition* const> transitions,
                      const std::vector<Matrix>& next_beliefs, const std::vector<Matrix>& next_means);

private:
  class TrainPolicy;

  TrainingConfig config_;
  envs::EnvSpec spec_;
  std::unique_ptr<Learner> learner_;
  std::unique_ptr<envs::ParallelRunner> runner_;
  explore::IntrinsicRewarder rewarder_;
  statemodel::EdBuffer ed_buffer_;
  std::mt19937_64 ed_rng_;
  std::unique_ptr<TrainPolicy> policy_;

  std::uint64_t env_steps_ = 0;
  std::uint64_t episodes_done_ = 0;
  std::uint64_t filter_target_updates_ = 0;
  std::optional<statemodel::EdReport> last_ed_;
  double intrinsic_sum_ = 0.0;
  double intrinsic_count_ = 0.0;
  std::vector<Matrix> sample_episode_;
};

}  // namespace smpe::marl
