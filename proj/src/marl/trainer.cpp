#include "smpe/marl/trainer.hpp"

#include "smpe/envs/spread.hpp"
#include "smpe/errors.hpp"

#include <chrono>
#include <cmath>

namespace smpe::marl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Gathers row `agent` of each listed env's observation matrix.
Matrix gather(std::span<const Matrix> per_env, std::span<const std::size_t> envs, int agent) {
  Matrix out(static_cast<Eigen::Index>(envs.size()), per_env[envs[0]].cols());
  for (std::size_t k = 0; k < envs.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = per_env[envs[k]].row(agent);
  return out;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> envs) {
  Matrix out(static_cast<Eigen::Index>(envs.size()), m.cols());
  for (std::size_t k = 0; k < envs.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(envs[k]));
  return out;
}

/// One recurrent actor step on a batch of rows; returns logits, writes the new hidden state.
Matrix actor_forward(Learner& learner, int agent, const Matrix& obs, const Matrix& prev, const Matrix& belief,
                     const Matrix& hidden, Matrix& new_hidden) {
  Tape tape;
  ActorNet& net = learner.actor(agent);
  const Var in = learner.actor_input(tape, agent, tape.constant(obs), tape.constant(prev), tape.constant(belief));
  const Var h = net.recur(tape, net.embed(tape, in, false), tape.constant(hidden), false);
  new_hidden = tape.value(h);
  const Matrix logits = tape.value(net.logits(tape, h, false));
  if (!logits.allFinite()) throw TrainingFault("non-finite actor logits for agent " + std::to_string(agent));
  return logits;
}

/// Belief mean and sample (mean + sigma * noise) for a batch of observations.
void encode_rows(Learner& learner, int agent, const Matrix& obs, const Matrix& noise, Matrix& sample, Matrix& mean) {
  const int latent = learner.config().latent_dim;
  if (learner.config().zero_belief) {
    sample = Matrix::Zero(obs.rows(), latent);
    mean = sample;
    return;
  }
  Tape tape;
  const nn::GaussianHead head = learner.state_model().encode(tape, agent, tape.constant(obs), false);
  mean = tape.value(head.mean);
  sample = tape.value(nn::gaussian_sample(tape, head, noise));
}

int argmax_row(const Matrix& logits, Eigen::Index r) {
  int best = 0;
  for (Eigen::Index a = 1; a < logits.cols(); ++a)
    if (logits(r, a) > logits(r, best)) best = static_cast<int>(a);
  return best;
}

int sample_row(const Matrix& logits, Eigen::Index r, std::mt19937_64& rng) {
  const double mx = logits.row(r).maxCoeff();
  const Eigen::RowVectorXd p = (logits.row(r).array() - mx).exp().matrix();
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * p.sum();
  for (Eigen::Index a = 0; a < p.size(); ++a) {
    u -= p(a);
    if (u < 0.0) return static_cast<int>(a);
  }
  return static_cast<int>(p.size() - 1);
}

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = nd(rng);
  return m;
}

}  // namespace

LearnerConfig learner_config(const TrainingConfig& c, const envs::EnvSpec& spec) {
  LearnerConfig l;
  l.env = spec;
  l.hidden_dim = c.hidden_dim;
  l.latent_dim = c.latent_dim;
  l.ed_hidden_dim = c.ed_hidden_dim;
  l.shared_policy = c.shared_policy;
  l.gamma = c.gamma;
  l.lr = c.lr;
  l.lr_ed = c.lr_ed;
  l.lr_w = c.lr_w;
  l.lr_w_critic = c.lr_w_critic;
  l.lambda_rec = c.lambda_rec;
  l.lambda_kl = c.lambda_kl;
  l.lambda_norm = c.lambda_norm;
  l.entropy_coef = c.entropy_coef;
  l.n_step = c.n_step;
  l.n_tup = c.n_tup;
  l.ed_batch_size = c.ed_batch_size;
  l.flags = c.flags;
  l.seed = c.seed;
  return l;
}

// ---------------------------------------------------------------------------
// Greedy evaluation

void GreedyPolicy::on_reset(std::span<const Matrix> obs) {
  const auto& spec = learner_.spec();
  const auto B = static_cast<Eigen::Index>(obs.size());
  hidden_.assign(static_cast<std::size_t>(spec.n_agents), Matrix::Zero(B, learner_.config().hidden_dim));
  pending_hidden_ = hidden_;
  prev_actions_.assign(static_cast<std::size_t>(spec.n_agents), Matrix::Zero(B, spec.n_actions));
}

std::vector<std::vector<int>> GreedyPolicy::act(std::span<const std::size_t> active, std::span<const Matrix> obs) {
  const int n = learner_.spec().n_agents;
  std::vector<std::vector<int>> actions(active.size(), std::vector<int>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const Matrix o = gather(obs, active, i);
    Matrix z;
    Matrix mean;
    encode_rows(learner_, i, o, Matrix::Zero(o.rows(), learner_.config().latent_dim), z, mean);
    Matrix h_new;
    const Matrix logits = actor_forward(learner_, i, o, gather_rows(prev_actions_[ii], active), mean,
                                        gather_rows(hidden_[ii], active), h_new);
    for (std::size_t k = 0; k < active.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      actions[k][ii] = argmax_row(logits, kk);
      pending_hidden_[ii].row(static_cast<Eigen::Index>(active[k])) = h_new.row(kk);
    }
  }
  return actions;
}

void GreedyPolicy::on_step(std::span<const std::size_t> active, std::span<envs::Transition* const> transitions) {
  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto e = static_cast<Eigen::Index>(active[k]);
    for (std::size_t i = 0; i < hidden_.size(); ++i) {
      hidden_[i].row(e) = pending_hidden_[i].row(e);
      prev_actions_[i].row(e).setZero();
      prev_actions_[i](e, transitions[k]->actions[i]) = 1.0;
    }
  }
}

std::uint64_t evaluation_seed(const TrainingConfig& config) { return envs::mix_seed(config.seed, 0xE7A1); }

double evaluate_policy(Learner& learner, const std::string& env, int episodes, std::uint64_t seed,
                       std::vector<double>* returns) {
  if (episodes < 1) throw UsageError("evaluation needs at least one episode");
  std::vector<std::unique_ptr<envs::Env>> pool;
  pool.push_back(envs::make_env(env));
  const envs::EnvSpec spec = pool.front()->spec();
  const envs::EnvSpec& want = learner.spec();
  if (spec.n_agents != want.n_agents || spec.obs_dim != want.obs_dim || spec.n_actions != want.n_actions ||
      spec.state_dim != want.state_dim) {
    throw ConfigError("parameters do not match environment '" + env + "'");
  }
  // Env k of the runner plays episode k; its seed depends only on (seed, k).
  for (int k = 1; k < episodes; ++k) pool.push_back(pool.front()->clone());
  envs::ParallelRunner runner(std::move(pool), seed);
  GreedyPolicy policy(learner);
  const envs::TrajectoryBatch batch = runner.run(policy);
  double total = 0.0;
  for (const auto& ep : batch.episodes) {
    double ret = 0.0;
    for (const auto& tr : ep) ret += tr.reward;
    if (returns) returns->push_back(ret);
    total += ret;
  }
  return total / episodes;
}

// ---------------------------------------------------------------------------
// Training

/// Stochastic acting with sampled beliefs. Noise for each belief sample is
/// stored on the transition so the update can rebuild the same z.
class Trainer::TrainPolicy : public envs::RolloutPolicy {
public:
  TrainPolicy(Trainer& trainer, std::size_t n_envs, std::uint64_t seed) : trainer_(trainer) {
    for (std::size_t e = 0; e < n_envs; ++e) rngs_.emplace_back(envs::mix_seed(seed, e));
  }

  void on_reset(std::span<const Matrix> obs) override {
    Learner& learner = *trainer_.learner_;
    const auto& spec = learner.spec();
    const auto n = static_cast<std::size_t>(spec.n_agents);
    const auto B = static_cast<Eigen::Index>(obs.size());
    const int L = learner.config().latent_dim;
    hidden_.assign(n, Matrix::Zero(B, learner.config().hidden_dim));
    pending_hidden_ = hidden_;
    prev_actions_.assign(n, Matrix::Zero(B, spec.n_actions));
    noise_.assign(n, Matrix::Zero(B, L));
    belief_.assign(n, Matrix::Zero(B, L));
    for (Eigen::Index e = 0; e < B; ++e) draw_noise(static_cast<std::size_t>(e));
    std::vector<std::size_t> all(obs.size());
    for (std::size_t e = 0; e < all.size(); ++e) all[e] = e;
    for (int i = 0; i < spec.n_agents; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      Matrix mean;
      encode_rows(learner, i, gather(obs, all, i), noise_[ii], belief_[ii], mean);
    }
  }

  std::vector<std::vector<int>> act(std::span<const std::size_t> active, std::span<const Matrix> obs) override {
    Learner& learner = *trainer_.learner_;
    const int n = learner.spec().n_agents;
    std::vector<std::vector<int>> actions(active.size(), std::vector<int>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      Matrix h_new;
      const Matrix logits =
          actor_forward(learner, i, gather(obs, active, i), gather_rows(prev_actions_[ii], active),
                        gather_rows(belief_[ii], active), gather_rows(hidden_[ii], active), h_new);
      for (std::size_t k = 0; k < active.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        actions[k][ii] = sample_row(logits, kk, rngs_[active[k]]);
        pending_hidden_[ii].row(static_cast<Eigen::Index>(active[k])) = h_new.row(kk);
      }
    }
    return actions;
  }

  void on_step(std::span<const std::size_t> active, std::span<envs::Transition* const> transitions) override {
    Learner& learner = *trainer_.learner_;
    const int n = learner.spec().n_agents;
    const int L = learner.config().latent_dim;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const std::size_t e = active[k];
      const auto ee = static_cast<Eigen::Index>(e);
      envs::Transition& tr = *transitions[k];
      tr.belief_noise.resize(n, L);
      for (int i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        tr.belief_noise.row(i) = noise_[ii].row(ee);
        hidden_[ii].row(ee) = pending_hidden_[ii].row(ee);
        prev_actions_[ii].row(ee).setZero();
        prev_actions_[ii](ee, tr.actions[ii]) = 1.0;
      }
      draw_noise(e);
    }
    std::vector<Matrix> next_obs;
    next_obs.reserve(active.size());
    std::vector<std::size_t> idx(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
      next_obs.push_back(transitions[k]->next_obs);
      idx[k] = k;
    }
    std::vector<Matrix> next_z(static_cast<std::size_t>(n));
    std::vector<Matrix> next_mean(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      encode_rows(learner, i, gather(next_obs, idx, i), gather_rows(noise_[ii], active), next_z[ii], next_mean[ii]);
      for (std::size_t k = 0; k < active.size(); ++k)
        belief_[ii].row(static_cast<Eigen::Index>(active[k])) = next_z[ii].row(static_cast<Eigen::Index>(k));
    }
    trainer_.after_env_step(active, transitions, next_z, next_mean);
  }

private:
  void draw_noise(std::size_t e) {
    const Matrix z = normal_matrix(static_cast<Eigen::Index>(noise_.size()), noise_.front().cols(), rngs_[e]);
    for (std::size_t i = 0; i < noise_.size(); ++i) noise_[i].row(static_cast<Eigen::Index>(e)) = z.row(static_cast<Eigen::Index>(i));
  }

  Trainer& trainer_;
  std::vector<std::mt19937_64> rngs_;
  std::vector<Matrix> hidden_;
  std::vector<Matrix> pending_hidden_;
  std::vector<Matrix> prev_actions_;
  std::vector<Matrix> noise_;
  std::vector<Matrix> belief_;
};

Trainer::Trainer(const TrainingConfig& config)
    : config_(config),
      spec_(envs::make_env(config.env)->spec()),
      rewarder_(spec_.n_agents, config.latent_dim, spec_.obs_dim, config.hash_bits, envs::mix_seed(config.seed, 0x5EED)),
      ed_buffer_(config.ed_capacity),
      ed_rng_(envs::mix_seed(config.seed, 0xED)) {
  if (config_.n_envs < 1) throw ConfigError("n_envs must be >= 1");
  if (config_.hash_input != "sample" && config_.hash_input != "mean")
    throw ConfigError("hash_input must be 'sample' or 'mean'");
  learner_ = std::make_unique<Learner>(learner_config(config_, spec_));
  std::vector<std::unique_ptr<envs::Env>> pool;
  for (int e = 0; e < config_.n_envs; ++e) pool.push_back(envs::make_env(config_.env));
  runner_ = std::make_unique<envs::ParallelRunner>(std::move(pool), envs::mix_seed(config_.seed, 0xE1));
  policy_ = std::make_unique<TrainPolicy>(*this, static_cast<std::size_t>(config_.n_envs),
                                          envs::mix_seed(config_.seed, 0xAC));
}

Trainer::~Trainer() = default;

void Trainer::after_env_step(std::span<const std::size_t> active, std::span<envs::Transition* const> transitions,
                             const std::vector<Matrix>& next_beliefs, const std::vector<Matrix>& next_means) {
  const int n = spec_.n_agents;
  const bool use_intr = !config_.flags.no_intr;
  const double beta = use_intr ? config_.beta : 0.0;
  const bool hash_mean = config_.hash_input == "mean";
  for (std::size_t k = 0; k < active.size(); ++k) {
    envs::Transition& tr = *transitions[k];
    const auto kk = static_cast<Eigen::Index>(k);
    tr.intrinsic.assign(static_cast<std::size_t>(n), 0.0);
    tr.mixed_reward.assign(static_cast<std::size_t>(n), tr.reward);
    for (int i = 0; i < n; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      if (use_intr) {
        double rh;
        if (config_.flags.obs_rew) {
          const nn::RowVector o = tr.next_obs.row(i);
          rh = rewarder_.reward_from_obs(i, std::span<const double>(o.data(), static_cast<std::size_t>(o.size())));
        } else {
          const nn::RowVector z = hash_mean ? nn::RowVector(next_means[ii].row(kk)) : nn::RowVector(next_beliefs[ii].row(kk));
          rh = rewarder_.reward(i, std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
        }
        tr.intrinsic[ii] = rh;
        tr.mixed_reward[ii] = explore::mix_reward(tr.reward, rh, beta);
      }
      intrinsic_sum_ += tr.intrinsic[ii];
      intrinsic_count_ += 1.0;
    }
    ed_buffer_.push(tr.obs);
  }

  const std::uint64_t before = env_steps_;
  env_steps_ += active.size();
  const std::uint64_t ed_due = nn::PeriodicSchedule(config_.n_ed).crossings(before, env_steps_);
  for (std::uint64_t u = 0; u < ed_due; ++u) {
    if (auto rep = learner_->ed_trainer().update(ed_buffer_, ed_rng_)) {
      last_ed_ = rep;
      if (config_.reset_counts_on_ed_update) rewarder_.reset_counts();
    }
  }
  const std::uint64_t w_due = nn::PeriodicSchedule(config_.n_wtup).crossings(before, env_steps_);
  for (std::uint64_t u = 0; u < w_due; ++u) {
    learner_->filter_target_update();
    ++filter_target_updates_;
  }
}

void Trainer::run(const RowSink& sink) {
  const auto start = std::chrono::steady_clock::now();
  const LearnerConfig& lc = learner_->config();
  const double l_kl = lc.flags.no_kl ? 0.0 : lc.lambda_kl;
  const double l_norm = lc.flags.no_L2_norm ? 0.0 : lc.lambda_norm;
  const std::uint64_t eval_seed = evaluation_seed(config_);

  LossReport acc;
  double n_updates = 0.0;
  double ret_sum = 0.0;
  double ret_count = 0.0;
  std::uint64_t last_row_step = 0;

  while (env_steps_ < config_.horizon) {
    const std::uint64_t before = env_steps_;
    const envs::TrajectoryBatch batch =
        runner_->run(*policy_, static_cast<std::size_t>(config_.horizon - env_steps_));
    if (sample_episode_.empty() && !batch.episodes.empty()) {
      for (const auto& tr : batch.episodes.front()) sample_episode_.push_back(tr.obs);
    }
    for (const auto& ep : batch.episodes) {
      if (ep.empty()) continue;
      ++episodes_done_;
      double ret = 0.0;
      for (const auto& tr : ep) ret += tr.reward;
      ret_sum += ret;
      ret_count += 1.0;
    }
    const LossReport r = learner_->train_step(batch);
    acc.actor += r.actor;
    acc.critic += r.critic;
    acc.critic_w += r.critic_w;
    acc.entropy += r.entropy;
    n_updates += 1.0;

    const bool final = env_steps_ >= config_.horizon;
    const bool row_due = nn::PeriodicSchedule(config_.metrics_interval).crossings(before, env_steps_) > 0;
    if (!(row_due || final) || env_steps_ == last_row_step) continue;

    MetricsRow row;
    row.step = env_steps_;
    row.episodes = episodes_done_;
    const bool eval_due = final || nn::PeriodicSchedule(config_.eval_interval).crossings(before, env_steps_) > 0;
    row.eval_return = eval_due ? evaluate_policy(*learner_, config_.env, config_.eval_episodes, eval_seed) : kNaN;
    row.train_return = ret_count > 0.0 ? ret_sum / ret_count : kNaN;
    row.mean_intrinsic = intrinsic_count_ > 0.0 ? intrinsic_sum_ / intrinsic_count_ : 0.0;
    row.losses.actor = acc.actor / n_updates;
    row.losses.critic = acc.critic / n_updates;
    row.losses.critic_w = acc.critic_w / n_updates;
    row.losses.entropy = acc.entropy / n_updates;
    row.losses.rec = last_ed_ ? last_ed_->rec : kNaN;
    row.losses.kl = last_ed_ ? last_ed_->kl : kNaN;
    row.losses.norm = last_ed_ ? last_ed_->norm : kNaN;
    row.losses.encodings =
        row.losses.critic_w + lc.lambda_rec * row.losses.rec + l_norm * row.losses.norm + l_kl * row.losses.kl;
    row.losses.mean_intrinsic = row.mean_intrinsic;
    row.ed_updates = learner_->ed_trainer().updates();
    row.target_updates = learner_->target_updates();
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    sink(row);

    last_row_step = env_steps_;
    acc = LossReport{};
    n_updates = 0.0;
    ret_sum = 0.0;
    ret_count = 0.0;
    intrinsic_sum_ = 0.0;
    intrinsic_count_ = 0.0;
  }
}

}  // namespace smpe::marl
