#pragma once

#include "smpe/nncore/adam.hpp"
#include "smpe/nncore/layers.hpp"
#include "smpe/statemodel/ed_buffer.hpp"

#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace smpe::statemodel {

using nn::GaussianHead;
using nn::ParamGroup;
using nn::Tape;
using nn::Var;

struct StateModelDims {
  int n_agents = 2;
  int obs_dim = 9;
  int latent_dim = 32;
  int hidden_dim = 64;
};

/// One agent's encoder q(z | o_i), decoder p(o_-i | z), agent-modelling filter
/// network and its frozen target copy. Nothing is shared between agents.
struct AgentModel {
  AgentModel(int agent, const StateModelDims& dims);

  nn::Mlp encoder;
  nn::Mlp decoder;
  nn::Mlp filter;
  nn::Mlp filter_target;
};

class StateModel {
public:
  StateModel(const StateModelDims& dims, std::uint64_t seed);
  StateModel(const StateModel&) = delete;
  StateModel& operator=(const StateModel&) = delete;

  const StateModelDims& dims() const { return dims_; }

  /// Gaussian parameters of the belief from the agent's current observation only.
  GaussianHead encode(Tape& tape, int agent, Var obs, bool trainable = true);
  /// Predicted observations of the other agents, ascending index, (N-1)*obs_dim columns.
  Var decode(Tape& tape, int agent, Var z, bool trainable = true);
  /// sigmoid(filter_i(o_j)) for one other agent's observations. The target
  /// network never receives gradient.
  Var filters(Tape& tape, int agent, Var other_obs, bool use_target, bool trainable = true);

  AgentModel& agent(int i) { return *agents_[static_cast<std::size_t>(i)]; }

  ParamGroup encoder_params(int agent);
  ParamGroup decoder_params(int agent);
  ParamGroup filter_params(int agent);
  ParamGroup filter_target_params(int agent);
  ParamGroup all_encoder_params();
  ParamGroup all_filter_params();
  ParamGroup all_filter_target_params();
  ParamGroup all_params();

  /// Hard copy filter -> filter_target for every agent.
  void filter_target_update();

private:
  StateModelDims dims_;
  std::vector<std::unique_ptr<AgentModel>> agents_;
};

/// Other-agent indices of `agent`, ascending.
std::vector<int> others_of(int agent, int n_agents);

/// Per-row sum over features of (target_filter * obs - filter * prediction)^2, B x 1.
Var filtered_reconstruction_error(Tape& tape, Var target_filter, Var obs, Var filter, Var prediction);

/// Closed-form KL(N(mu, sigma^2) || N(0, I)) summed over latent dims, meaned over rows.
Var kl_standard_normal(Tape& tape, const GaussianHead& head);
double kl_standard_normal(double mean, double log_sigma);

/// -||w||^2 summed over features, meaned over rows and over the given filter blocks.
Var norm_penalty(Tape& tape, std::span<const Var> filters);

struct EdLossTerms {
  Var rec;
  Var kl;
  /// Unset when filters are disabled.
  std::optional<Var> norm;
};

/// Reconstruction, KL and norm losses of one agent on an ED batch. With
/// `no_filters`, live and target filters are fixed to 1.
EdLossTerms ed_losses(Tape& tape, StateModel& model, int agent, const EdBatch& batch, bool no_filters);

struct EdHyper {
  double lambda_rec = 1.0;
  double lambda_kl = 0.1;
  double lambda_norm = 1.0;
  double lr_ed = 5e-4;
  double lr_w = 5e-4;
  std::size_t batch_size = 16;
  bool no_filters = false;
};

struct EdReport {
  double rec = 0.0;
  double kl = 0.0;
  double norm = 0.0;
};

/// Optimizes the encoder-decoders and filters. Per agent: (encoder, decoder)
/// minimize lambda_rec*L_rec + lambda_kl*L_kl, the filter network minimizes
/// lambda_rec*L_rec + lambda_norm*L_norm, each with its own Adam state.
class EdTrainer {
public:
  EdTrainer(StateModel& model, const EdHyper& hyper);

  /// One minimization step per agent on a sampled batch. Returns nullopt when
  /// the buffer holds fewer than batch_size entries.
  std::optional<EdReport> update(const EdBuffer& buffer, std::mt19937_64& rng);
  /// One step per agent on a given batch.
  EdReport update_on(const EdBatch& batch);

  /// Losses on a batch without updating anything (averaged over agents).
  EdReport evaluate(const EdBatch& batch);

  std::uint64_t updates() const { return updates_; }
  const EdHyper& hyper() const { return hyper_; }

private:
  StateModel& model_;
  EdHyper hyper_;
  std::vector<nn::Adam> ed_opt_;
  std::vector<nn::Adam> filter_opt_;
  std::uint64_t updates_ = 0;
};

}  // namespace smpe::statemodel
