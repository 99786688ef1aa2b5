#pragma once

#include "smpe/statemodel/state_model.hpp"

#include <ostream>
#include <random>
#include <vector>

namespace smpe::statemodel {

struct EmbeddingRow {
  int agent = 0;
  int t = 0;
  nn::RowVector z;
  nn::RowVector mean;
  /// Mean filter weight over features, one entry per other agent (ascending).
  std::vector<double> filter_means;
};

/// Beliefs and filter summaries of `agent` along an episode, given the joint
/// observation (rows = agents) at each step. In evaluation mode z is the mean.
std::vector<EmbeddingRow> dump_embeddings(StateModel& model, int agent, const std::vector<Matrix>& episode_obs,
                                          bool eval_mode, std::mt19937_64& rng);

/// Tab-separated, one header line:
/// agent_id t z_0..z_{L-1} mu_0..mu_{L-1} w_mean_<j>...
void write_embeddings(std::ostream& out, const std::vector<EmbeddingRow>& rows, int latent_dim, int n_others);

}  // namespace smpe::statemodel
