#include "smpe/statemodel/embeddings.hpp"

#include <iomanip>

namespace smpe::statemodel {

std::vector<EmbeddingRow> dump_embeddings(StateModel& model, int agent, const std::vector<Matrix>& episode_obs,
                                          bool eval_mode, std::mt19937_64& rng) {
  const StateModelDims& d = model.dims();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<EmbeddingRow> rows;
  rows.reserve(episode_obs.size());
  for (std::size_t t = 0; t < episode_obs.size(); ++t) {
    const Matrix& joint = episode_obs[t];
    Tape tape;
    const Var own = tape.constant(joint.row(agent));
    const GaussianHead head = model.encode(tape, agent, own, false);
    Matrix noise = Matrix::Zero(1, d.latent_dim);
    if (!eval_mode) {
      for (Eigen::Index k = 0; k < noise.size(); ++k) noise.data()[k] = normal(rng);
    }
    const Var z = nn::gaussian_sample(tape, head, noise);
    EmbeddingRow row;
    row.agent = agent;
    row.t = static_cast<int>(t);
    row.z = tape.value(z).row(0);
    row.mean = tape.value(head.mean).row(0);
    for (int j : others_of(agent, d.n_agents)) {
      const Var w = model.filters(tape, agent, tape.constant(joint.row(j)), false, false);
      row.filter_means.push_back(tape.value(w).mean());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_embeddings(std::ostream& out, const std::vector<EmbeddingRow>& rows, int latent_dim, int n_others) {
  out << "agent_id\tt";
  for (int k = 0; k < latent_dim; ++k) out << "\tz_" << k;
  for (int k = 0; k < latent_dim; ++k) out << "\tmu_" << k;
  for (int k = 0; k < n_others; ++k) out << "\tw_mean_" << k;
  out << '\n';
  out << std::setprecision(17);
  for (const EmbeddingRow& r : rows) {
    out << r.agent << '\t' << r.t;
    for (Eigen::Index k = 0; k < r.z.size(); ++k) out << '\t' << r.z(k);
    for (Eigen::Index k = 0; k < r.mean.size(); ++k) out << '\t' << r.mean(k);
    for (double w : r.filter_means) out << '\t' << w;
    out << '\n';
  }
}

}  // namespace smpe::statemodel
