#include "smpe/statemodel/ed_buffer.hpp"

#include "smpe/errors.hpp"

#include <algorithm>
#include <numeric>

namespace smpe::statemodel {

EdBuffer::EdBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("EdBuffer: capacity must be positive");
}

void EdBuffer::push(const Matrix& joint_obs) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(joint_obs);
}

EdBatch make_ed_batch(const std::vector<const Matrix*>& joint_obs, int latent_dim, std::mt19937_64& rng) {
  EdBatch batch;
  if (joint_obs.empty()) return batch;
  const Eigen::Index n_agents = joint_obs.front()->rows();
  const Eigen::Index obs_dim = joint_obs.front()->cols();
  const auto rows = static_cast<Eigen::Index>(joint_obs.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index a = 0; a < n_agents; ++a) {
    Matrix o(rows, obs_dim);
    for (Eigen::Index r = 0; r < rows; ++r) o.row(r) = joint_obs[static_cast<std::size_t>(r)]->row(a);
    batch.obs.push_back(std::move(o));
    Matrix eps(rows, latent_dim);
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = normal(rng);
    batch.noise.push_back(std::move(eps));
  }
  return batch;
}

EdBatch EdBuffer::sample(std::size_t n, int latent_dim, std::mt19937_64& rng) const {
  if (n > items_.size()) {
    throw UsageError("EdBuffer: requested " + std::to_string(n) + " samples from " + std::to_string(items_.size()));
  }
  std::vector<std::size_t> all(items_.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> picked;
  picked.reserve(n);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), n, rng);
  std::vector<const Matrix*> rows;
  rows.reserve(n);
  for (std::size_t i : picked) rows.push_back(&items_[i]);
  return make_ed_batch(rows, latent_dim, rng);
}

}  // namespace smpe::statemodel
