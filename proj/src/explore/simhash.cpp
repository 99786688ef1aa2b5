#include "smpe/explore/simhash.hpp"

#include "smpe/envs/env.hpp"
#include "smpe/errors.hpp"

#include <cmath>
#include <random>

namespace smpe::explore {

SimHash::SimHash(int bits, int dim, std::uint64_t seed) {
  if (bits < 1 || bits > 64) throw ConfigError("SimHash: bit count must be in [1, 64]");
  if (dim < 1) throw ConfigError("SimHash: input dimension must be positive");
  projection_.resize(bits, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < projection_.size(); ++i) projection_.data()[i] = normal(rng);
}

std::uint64_t SimHash::key(std::span<const double> v) const {
  if (static_cast<Eigen::Index>(v.size()) != projection_.cols()) {
    throw UsageError("SimHash: expected " + std::to_string(projection_.cols()) + " inputs, got " +
                     std::to_string(v.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
  const Eigen::VectorXd proj = projection_ * x;
  std::uint64_t k = 0;
  for (Eigen::Index b = 0; b < proj.size(); ++b) {
    if (proj(b) >= 0.0) k |= std::uint64_t{1} << b;
  }
  return k;
}

std::uint64_t CountTable::count(std::uint64_t key) const {
  const auto it = counts_.find(key);
  return it == counts_.end() ? 0 : it->second;
}

double intrinsic_reward(std::uint64_t count) {
  if (count == 0) throw UsageError("intrinsic_reward: count must be at least 1");
  return 1.0 / std::sqrt(static_cast<double>(count));
}

IntrinsicRewarder::IntrinsicRewarder(int n_agents, int latent_dim, int obs_dim, int bits, std::uint64_t seed) {
  for (int i = 0; i < n_agents; ++i) {
    const auto a = static_cast<std::uint64_t>(i);
    belief_hash_.emplace_back(bits, latent_dim, envs::mix_seed(seed, 2 * a));
    obs_hash_.emplace_back(bits, obs_dim, envs::mix_seed(seed, 2 * a + 1));
  }
  belief_tables_.resize(static_cast<std::size_t>(n_agents));
  obs_tables_.resize(static_cast<std::size_t>(n_agents));
}

double IntrinsicRewarder::reward(int agent, std::span<const double> z) {
  const auto i = static_cast<std::size_t>(agent);
  return intrinsic_reward(belief_tables_[i].increment(belief_hash_[i].key(z)));
}

double IntrinsicRewarder::reward_from_obs(int agent, std::span<const double> obs) {
  const auto i = static_cast<std::size_t>(agent);
  return intrinsic_reward(obs_tables_[i].increment(obs_hash_[i].key(obs)));
}

std::size_t IntrinsicRewarder::total_keys() const {
  std::size_t n = 0;
  for (const CountTable& t : belief_tables_) n += t.size();
  for (const CountTable& t : obs_tables_) n += t.size();
  return n;
}

void IntrinsicRewarder::reset_counts() {
  for (CountTable& t : belief_tables_) t.clear();
  for (CountTable& t : obs_tables_) t.clear();
}

}  // namespace smpe::explore
