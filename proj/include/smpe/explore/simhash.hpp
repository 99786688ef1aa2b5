#pragma once

#include "smpe/nncore/params.hpp"

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace smpe::explore {

using nn::Matrix;

/// Locality-sensitive hash: bit b of the key is 1 iff row b of a fixed
/// Gaussian projection has a non-negative dot product with the input.
class SimHash {
public:
  SimHash(int bits, int dim, std::uint64_t seed);

  std::uint64_t key(std::span<const double> v) const;
  int bits() const { return static_cast<int>(projection_.rows()); }
  int dim() const { return static_cast<int>(projection_.cols()); }
  const Matrix& projection() const { return projection_; }

private:
  Matrix projection_;
};

/// Visit counts per hash key. Absent keys count as zero.
class CountTable {
public:
  /// Increments and returns the new count.
  std::uint64_t increment(std::uint64_t key) { return ++counts_[key]; }
  std::uint64_t count(std::uint64_t key) const;
  std::size_t size() const { return counts_.size(); }
  void clear() { counts_.clear(); }

private:
  std::unordered_map<std::uint64_t, std::uint64_t> counts_;
};

/// 1 / sqrt(n) for a visit count n >= 1.
double intrinsic_reward(std::uint64_t count);

/// r + beta * r_hat.
inline double mix_reward(double r, double r_hat, double beta) { return r + beta * r_hat; }

enum class HashSource { kBelief, kObservation };

/// Per-agent count-based bonus. Belief-mode and observation-mode hashing use
/// separate projections and separate tables.
class IntrinsicRewarder {
public:
  IntrinsicRewarder(int n_agents, int latent_dim, int obs_dim, int bits, std::uint64_t seed);

  /// Counts the visit, then returns 1/sqrt(count) for the belief's key.
  double reward(int agent, std::span<const double> z);
  /// Same pipeline over the raw observation.
  double reward_from_obs(int agent, std::span<const double> obs);

  double reward(HashSource source, int agent, std::span<const double> v) {
    return source == HashSource::kBelief ? reward(agent, v) : reward_from_obs(agent, v);
  }

  const CountTable& belief_table(int agent) const { return belief_tables_[static_cast<std::size_t>(agent)]; }
  const CountTable& obs_table(int agent) const { return obs_tables_[static_cast<std::size_t>(agent)]; }
  const SimHash& belief_hash(int agent) const { return belief_hash_[static_cast<std::size_t>(agent)]; }
  const SimHash& obs_hash(int agent) const { return obs_hash_[static_cast<std::size_t>(agent)]; }
  std::size_t total_keys() const;
  void reset_counts();

private:
  std::vector<SimHash> belief_hash_;
  std::vector<SimHash> obs_hash_;
  std::vector<CountTable> belief_tables_;
  std::vector<CountTable> obs_tables_;
};

}  // namespace smpe::explore
