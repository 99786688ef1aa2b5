#pragma once

#include "smpe/nncore/params.hpp"

#include <deque>
#include <random>
#include <vector>

namespace smpe::statemodel {

using nn::Matrix;

/// Batch for encoder-decoder training: one matrix per agent (rows = samples),
/// plus the standard-normal noise for each agent's belief sample.
struct EdBatch {
  std::vector<Matrix> obs;
  std::vector<Matrix> noise;

  Eigen::Index size() const { return obs.empty() ? 0 : obs.front().rows(); }
};

/// FIFO replay of joint observations (one row per agent) for ED training.
class EdBuffer {
public:
  explicit EdBuffer(std::size_t capacity);

  void push(const Matrix& joint_obs);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Matrix& at(std::size_t i) const { return items_[i]; }

  /// Uniform sample of `n` distinct entries. Throws UsageError if fewer are stored.
  EdBatch sample(std::size_t n, int latent_dim, std::mt19937_64& rng) const;

private:
  std::size_t capacity_;
  std::deque<Matrix> items_;
};

/// Builds a batch from explicit joint observations (rows = agents) with fresh noise.
EdBatch make_ed_batch(const std::vector<const Matrix*>& joint_obs, int latent_dim, std::mt19937_64& rng);

}  // namespace smpe::statemodel
