#include "smpe/nncore/layers.hpp"

#include "smpe/errors.hpp"

#include <cmath>

namespace smpe::nn {

Linear::Linear(std::string name, int in, int out)
    : weight(name + ".weight", out, in), bias(name + ".bias", 1, out) {
  if (in <= 0 || out <= 0) throw ConfigError("Linear " + name + ": dimensions must be positive");
}

void Linear::init_uniform(std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < weight.value.size(); ++i) weight.value.data()[i] = dist(rng);
  for (Eigen::Index i = 0; i < bias.value.size(); ++i) bias.value.data()[i] = dist(rng);
}

Mlp::Mlp(std::string name, const std::vector<int>& sizes, Head head) : head_(head) {
  if (sizes.size() < 2) throw ConfigError("Mlp " + name + ": need at least input and output sizes");
  layers_.reserve(sizes.size() - 1);
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    layers_.emplace_back(name + "." + std::to_string(i), sizes[i], sizes[i + 1]);
  }
}

Var Mlp::forward(Tape& tape, Var x, bool trainable) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = tape.linear(x, layers_[i], trainable);
    if (i + 1 < layers_.size()) x = tape.relu(x);
  }
  return head_ == Head::kSigmoid ? tape.sigmoid(x) : x;
}

void Mlp::init(std::mt19937_64& rng) {
  for (Linear& l : layers_) l.init_uniform(rng);
}

void Mlp::collect(ParamGroup& group) {
  for (Linear& l : layers_) l.collect(group);
}

GruCell::GruCell(std::string name, int in, int hidden)
    : input_(name + ".input", in, 3 * hidden), recurrent_(name + ".recurrent", hidden, 3 * hidden), hidden_(hidden) {}

void GruCell::init(std::mt19937_64& rng) {
  // PyTorch initializes every GRU tensor from U(-1/sqrt(hidden), 1/sqrt(hidden)).
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Linear* l : {&input_, &recurrent_}) {
    for (Eigen::Index i = 0; i < l->weight.value.size(); ++i) l->weight.value.data()[i] = dist(rng);
    for (Eigen::Index i = 0; i < l->bias.value.size(); ++i) l->bias.value.data()[i] = dist(rng);
  }
}

void GruCell::collect(ParamGroup& group) {
  input_.collect(group);
  recurrent_.collect(group);
}

Var GruCell::step(Tape& tape, Var x, Var h, bool trainable) {
  if (tape.value(h).cols() != hidden_) {
    throw ConfigError("GruCell: hidden state has " + std::to_string(tape.value(h).cols()) +
                      " features, expected " + std::to_string(hidden_));
  }
  const Var gi = tape.linear(x, input_, trainable);
  const Var gh = tape.linear(h, recurrent_, trainable);
  const Var r = tape.sigmoid(tape.add(tape.slice_cols(gi, 0, hidden_), tape.slice_cols(gh, 0, hidden_)));
  const Var u = tape.sigmoid(tape.add(tape.slice_cols(gi, hidden_, hidden_), tape.slice_cols(gh, hidden_, hidden_)));
  const Var n = tape.tanh(
      tape.add(tape.slice_cols(gi, 2 * hidden_, hidden_), tape.mul(r, tape.slice_cols(gh, 2 * hidden_, hidden_))));
  // h' = n + u * (h - n)
  const Var next = tape.add(n, tape.mul(u, tape.sub(h, n)));
  if (!tape.value(next).allFinite()) throw TrainingFault("GruCell: non-finite hidden state");
  return next;
}

GaussianHead gaussian_head(Tape& tape, Var raw, int latent_dim) {
  if (tape.value(raw).cols() != 2 * latent_dim) {
    throw ConfigError("gaussian_head: expected " + std::to_string(2 * latent_dim) + " columns");
  }
  return GaussianHead{tape.slice_cols(raw, 0, latent_dim),
                      tape.clamp(tape.slice_cols(raw, latent_dim, latent_dim), kLogSigmaMin, kLogSigmaMax)};
}

Var gaussian_sample(Tape& tape, const GaussianHead& head, const Matrix& noise) {
  const Var eps = tape.constant(noise);
  return tape.add(head.mean, tape.mul(tape.exp(head.log_sigma), eps));
}

}  // namespace smpe::nn
