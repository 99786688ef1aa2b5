#pragma once

#include "smpe/nncore/params.hpp"
#include "smpe/nncore/tape.hpp"

#include <random>
#include <string>
#include <vector>

namespace smpe::nn {

/// y = x W^T + b, with W stored out x in and b as a 1 x out row.
struct Linear {
  Linear() = default;
  Linear(std::string name, int in, int out);

  int in() const { return static_cast<int>(weight.value.cols()); }
  int out() const { return static_cast<int>(weight.value.rows()); }

  /// PyTorch default: U(-1/sqrt(in), 1/sqrt(in)) for weight and bias.
  void init_uniform(std::mt19937_64& rng);
  void collect(ParamGroup& group) { group.add(weight); group.add(bias); }

  Parameter weight;
  Parameter bias;
};

enum class Head { kLinear, kSigmoid };

/// Fully connected body: ReLU between layers, configured head on the output.
class Mlp {
public:
  Mlp() = default;
  /// sizes = {in, hidden..., out}
  Mlp(std::string name, const std::vector<int>& sizes, Head head);

  Var forward(Tape& tape, Var x, bool trainable = true);

  void init(std::mt19937_64& rng);
  void collect(ParamGroup& group);
  int in() const { return layers_.front().in(); }
  int out() const { return layers_.back().out(); }
  std::vector<Linear>& layers() { return layers_; }
  const std::vector<Linear>& layers() const { return layers_; }

private:
  std::vector<Linear> layers_;
  Head head_ = Head::kLinear;
};

/// Gated recurrent unit (PyTorch gate layout r, z, n):
///   r = sig(Wir x + bir + Whr h + bhr)
///   u = sig(Wiz x + biz + Whz h + bhz)
///   n = tanh(Win x + bin + r * (Whn h + bhn))
///   h' = (1 - u) * n + u * h
class GruCell {
public:
  GruCell() = default;
  GruCell(std::string name, int in, int hidden);

  /// Throws TrainingFault if the new state is not finite.
  Var step(Tape& tape, Var x, Var h, bool trainable = true);

  void init(std::mt19937_64& rng);
  void collect(ParamGroup& group);
  int hidden() const { return hidden_; }
  Linear& input() { return input_; }
  Linear& recurrent() { return recurrent_; }

private:
  Linear input_;
  Linear recurrent_;
  int hidden_ = 0;
};

/// Bounds applied to the log standard deviation of Gaussian heads.
inline constexpr double kLogSigmaMin = -10.0;
inline constexpr double kLogSigmaMax = 2.0;

struct GaussianHead {
  Var mean;
  Var log_sigma;
};

/// Splits a B x 2L output into mean and clamped log-sigma.
GaussianHead gaussian_head(Tape& tape, Var raw, int latent_dim);

/// Reparameterized sample z = mean + exp(log_sigma) * noise. Noise is a constant.
Var gaussian_sample(Tape& tape, const GaussianHead& head, const Matrix& noise);

}  // namespace smpe::nn
