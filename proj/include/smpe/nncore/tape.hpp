#pragma once

#include "smpe/nncore/params.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace smpe::nn {

struct Linear;

/// Handle to a node on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode tape over dense matrices. Rows are batch elements.
///
/// Every op appends a node holding its forward value. Nodes that depend on a
/// trainable layer carry a backward closure; `backward` walks the tape in
/// reverse and accumulates gradients straight into Parameter::grad. Frozen
/// layers (trainable=false) and constants never receive gradient.
class Tape {
public:
  Tape() { nodes_.reserve(256); }

  Var constant(Matrix value);
  Var scalar_constant(double v) { return constant(Matrix::Constant(1, 1, v)); }
  /// Gradient stop: copies the value, drops the history.
  Var detach(Var x) { return constant(value(x)); }

  Var linear(Var x, Linear& layer, bool trainable = true);

  Var relu(Var x);
  Var tanh(Var x);
  Var sigmoid(Var x);
  Var exp(Var x);
  Var square(Var x);
  /// Elementwise clamp; zero gradient outside [lo, hi].
  Var clamp(Var x, double lo, double hi);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double s);
  Var add_scalar(Var x, double s);
  /// Multiplies each row of `x` by the matching entry of the column vector `c`.
  Var mul_rows(Var x, Var c);

  Var concat_cols(std::span<const Var> parts);
  Var concat_rows(std::span<const Var> parts);
  Var slice_cols(Var x, Eigen::Index start, Eigen::Index count);
  Var slice_rows(Var x, Eigen::Index start, Eigen::Index count);

  /// Per-row sum over columns, B x 1.
  Var row_sum(Var x);
  /// Sum of all entries, 1 x 1.
  Var sum(Var x);
  Var mean(Var x);

  Var log_softmax(Var logits);
  /// Picks column idx[r] from each row r, B x 1.
  Var pick(Var x, std::span<const int> idx);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  double item(Var v) const { return nodes_[v.id].value(0, 0); }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  /// Gradient of the last backward() target w.r.t. this node; empty if none reached it.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 node and propagates.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  void clear();

  /// Hash of the active/inactive pattern of every ReLU and clamp on the tape.
  /// Finite-difference checks use it to skip perturbations that cross a kink.
  std::uint64_t kink_signature() const { return kink_signature_; }

private:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  Var push(Matrix value, bool requires_grad, BackwardFn fn);
  Matrix& grad_ref(std::size_t id);
  const Matrix& upstream(std::size_t id) const { return nodes_[id].grad; }
  void mix_kinks(const Matrix& pre, double lo, double hi);

  std::vector<Node> nodes_;
  std::uint64_t kink_signature_ = 0;
};

}  // namespace smpe::nn
