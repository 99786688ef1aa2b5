#include "smpe/nncore/tape.hpp"

#include "smpe/errors.hpp"
#include "smpe/nncore/layers.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace smpe::nn {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ConfigError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

Var Tape::push(Matrix value, bool requires_grad, BackwardFn fn) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Matrix& Tape::grad_ref(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::clear() {
  nodes_.clear();
  kink_signature_ = 0;
}

void Tape::mix_kinks(const Matrix& pre, double lo, double hi) {
  std::uint64_t h = kink_signature_;
  std::uint64_t word = 0;
  int bit = 0;
  for (Eigen::Index i = 0; i < pre.size(); ++i) {
    const double v = pre.data()[i];
    const std::uint64_t state = v <= lo ? 0 : (v >= hi ? 2 : 1);
    word = word * 3 + state;
    if (++bit == 32) {
      h = mix64(h, word);
      word = 0;
      bit = 0;
    }
  }
  kink_signature_ = mix64(h, word ^ static_cast<std::uint64_t>(pre.size()));
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::linear(Var x, Linear& layer, bool trainable) {
  const Matrix& xv = value(x);
  if (xv.cols() != layer.weight.value.cols()) {
    throw ConfigError("linear " + layer.weight.name + ": input has " + std::to_string(xv.cols()) +
                      " features, layer expects " + std::to_string(layer.weight.value.cols()));
  }
  Matrix out = xv * layer.weight.value.transpose();
  out.rowwise() += layer.bias.value.row(0);
  const bool needs = trainable || requires_grad(x);
  Linear* lp = &layer;
  const std::size_t xi = x.id;
  return push(std::move(out), needs, [lp, xi, trainable](Tape& t, std::size_t self) {
    const Matrix& g = t.upstream(self);
    if (trainable) {
      lp->weight.grad.noalias() += g.transpose() * t.nodes_[xi].value;
      lp->bias.grad.row(0) += g.colwise().sum();
    }
    if (t.nodes_[xi].requires_grad) t.grad_ref(xi).noalias() += g * lp->weight.value;
  });
}

Var Tape::relu(Var x) {
  const Matrix& xv = value(x);
  mix_kinks(xv, 0.0, std::numeric_limits<double>::infinity());
  const std::size_t xi = x.id;
  return push(xv.cwiseMax(0.0), requires_grad(x), [xi](Tape& t, std::size_t self) {
    const Matrix& g = t.upstream(self);
    t.grad_ref(xi).array() += (t.nodes_[xi].value.array() > 0.0).select(g.array(), 0.0);
  });
}

Var Tape::tanh(Var x) {
  const std::size_t xi = x.id;
  return push(value(x).array().tanh().matrix(), requires_grad(x), [xi](Tape& t, std::size_t self) {
    const auto y = t.nodes_[self].value.array();
    t.grad_ref(xi).array() += t.upstream(self).array() * (1.0 - y * y);
  });
}

Var Tape::sigmoid(Var x) {
  const std::size_t xi = x.id;
  Matrix y = (1.0 / (1.0 + (-value(x).array()).exp())).matrix();
  return push(std::move(y), requires_grad(x), [xi](Tape& t, std::size_t self) {
    const auto y = t.nodes_[self].value.array();
    t.grad_ref(xi).array() += t.upstream(self).array() * y * (1.0 - y);
  });
}

Var Tape::exp(Var x) {
  const std::size_t xi = x.id;
  return push(value(x).array().exp().matrix(), requires_grad(x), [xi](Tape& t, std::size_t self) {
    t.grad_ref(xi).array() += t.upstream(self).array() * t.nodes_[self].value.array();
  });
}

Var Tape::square(Var x) {
  const std::size_t xi = x.id;
  return push(value(x).array().square().matrix(), requires_grad(x), [xi](Tape& t, std::size_t self) {
    t.grad_ref(xi).array() += 2.0 * t.upstream(self).array() * t.nodes_[xi].value.array();
  });
}

Var Tape::clamp(Var x, double lo, double hi) {
  const Matrix& xv = value(x);
  mix_kinks(xv, lo, hi);
  const std::size_t xi = x.id;
  return push(xv.cwiseMax(lo).cwiseMin(hi), requires_grad(x), [xi, lo, hi](Tape& t, std::size_t self) {
    const auto xa = t.nodes_[xi].value.array();
    t.grad_ref(xi).array() += (xa > lo && xa < hi).select(t.upstream(self).array(), 0.0);
  });
}

Var Tape::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  const std::size_t ai = a.id, bi = b.id;
  return push(value(a) + value(b), requires_grad(a) || requires_grad(b), [ai, bi](Tape& t, std::size_t self) {
    if (t.nodes_[ai].requires_grad) t.grad_ref(ai) += t.upstream(self);
    if (t.nodes_[bi].requires_grad) t.grad_ref(bi) += t.upstream(self);
  });
}

Var Tape::sub(Var a, Var b) {
  require_same_shape(value(a), value(b), "sub");
  const std::size_t ai = a.id, bi = b.id;
  return push(value(a) - value(b), requires_grad(a) || requires_grad(b), [ai, bi](Tape& t, std::size_t self) {
    if (t.nodes_[ai].requires_grad) t.grad_ref(ai) += t.upstream(self);
    if (t.nodes_[bi].requires_grad) t.grad_ref(bi) -= t.upstream(self);
  });
}

Var Tape::mul(Var a, Var b) {
  require_same_shape(value(a), value(b), "mul");
  const std::size_t ai = a.id, bi = b.id;
  return push(value(a).cwiseProduct(value(b)), requires_grad(a) || requires_grad(b),
              [ai, bi](Tape& t, std::size_t self) {
                const Matrix& g = t.upstream(self);
                if (t.nodes_[ai].requires_grad) t.grad_ref(ai) += g.cwiseProduct(t.nodes_[bi].value);
                if (t.nodes_[bi].requires_grad) t.grad_ref(bi) += g.cwiseProduct(t.nodes_[ai].value);
              });
}

Var Tape::scale(Var x, double s) {
  const std::size_t xi = x.id;
  return push(value(x) * s, requires_grad(x), [xi, s](Tape& t, std::size_t self) {
    t.grad_ref(xi) += s * t.upstream(self);
  });
}

Var Tape::add_scalar(Var x, double s) {
  const std::size_t xi = x.id;
  return push((value(x).array() + s).matrix(), requires_grad(x), [xi](Tape& t, std::size_t self) {
    t.grad_ref(xi) += t.upstream(self);
  });
}

Var Tape::mul_rows(Var x, Var c) {
  const Matrix& xv = value(x);
  const Matrix& cv = value(c);
  if (cv.cols() != 1 || cv.rows() != xv.rows()) {
    throw ConfigError("mul_rows: expected " + std::to_string(xv.rows()) + "x1 column, got " + shape(cv));
  }
  const std::size_t xi = x.id, ci = c.id;
  Matrix out = xv.array().colwise() * cv.col(0).array();
  return push(std::move(out), requires_grad(x) || requires_grad(c), [xi, ci](Tape& t, std::size_t self) {
    const Matrix& g = t.upstream(self);
    if (t.nodes_[xi].requires_grad) {
      t.grad_ref(xi).array() += g.array().colwise() * t.nodes_[ci].value.col(0).array();
    }
    if (t.nodes_[ci].requires_grad) {
      t.grad_ref(ci).col(0) += g.cwiseProduct(t.nodes_[xi].value).rowwise().sum();
    }
  });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ConfigError("concat_cols: no inputs");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool needs = false;
  for (Var p : parts) {
    if (value(p).rows() != rows) throw ConfigError("concat_cols: row mismatch");
    cols += value(p).cols();
    needs = needs || requires_grad(p);
  }
  Matrix out(rows, cols);
  std::vector<std::size_t> ids;
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, value(p).cols()) = value(p);
    c += value(p).cols();
    ids.push_back(p.id);
  }
  return push(std::move(out), needs, [ids = std::move(ids)](Tape& t, std::size_t self) {
    const Matrix& g = t.upstream(self);
    Eigen::Index c = 0;
    for (std::size_t id : ids) {
      const Eigen::Index w = t.nodes_[id].value.cols();
      if (t.nodes_[id].requires_grad) t.grad_ref(id) += g.middleCols(c, w);
      c += w;
    }
  });
}

Var Tape::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ConfigError("concat_rows: no inputs");
  const Eigen::Index cols = value(parts[0]).cols();
  Eigen::Index rows = 0;
  bool needs = false;
  for (Var p : parts) {
    if (value(p).cols() != cols) throw ConfigError("concat_rows: column mismatch");
    rows += value(p).rows();
    needs = needs || requires_grad(p);
  }
  Matrix out(rows, cols);
  std::vector<std::size_t> ids;
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, value(p).rows()) = value(p);
    r += value(p).rows();
    ids.push_back(p.id);
  }
  return push(std::move(out), needs, [ids = std::move(ids)](Tape& t, std::size_t self) {
    const Matrix& g = t.upstream(self);
    Eigen::Index r = 0;
    for (std::size_t id : ids) {
      const Eigen::Index h = t.nodes_[id].value.rows();
      if (t.nodes_[id].requires_grad) t.grad_ref(id) += g.middleRows(r, h);
      r += h;
    }
  });
}

Var Tape::slice_cols(Var x, Eigen::Index start, Eigen::Index count) {
  const Matrix& xv = value(x);
  if (start < 0 || count < 0 || start + count > xv.cols()) throw ConfigError("slice_cols: out of range");
  const std::size_t xi = x.id;
  return push(xv.middleCols(start, count), requires_grad(x), [xi, start, count](Tape& t, std::size_t self) {
    t.grad_ref(xi).middleCols(start, count) += t.upstream(self);
  });
}

Var Tape::slice_rows(Var x, Eigen::Index start, Eigen::Index count) {
  const Matrix& xv = value(x);
  if (start < 0 || count < 0 || start + count > xv.rows()) throw ConfigError("slice_rows: out of range");
  const std::size_t xi = x.id;
  return push(xv.middleRows(start, count), requires_grad(x), [xi, start, count](Tape& t, std::size_t self) {
    t.grad_ref(xi).middleRows(start, count) += t.upstream(self);
  });
}

Var Tape::row_sum(Var x) {
  const std::size_t xi = x.id;
  return push(value(x).rowwise().sum(), requires_grad(x), [xi](Tape& t, std::size_t self) {
    t.grad_ref(xi).colwise() += t.upstream(self).col(0);
  });
}

Var Tape::sum(Var x) {
  const std::size_t xi = x.id;
  return push(Matrix::Constant(1, 1, value(x).sum()), requires_grad(x), [xi](Tape& t, std::size_t self) {
    t.grad_ref(xi).array() += t.upstream(self)(0, 0);
  });
}

Var Tape::mean(Var x) {
  const double n = static_cast<double>(value(x).size());
  return scale(sum(x), n > 0 ? 1.0 / n : 0.0);
}

Var Tape::log_softmax(Var logits) {
  const Matrix& z = value(logits);
  const Eigen::VectorXd mx = z.rowwise().maxCoeff();
  Matrix shifted = z.colwise() - mx;
  const Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log();
  shifted.colwise() -= lse;
  const std::size_t xi = logits.id;
  return push(std::move(shifted), requires_grad(logits), [xi](Tape& t, std::size_t self) {
    const Matrix& g = t.upstream(self);
    const Matrix p = t.nodes_[self].value.array().exp();
    const Eigen::VectorXd gs = g.rowwise().sum();
    t.grad_ref(xi) += g - (p.array().colwise() * gs.array()).matrix();
  });
}

Var Tape::pick(Var x, std::span<const int> idx) {
  const Matrix& xv = value(x);
  if (static_cast<Eigen::Index>(idx.size()) != xv.rows()) throw ConfigError("pick: index count mismatch");
  Matrix out(xv.rows(), 1);
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const int c = idx[static_cast<std::size_t>(r)];
    if (c < 0 || c >= xv.cols()) throw ConfigError("pick: index out of range");
    out(r, 0) = xv(r, c);
  }
  const std::size_t xi = x.id;
  std::vector<int> cols(idx.begin(), idx.end());
  return push(std::move(out), requires_grad(x), [xi, cols = std::move(cols)](Tape& t, std::size_t self) {
    const Matrix& g = t.upstream(self);
    Matrix& gx = t.grad_ref(xi);
    for (Eigen::Index r = 0; r < g.rows(); ++r) gx(r, cols[static_cast<std::size_t>(r)]) += g(r, 0);
  });
}

void Tape::backward(Var loss) {
  if (value(loss).size() != 1) throw ConfigError("backward: loss must be 1x1, got " + shape(value(loss)));
  if (!std::isfinite(item(loss))) throw TrainingFault("backward: non-finite loss");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[loss.id].requires_grad) return;
  grad_ref(loss.id)(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && n.grad.size() != 0) n.backward(*this, i);
  }
}

}  // namespace smpe::nn
