#include "smpe/nncore/params.hpp"

#include "smpe/errors.hpp"

namespace smpe::nn {

std::size_t ParamGroup::numel() const {
  std::size_t n = 0;
  for (const Parameter* p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParamGroup::zero_grads() const {
  for (Parameter* p : params_) {
    if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols()) {
      p->grad.resize(p->value.rows(), p->value.cols());
    }
    p->grad.setZero();
  }
}

bool ParamGroup::grads_all_zero() const {
  for (const Parameter* p : params_) {
    if ((p->grad.array() != 0.0).any()) return false;
  }
  return true;
}

void hard_copy(const ParamGroup& src, const ParamGroup& dst) {
  if (src.size() != dst.size()) {
    throw ConfigError("hard_copy: group '" + src.name() + "' has " + std::to_string(src.size()) +
                      " arrays, '" + dst.name() + "' has " + std::to_string(dst.size()));
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Parameter& s = *src.params()[i];
    const Parameter& d = *dst.params()[i];
    if (s.value.rows() != d.value.rows() || s.value.cols() != d.value.cols()) {
      throw ConfigError("hard_copy: shape mismatch between " + s.name + " and " + d.name);
    }
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst.params()[i]->value = src.params()[i]->value;
  }
}

bool params_equal(const ParamGroup& a, const ParamGroup& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Matrix& x = a.params()[i]->value;
    const Matrix& y = b.params()[i]->value;
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    if ((x.array() != y.array()).any()) return false;
  }
  return true;
}

}  // namespace smpe::nn
