#include "smpe/nncore/adam.hpp"

#include "smpe/errors.hpp"

#include <cmath>

namespace smpe::nn {

Adam::Adam(ParamGroup group, double lr, AdamOptions opts) : group_(std::move(group)), lr_(lr), opts_(opts) {
  m_.reserve(group_.size());
  v_.reserve(group_.size());
  for (const Parameter* p : group_.params()) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  for (const Parameter* p : group_.params()) {
    if (!p->grad.allFinite()) throw TrainingFault("Adam: non-finite gradient in " + p->name);
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < group_.size(); ++i) {
    Parameter& p = *group_.params()[i];
    m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * p.grad;
    v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + opts_.eps);
  }
}

}  // namespace smpe::nn
