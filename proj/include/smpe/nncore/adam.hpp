#pragma once

#include "smpe/nncore/params.hpp"

#include <cstdint>
#include <vector>

namespace smpe::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over a fixed parameter group. Owns the first/second moment buffers and
/// the step counter; one instance per parameter group and loss pathway.
class Adam {
public:
  Adam() = default;
  Adam(ParamGroup group, double lr, AdamOptions opts = {});

  /// Applies one bias-corrected update from the current gradient buffers.
  /// Throws TrainingFault on a non-finite gradient; parameters are left untouched.
  void step();

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  std::int64_t steps() const { return t_; }
  const ParamGroup& group() const { return group_; }

private:
  ParamGroup group_;
  double lr_ = 1e-3;
  AdamOptions opts_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t t_ = 0;
};

}  // namespace smpe::nn
