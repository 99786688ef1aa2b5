#pragma once

#include "smpe/nncore/params.hpp"
#include "smpe/nncore/tape.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace smpe::nn {

struct GradCheckOptions {
  double step = 1e-5;
  /// Denominator floor for the relative error, so gradients near zero are
  /// compared in absolute terms.
  double abs_floor = 1e-6;
  /// Entries probed per parameter array (0 = all), chosen with `seed`.
  std::size_t max_entries_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  /// Entries skipped because the perturbation crossed a ReLU/clamp kink.
  std::size_t excluded = 0;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

using LossBuilder = std::function<Var(Tape&)>;

/// Central differences against reverse-mode gradients for every parameter in
/// `params`. The builder must be deterministic.
GradCheckReport finite_diff_check(const LossBuilder& loss_fn, const ParamGroup& params,
                                  double tolerance, const GradCheckOptions& opts = {});

}  // namespace smpe::nn
