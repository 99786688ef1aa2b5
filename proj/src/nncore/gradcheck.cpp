#include "smpe/nncore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace smpe::nn {

namespace {

struct Eval {
  double loss;
  std::uint64_t kinks;
};

Eval evaluate(const LossBuilder& fn) {
  Tape tape;
  const Var loss = fn(tape);
  return {tape.item(loss), tape.kink_signature()};
}

}  // namespace

GradCheckReport finite_diff_check(const LossBuilder& loss_fn, const ParamGroup& params, double tolerance,
                                  const GradCheckOptions& opts) {
  GradCheckReport report;
  params.zero_grads();
  std::uint64_t base_kinks = 0;
  {
    Tape tape;
    const Var loss = loss_fn(tape);
    base_kinks = tape.kink_signature();
    tape.backward(loss);
  }
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params.params()) analytic.push_back(p->grad);

  std::mt19937_64 rng(opts.seed);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params.params()[pi];
    std::vector<Eigen::Index> entries(static_cast<std::size_t>(p.value.size()));
    std::iota(entries.begin(), entries.end(), Eigen::Index{0});
    if (opts.max_entries_per_param > 0 && entries.size() > opts.max_entries_per_param) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(opts.max_entries_per_param);
      std::sort(entries.begin(), entries.end());
    }
    for (Eigen::Index e : entries) {
      double& slot = p.value.data()[e];
      const double orig = slot;
      slot = orig + opts.step;
      const Eval plus = evaluate(loss_fn);
      slot = orig - opts.step;
      const Eval minus = evaluate(loss_fn);
      slot = orig;
      if (plus.kinks != base_kinks || minus.kinks != base_kinks) {
        ++report.excluded;
        continue;
      }
      const double numeric = (plus.loss - minus.loss) / (2.0 * opts.step);
      const double a = analytic[pi].data()[e];
      const double denom = std::max({std::abs(a), std::abs(numeric), opts.abs_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      report.max_rel_error = std::max(report.max_rel_error, rel);
      if (!(rel < tolerance)) {
        std::ostringstream msg;
        msg << p.name << "[" << e << "]: analytic " << a << " numeric " << numeric << " rel " << rel;
        report.failures.push_back(msg.str());
      }
    }
  }
  // Leave the analytic gradients in place for callers that inspect them.
  for (std::size_t pi = 0; pi < params.size(); ++pi) params.params()[pi]->grad = analytic[pi];
  return report;
}

}  // namespace smpe::nn
