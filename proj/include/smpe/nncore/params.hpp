#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace smpe::nn {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// A trainable array with its gradient buffer (same shape, always).
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(name)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  std::string name;
  Matrix value;
  Matrix grad;
};

/// Non-owning named view over a set of parameters. The owning modules must
/// outlive the group and must not be moved while it is in use.
class ParamGroup {
public:
  ParamGroup() = default;
  explicit ParamGroup(std::string name) : name_(std::move(name)) {}

  void add(Parameter& p) { params_.push_back(&p); }
  void extend(const ParamGroup& other) {
    params_.insert(params_.end(), other.params_.begin(), other.params_.end());
  }

  const std::string& name() const { return name_; }
  const std::vector<Parameter*>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t numel() const;

  void zero_grads() const;
  bool grads_all_zero() const;

private:
  std::string name_;
  std::vector<Parameter*> params_;
};

/// Copies every array of `src` into the matching array of `dst`.
/// Throws ConfigError on count or shape mismatch.
void hard_copy(const ParamGroup& src, const ParamGroup& dst);

bool params_equal(const ParamGroup& a, const ParamGroup& b);

/// Fires on counter values that are positive multiples of `period`. Counters may
/// advance by more than one between checks; `crossings` reports how many
/// multiples were passed.
class PeriodicSchedule {
public:
  explicit PeriodicSchedule(std::uint64_t period) : period_(period) {}

  std::uint64_t period() const { return period_; }
  std::uint64_t crossings(std::uint64_t before, std::uint64_t after) const {
    if (period_ == 0 || after <= before) return 0;
    return after / period_ - before / period_;
  }

private:
  std::uint64_t period_;
};

}  // namespace smpe::nn
