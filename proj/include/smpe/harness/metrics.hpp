#pragma once

#include "smpe/marl/trainer.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace smpe::harness {

/// Tab-separated metrics header (no wall clock; timing is written separately).
std::string metrics_header();
std::string format_metrics_row(const marl::MetricsRow& row);

/// Append-only metrics file; each row is flushed as it is written.
class MetricsWriter {
public:
  explicit MetricsWriter(const std::string& path);
  void write(const marl::MetricsRow& row);

private:
  std::ofstream out_;
  std::uint64_t last_step_ = 0;
  bool any_ = false;
};

/// Reads a metrics file written by MetricsWriter.
std::vector<marl::MetricsRow> read_metrics(const std::string& path);

}  // namespace smpe::harness
