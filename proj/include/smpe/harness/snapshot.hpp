#pragma once

#include "smpe/harness/config.hpp"
#include "smpe/marl/learner.hpp"

#include <memory>
#include <string>

namespace smpe::harness {

struct Snapshot {
  RunConfig config;
  std::unique_ptr<marl::Learner> learner;
};

/// JSON document with the config text and every parameter array by name.
void save_snapshot(const std::string& path, const RunConfig& config, marl::Learner& learner);
/// Rebuilds the learner from the stored config and loads every array.
/// Throws ConfigError on a missing array or a shape mismatch.
Snapshot load_snapshot(const std::string& path);

}  // namespace smpe::harness
