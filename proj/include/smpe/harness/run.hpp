#pragma once

#include "smpe/harness/config.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace smpe::harness {

struct RunResult {
  std::uint64_t env_steps = 0;
  std::uint64_t episodes = 0;
  std::uint64_t rows = 0;
  double final_eval = 0.0;
};

/// Trains and writes into config.out_dir: config.txt, metrics.tsv, timing.tsv,
/// snapshot.json and (if enabled) embeddings.tsv.
RunResult run(const RunConfig& config);

/// Mean greedy extrinsic return of a stored snapshot. `env` defaults to the
/// snapshot's own preset.
double evaluate(const std::string& snapshot_path, int episodes, std::uint64_t seed,
                const std::optional<std::string>& env = std::nullopt, std::vector<double>* returns = nullptr);

}  // namespace smpe::harness
