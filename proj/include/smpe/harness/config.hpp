#pragma once

#include "smpe/marl/trainer.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace smpe::harness {

struct RunConfig {
  marl::TrainingConfig training;
  std::string out_dir = "runs/smpe";
  bool dump_embeddings = true;

  bool operator==(const RunConfig&) const = default;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat "key = value" lines; blank lines and '#' comments are ignored.
/// Throws ConfigError on a malformed line or a repeated key.
KeyValues parse_key_values(std::string_view text);

/// Defaults, then the env preset, then file keys, then overrides (later wins).
/// The env preset is chosen from the final "env" value before any other key is
/// applied, so explicit keys always beat preset values.
RunConfig build_config(const KeyValues& file, const KeyValues& overrides = {});
RunConfig load_config(const std::string& path, const KeyValues& overrides = {});

/// Preset values for an env name (gridforage or spread-N).
void apply_env_preset(marl::TrainingConfig& config, const std::string& env);

/// Throws ConfigError on out-of-range values or an unusable env preset.
void validate(const RunConfig& config);

/// Every key with its value, one per line; re-parses to an equal config.
std::string to_text(const RunConfig& config);

/// Known keys with a one-line description, in file order.
std::vector<std::pair<std::string, std::string>> config_keys();

}  // namespace smpe::harness
