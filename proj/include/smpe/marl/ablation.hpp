#pragma once

#include <string>

namespace smpe::marl {

/// Independent switches that remove parts of the method.
struct AblationFlags {
  bool no_intr = false;             ///< beta = 0, intrinsic rewards reported as 0
  bool no_filters = false;          ///< w = w_target = 1; no norm loss; no filter gradients
  bool no_kl = false;               ///< lambda_kl = 0
  bool no_L2_norm = false;          ///< lambda_norm = 0
  bool obs_rew = false;             ///< hash raw observations instead of beliefs
  bool no_critic_w = false;         ///< drop the filtered-state critic loss entirely
  bool no_standard_critic = false;  ///< advantages come from the filtered-state critic

  bool operator==(const AblationFlags&) const = default;

  /// Comma-separated flag names; empty string or "none" means no flags.
  /// Throws ConfigError on an unknown name.
  static AblationFlags parse(const std::string& list);
  std::string to_string() const;
};

}  // namespace smpe::marl
