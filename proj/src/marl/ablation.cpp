#include "smpe/marl/ablation.hpp"

#include "smpe/errors.hpp"

#include <sstream>

namespace smpe::marl {

namespace {

struct FlagName {
  const char* name;
  bool AblationFlags::*field;
};

constexpr FlagName kFlags[] = {
    {"no_intr", &AblationFlags::no_intr},
    {"no_filters", &AblationFlags::no_filters},
    {"no_kl", &AblationFlags::no_kl},
    {"no_L2_norm", &AblationFlags::no_L2_norm},
    {"obs_rew", &AblationFlags::obs_rew},
    {"no_critic_w", &AblationFlags::no_critic_w},
    {"no_standard_critic", &AblationFlags::no_standard_critic},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

AblationFlags AblationFlags::parse(const std::string& list) {
  AblationFlags flags;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty() || item == "none") continue;
    bool found = false;
    for (const auto& f : kFlags) {
      if (item == f.name) {
        flags.*f.field = true;
        found = true;
      }
    }
    if (!found) throw ConfigError("unknown ablation flag '" + item + "'");
  }
  return flags;
}

std::string AblationFlags::to_string() const {
  std::string out;
  for (const auto& f : kFlags) {
    if (this->*f.field) {
      if (!out.empty()) out += ',';
      out += f.name;
    }
  }
  return out.empty() ? "none" : out;
}

}  // namespace smpe::marl
