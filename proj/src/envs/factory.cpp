#include "smpe/envs/env.hpp"
#include "smpe/envs/gridforage.hpp"
#include "smpe/envs/spread.hpp"

namespace smpe::envs {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a * 0x9e3779b97f4a7c15ULL + b + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name.rfind("spread-", 0) == 0) return std::make_unique<Spread>(SpreadParams::parse(name));
  return std::make_unique<GridForage>(GridForageParams::parse(name));
}

}  // namespace smpe::envs
