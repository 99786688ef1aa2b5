#include "smpe/harness/config.hpp"

#include "smpe/envs/spread.hpp"
#include "smpe/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace smpe::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key + ": not a non-negative integer: '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

struct Key {
  const char* name;
  const char* doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define SMPE_DOUBLE(field, doc)                                                     \
  Key{#field, doc, [](const RunConfig& c) { return fmt_double(c.training.field); }, \
      [](RunConfig& c, const std::string& v) { c.training.field = to_double(#field, v); }}
#define SMPE_INT(field, doc)                                                            \
  Key{#field, doc, [](const RunConfig& c) { return std::to_string(c.training.field); }, \
      [](RunConfig& c, const std::string& v) { c.training.field = to_int(#field, v); }}
#define SMPE_U64(field, doc)                                                            \
  Key{#field, doc, [](const RunConfig& c) { return std::to_string(c.training.field); }, \
      [](RunConfig& c, const std::string& v) { c.training.field = to_u64(#field, v); }}
#define SMPE_SIZE(field, doc)                                                           \
  Key{#field, doc, [](const RunConfig& c) { return std::to_string(c.training.field); }, \
      [](RunConfig& c, const std::string& v) { c.training.field = static_cast<std::size_t>(to_u64(#field, v)); }}
#define SMPE_BOOL(field, doc)                                                                  \
  Key{#field, doc, [](const RunConfig& c) { return std::string(c.training.field ? "true" : "false"); }, \
      [](RunConfig& c, const std::string& v) { c.training.field = to_bool(#field, v); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      Key{"env", "environment preset: Ss-GxG-Pp-Ff[-coop] or spread-N",
          [](const RunConfig& c) { return c.training.env; },
          [](RunConfig& c, const std::string& v) { c.training.env = v; }},
      SMPE_U64(horizon, "total joint environment steps"),
      SMPE_U64(seed, "master seed"),
      SMPE_INT(n_envs, "parallel environments per rollout"),
      SMPE_DOUBLE(gamma, "discount factor in [0, 1)"),
      SMPE_DOUBLE(lr, "actor, critic and belief-through-policy learning rate"),
      SMPE_DOUBLE(lr_ed, "encoder-decoder learning rate"),
      SMPE_DOUBLE(lr_w, "filter learning rate in the reconstruction loss"),
      SMPE_DOUBLE(lr_w_critic, "filter learning rate in the filtered-critic loss"),
      SMPE_DOUBLE(lambda_rec, "reconstruction loss weight"),
      SMPE_DOUBLE(lambda_kl, "KL loss weight"),
      SMPE_DOUBLE(lambda_norm, "filter norm loss weight"),
      SMPE_DOUBLE(beta, "intrinsic reward coefficient"),
      SMPE_DOUBLE(entropy_coef, "policy entropy coefficient"),
      SMPE_INT(n_step, "TD return length"),
      SMPE_INT(hidden_dim, "actor GRU and critic hidden width"),
      SMPE_INT(latent_dim, "belief dimension"),
      SMPE_INT(ed_hidden_dim, "encoder, decoder and filter hidden width"),
      SMPE_BOOL(shared_policy, "one actor network for all agents"),
      SMPE_U64(n_ed, "environment steps between encoder-decoder updates"),
      SMPE_SIZE(ed_capacity, "encoder-decoder replay capacity"),
      SMPE_SIZE(ed_batch_size, "encoder-decoder batch size"),
      SMPE_INT(n_tup, "update rounds between critic target updates"),
      SMPE_U64(n_wtup, "environment steps between filter target updates"),
      SMPE_INT(hash_bits, "SimHash key bits"),
      Key{"hash_input", "belief fed to the hash: sample or mean",
          [](const RunConfig& c) { return c.training.hash_input; },
          [](RunConfig& c, const std::string& v) { c.training.hash_input = v; }},
      SMPE_BOOL(reset_counts_on_ed_update, "clear visit counts after each encoder-decoder update"),
      SMPE_U64(metrics_interval, "environment steps per metrics row"),
      SMPE_U64(eval_interval, "environment steps between greedy evaluations"),
      SMPE_INT(eval_episodes, "episodes per evaluation"),
      Key{"ablation", "comma-separated ablation flags or none",
          [](const RunConfig& c) { return c.training.flags.to_string(); },
          [](RunConfig& c, const std::string& v) { c.training.flags = marl::AblationFlags::parse(v); }},
      Key{"out_dir", "output directory", [](const RunConfig& c) { return c.out_dir; },
          [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
      Key{"dump_embeddings", "write embeddings.tsv at the end of training",
          [](const RunConfig& c) { return std::string(c.dump_embeddings ? "true" : "false"); },
          [](RunConfig& c, const std::string& v) { c.dump_embeddings = to_bool("dump_embeddings", v); }},
  };
  return table;
}

const Key& find_key(const std::string& name) {
  for (const auto& k : keys())
    if (name == k.name) return k;
  throw ConfigError("unknown config key '" + name + "'");
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    for (const auto& kv : out)
      if (kv.first == key) throw ConfigError("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void apply_env_preset(marl::TrainingConfig& c, const std::string& env) {
  if (env.rfind("spread-", 0) == 0) {
    const envs::SpreadParams p = envs::SpreadParams::parse(env);
    c.latent_dim = 64;
    c.lr_w_critic = 5e-7;
    c.lambda_rec = 1.0;
    c.lambda_norm = 0.1;
    c.beta = 0.0;
    c.shared_policy = p.n_agents >= 8;
  } else {
    c.latent_dim = 32;
    c.lr_w_critic = 5e-5;
    c.lambda_rec = 0.5;
    c.lambda_norm = 1.0;
    c.beta = 0.1;
    c.shared_policy = true;
  }
}

RunConfig build_config(const KeyValues& file, const KeyValues& overrides) {
  RunConfig config;
  std::string env = config.training.env;
  for (const auto* src : {&file, &overrides})
    for (const auto& [k, v] : *src) {
      find_key(k);
      if (k == "env") env = v;
    }
  apply_env_preset(config.training, env);
  for (const auto* src : {&file, &overrides})
    for (const auto& [k, v] : *src) find_key(k).set(config, v);
  validate(config);
  return config;
}

RunConfig load_config(const std::string& path, const KeyValues& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return build_config(parse_key_values(ss.str()), overrides);
}

void validate(const RunConfig& config) {
  const marl::TrainingConfig& c = config.training;
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(std::isfinite(c.gamma) && c.gamma >= 0.0 && c.gamma < 1.0, "gamma must lie in [0, 1)");
  for (const auto& [name, v] : {std::pair{"lr", c.lr}, {"lr_ed", c.lr_ed}, {"lr_w", c.lr_w}, {"lr_w_critic", c.lr_w_critic}})
    require(std::isfinite(v) && v > 0.0, std::string(name) + " must be positive");
  for (const auto& [name, v] : {std::pair{"lambda_rec", c.lambda_rec}, {"lambda_kl", c.lambda_kl},
                                {"lambda_norm", c.lambda_norm}, {"beta", c.beta}, {"entropy_coef", c.entropy_coef}})
    require(std::isfinite(v) && v >= 0.0, std::string(name) + " must be non-negative");
  require(c.horizon > 0, "horizon must be positive");
  require(c.n_envs >= 1, "n_envs must be >= 1");
  require(c.n_step >= 1, "n_step must be >= 1");
  require(c.hidden_dim >= 1 && c.latent_dim >= 1 && c.ed_hidden_dim >= 1, "network widths must be >= 1");
  require(c.n_ed >= 1 && c.n_wtup >= 1 && c.n_tup >= 1, "update periods must be >= 1");
  require(c.ed_batch_size >= 1 && c.ed_batch_size <= c.ed_capacity, "ed_batch_size must lie in [1, ed_capacity]");
  require(c.hash_bits >= 1 && c.hash_bits <= 64, "hash_bits must lie in [1, 64]");
  require(c.hash_input == "sample" || c.hash_input == "mean", "hash_input must be sample or mean");
  require(c.metrics_interval >= 1 && c.eval_interval >= 1, "metrics and eval intervals must be >= 1");
  require(c.eval_episodes >= 1, "eval_episodes must be >= 1");
  require(!(c.flags.no_critic_w && c.flags.no_standard_critic),
          "no_critic_w and no_standard_critic together leave no trained critic");
  require(!config.out_dir.empty(), "out_dir must not be empty");
  envs::make_env(c.env);
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(config) + "\n";
  return out;
}

std::vector<std::pair<std::string, std::string>> config_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys()) out.emplace_back(k.name, k.doc);
  return out;
}

}  // namespace smpe::harness
