// smpe train / eval / keys

#include "smpe/errors.hpp"
#include "smpe/harness/config.hpp"
#include "smpe/harness/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace smpe;

int do_train(const std::string& config_path, const std::optional<std::uint64_t>& seed,
             const std::optional<std::string>& env, const std::optional<std::string>& ablation,
             const std::optional<std::string>& out, const std::vector<std::string>& sets) {
  harness::KeyValues overrides;
  for (const auto& s : sets) {
    const auto kv = harness::parse_key_values(s);
    if (kv.size() != 1) throw ConfigError("--set expects key=value, got '" + s + "'");
    overrides.push_back(kv.front());
  }
  if (seed) overrides.emplace_back("seed", std::to_string(*seed));
  if (env) overrides.emplace_back("env", *env);
  if (ablation) overrides.emplace_back("ablation", *ablation);
  if (out) overrides.emplace_back("out_dir", *out);
  const harness::RunConfig config = config_path.empty() ? harness::build_config({}, overrides)
                                                        : harness::load_config(config_path, overrides);
  const harness::RunResult r = harness::run(config);
  std::printf("steps %llu episodes %llu rows %llu final_eval %.6g\n", static_cast<unsigned long long>(r.env_steps),
              static_cast<unsigned long long>(r.episodes), static_cast<unsigned long long>(r.rows), r.final_eval);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"State-modelling multi-agent actor-critic"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> env;
  std::optional<std::string> ablation;
  std::optional<std::string> out;
  std::vector<std::string> sets;
  auto* train = app.add_subcommand("train", "train and write metrics, snapshot and embeddings");
  train->add_option("--config", config_path, "key = value config file (omit for defaults)");
  train->add_option("--seed", seed, "master seed");
  train->add_option("--env", env, "environment preset");
  train->add_option("--ablation", ablation, "comma-separated ablation flags");
  train->add_option("--out", out, "output directory");
  train->add_option("--set", sets, "extra key=value override (repeatable)");

  std::string snapshot;
  int episodes = 100;
  std::uint64_t eval_seed = 0;
  std::optional<std::string> eval_env;
  bool per_episode = false;
  auto* eval = app.add_subcommand("eval", "greedy evaluation of a snapshot");
  eval->add_option("--snapshot", snapshot, "snapshot.json from a training run")->required();
  eval->add_option("--episodes", episodes, "number of episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "evaluation seed");
  eval->add_option("--env", eval_env, "evaluate on another preset with matching dimensions");
  eval->add_flag("--per-episode", per_episode, "print each episode's return");

  auto* keys = app.add_subcommand("keys", "list config keys");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return do_train(config_path, seed, env, ablation, out, sets);
    if (*eval) {
      std::vector<double> returns;
      const double mean = harness::evaluate(snapshot, episodes, eval_seed, eval_env, &returns);
      if (per_episode)
        for (double r : returns) std::printf("%.10g\n", r);
      std::printf("mean_return %.10g\n", mean);
      return 0;
    }
    if (*keys) {
      for (const auto& [k, doc] : harness::config_keys()) std::printf("%-26s %s\n", k.c_str(), doc.c_str());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const TrainingFault& e) {
    std::cerr << "training fault: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
