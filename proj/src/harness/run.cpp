#include "smpe/harness/run.hpp"

#include "smpe/errors.hpp"
#include "smpe/harness/metrics.hpp"
#include "smpe/harness/snapshot.hpp"
#include "smpe/statemodel/embeddings.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace smpe::harness {

RunResult run(const RunConfig& config) {
  validate(config);
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "config.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write into '" + config.out_dir + "'");
    out << to_text(config);
  }

  marl::Trainer trainer(config.training);
  MetricsWriter metrics((dir / "metrics.tsv").string());
  std::ofstream timing(dir / "timing.tsv", std::ios::binary | std::ios::trunc);
  timing << "step\twall_seconds\n";
  RunResult result;
  trainer.run([&](const marl::MetricsRow& row) {
    metrics.write(row);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", row.wall_seconds);
    timing << row.step << '\t' << buf << '\n';
    timing.flush();
    ++result.rows;
    result.final_eval = row.eval_return;
  });
  result.env_steps = trainer.env_steps();
  result.episodes = trainer.episodes_done();

  save_snapshot((dir / "snapshot.json").string(), config, trainer.learner());

  if (config.dump_embeddings && !trainer.sample_episode().empty()) {
    statemodel::StateModel& model = trainer.learner().state_model();
    const int n = model.dims().n_agents;
    std::vector<statemodel::EmbeddingRow> rows;
    std::mt19937_64 rng(envs::mix_seed(config.training.seed, 0xE3B));
    for (int i = 0; i < n; ++i) {
      auto part = statemodel::dump_embeddings(model, i, trainer.sample_episode(), true, rng);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    std::ofstream out(dir / "embeddings.tsv", std::ios::binary | std::ios::trunc);
    statemodel::write_embeddings(out, rows, model.dims().latent_dim, n - 1);
  }
  return result;
}

double evaluate(const std::string& snapshot_path, int episodes, std::uint64_t seed,
                const std::optional<std::string>& env, std::vector<double>* returns) {
  Snapshot snap = load_snapshot(snapshot_path);
  return marl::evaluate_policy(*snap.learner, env.value_or(snap.config.training.env), episodes, seed, returns);
}

}  // namespace smpe::harness
