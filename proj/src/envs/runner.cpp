#include "smpe/envs/runner.hpp"

#include "smpe/errors.hpp"

#include <algorithm>

namespace smpe::envs {

std::size_t TrajectoryBatch::transitions() const {
  std::size_t n = 0;
  for (const auto& ep : episodes) n += ep.size();
  return n;
}

std::size_t TrajectoryBatch::max_len() const {
  std::size_t n = 0;
  for (const auto& ep : episodes) n = std::max(n, ep.size());
  return n;
}

ParallelRunner::ParallelRunner(std::vector<std::unique_ptr<Env>> envs, std::uint64_t seed)
    : envs_(std::move(envs)), episode_counter_(envs_.size(), 0), seed_(seed) {
  if (envs_.empty()) throw ConfigError("ParallelRunner: need at least one environment");
}

std::uint64_t ParallelRunner::episodes_started() const {
  std::uint64_t n = 0;
  for (std::uint64_t c : episode_counter_) n += c;
  return n;
}

TrajectoryBatch ParallelRunner::run(RolloutPolicy& policy, std::size_t budget) {
  const std::size_t n_envs = envs_.size();
  TrajectoryBatch batch;
  batch.episodes.resize(n_envs);
  std::vector<Matrix> obs(n_envs);
  std::vector<RowVector> state(n_envs);
  for (std::size_t e = 0; e < n_envs; ++e) {
    const std::uint64_t episode_seed = mix_seed(mix_seed(seed_, e), episode_counter_[e]++);
    Observation o = envs_[e]->reset(episode_seed);
    obs[e] = std::move(o.obs);
    state[e] = std::move(o.state);
  }
  policy.on_reset(obs);

  std::vector<std::size_t> active(n_envs);
  for (std::size_t e = 0; e < n_envs; ++e) active[e] = e;
  std::size_t taken = 0;
  while (!active.empty() && taken < budget) {
    if (active.size() > budget - taken) active.resize(budget - taken);
    const std::vector<std::vector<int>> actions = policy.act(active, obs);
    if (actions.size() != active.size()) throw UsageError("ParallelRunner: policy returned the wrong number of actions");
    std::vector<Transition*> stepped;
    stepped.reserve(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
      const std::size_t e = active[k];
      StepResult r = envs_[e]->step(actions[k]);
      Transition tr;
      tr.obs = std::move(obs[e]);
      tr.state = std::move(state[e]);
      tr.actions = actions[k];
      tr.reward = r.reward;
      tr.agent_rewards = std::move(r.agent_rewards);
      tr.terminated = r.terminated;
      tr.truncated = r.truncated;
      tr.next_obs = r.obs;
      tr.next_state = r.state;
      obs[e] = std::move(r.obs);
      state[e] = std::move(r.state);
      batch.episodes[e].push_back(std::move(tr));
      ++taken;
    }
    for (std::size_t e : active) stepped.push_back(&batch.episodes[e].back());
    if (taken >= budget) {
      for (Transition* tr : stepped) {
        if (!tr->done()) tr->truncated = true;
      }
    }
    policy.on_step(active, stepped);
    std::erase_if(active, [&](std::size_t e) { return batch.episodes[e].back().done(); });
  }
  // Envs the budget never reached still count as cut short.
  for (auto& ep : batch.episodes) {
    if (!ep.empty() && !ep.back().done()) ep.back().truncated = true;
  }
  return batch;
}

}  // namespace smpe::envs
