#include "smpe/envs/gridforage.hpp"

#include "smpe/errors.hpp"

#include <algorithm>
#include <numeric>
#include <regex>

namespace smpe::envs {

namespace {

constexpr int kTriplet = 3;

bool adjacent4(const GridEntity& a, const GridEntity& b) {
  return std::abs(a.row - b.row) + std::abs(a.col - b.col) == 1;
}

}  // namespace

GridForageParams GridForageParams::parse(const std::string& name) {
  static const std::regex pattern(R"((\d+)s-(\d+)x(\d+)-(\d+)p-(\d+)f(-coop)?)");
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) {
    throw ConfigError("gridforage preset '" + name + "' does not match Ss-GxG-Pp-Ff[-coop]");
  }
  if (m[2] != m[3]) throw ConfigError("gridforage preset '" + name + "': grid must be square");
  GridForageParams p;
  p.sight = std::stoi(m[1]);
  p.grid_size = std::stoi(m[2]);
  p.n_agents = std::stoi(m[4]);
  p.n_foods = std::stoi(m[5]);
  p.coop = m[6].matched;
  return p;
}

std::string GridForageParams::name() const {
  std::string n = std::to_string(sight) + "s-" + std::to_string(grid_size) + "x" + std::to_string(grid_size) + "-" +
                  std::to_string(n_agents) + "p-" + std::to_string(n_foods) + "f";
  return coop ? n + "-coop" : n;
}

GridForage::GridForage(GridForageParams params) : params_(std::move(params)) {
  const GridForageParams& p = params_;
  if (p.grid_size < 3) throw ConfigError("gridforage: grid size must be at least 3");
  if (p.n_agents < 1 || p.n_foods < 1) throw ConfigError("gridforage: need at least one agent and one food");
  if (p.sight < 0) throw ConfigError("gridforage: sight must be non-negative");
  if (p.max_agent_level < 1) throw ConfigError("gridforage: max agent level must be positive");
  if (p.max_episode_len <= 0) throw ConfigError("gridforage: episode length must be positive");
  if (!p.agent_levels.empty() && static_cast<int>(p.agent_levels.size()) != p.n_agents) {
    throw ConfigError("gridforage: fixed agent levels must list every agent");
  }
  // Foods live on interior cells with no food in their 8-neighbourhood.
  const int interior = (p.grid_size - 1) / 2;
  if (p.n_foods > interior * interior || p.n_agents + p.n_foods > p.grid_size * p.grid_size) {
    throw ConfigError("gridforage: " + p.name() + " cannot fit all entities");
  }
  const int level_budget = p.agent_levels.empty()
                               ? p.n_agents  // worst case: every agent draws level 1
                               : std::accumulate(p.agent_levels.begin(), p.agent_levels.end(), 0);
  if (p.food_level > 0 && p.food_level > level_budget) {
    throw ConfigError("gridforage: food level " + std::to_string(p.food_level) +
                      " exceeds the combined agent level " + std::to_string(level_budget) + " (unsolvable)");
  }
  spec_.name = p.name();
  spec_.n_agents = p.n_agents;
  spec_.obs_dim = kTriplet * (p.n_agents + p.n_foods);
  spec_.n_actions = kGridActions;
  spec_.max_episode_len = p.max_episode_len;
  spec_.state_dim = p.n_agents * spec_.obs_dim;
}

bool GridForage::occupied(int row, int col) const {
  for (const GridEntity& f : foods_) {
    if (!f.consumed && f.row == row && f.col == col) return true;
  }
  for (const GridEntity& a : agents_) {
    if (a.row == row && a.col == col) return true;
  }
  return false;
}

Observation GridForage::reset(std::uint64_t seed) {
  const GridForageParams& p = params_;
  std::mt19937_64 rng(seed);
  agents_.assign(static_cast<std::size_t>(p.n_agents), GridEntity{});
  foods_.assign(static_cast<std::size_t>(p.n_foods), GridEntity{});

  std::uniform_int_distribution<int> agent_level(1, p.max_agent_level);
  int level_sum = 0;
  for (int i = 0; i < p.n_agents; ++i) {
    const int lvl = p.agent_levels.empty() ? agent_level(rng) : p.agent_levels[static_cast<std::size_t>(i)];
    agents_[static_cast<std::size_t>(i)].level = lvl;
    level_sum += lvl;
  }
  std::uniform_int_distribution<int> food_level(1, level_sum);
  for (GridEntity& f : foods_) {
    if (p.food_level > 0) {
      f.level = std::min(p.food_level, level_sum);
    } else {
      f.level = p.coop ? level_sum : food_level(rng);
    }
  }

  // Placement works on a scratch list so occupied() only sees placed entities.
  std::vector<GridEntity> foods = foods_;
  foods_.clear();
  std::uniform_int_distribution<int> inner(1, p.grid_size - 2);
  for (GridEntity& f : foods) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw ConfigError("gridforage: could not place foods for " + p.name());
      const int r = inner(rng), c = inner(rng);
      const bool crowded = std::any_of(foods_.begin(), foods_.end(), [&](const GridEntity& o) {
        return std::abs(o.row - r) <= 1 && std::abs(o.col - c) <= 1;
      });
      if (crowded) continue;
      f.row = r;
      f.col = c;
      foods_.push_back(f);
      break;
    }
  }
  std::vector<GridEntity> agents = agents_;
  agents_.clear();
  std::uniform_int_distribution<int> cell(0, p.grid_size - 1);
  for (GridEntity& a : agents) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw ConfigError("gridforage: could not place agents for " + p.name());
      const int r = cell(rng), c = cell(rng);
      if (occupied(r, c)) continue;
      a.row = r;
      a.col = c;
      agents_.push_back(a);
      break;
    }
  }
  total_food_level_ = 0;
  for (const GridEntity& f : foods_) total_food_level_ += f.level;
  steps_ = 0;
  done_ = false;
  return {observe(), joint_state()};
}

void GridForage::set_layout(std::vector<GridEntity> agents, std::vector<GridEntity> foods) {
  if (static_cast<int>(agents.size()) != params_.n_agents || static_cast<int>(foods.size()) != params_.n_foods) {
    throw UsageError("gridforage: layout does not match the entity counts");
  }
  agents_ = std::move(agents);
  foods_ = std::move(foods);
  total_food_level_ = 0;
  for (const GridEntity& f : foods_) total_food_level_ += f.level;
  steps_ = 0;
  done_ = std::all_of(foods_.begin(), foods_.end(), [](const GridEntity& f) { return f.consumed; });
}

StepResult GridForage::step(std::span<const int> actions) {
  if (done_) throw UsageError("gridforage: step called on a finished episode; call reset first");
  if (static_cast<int>(actions.size()) != params_.n_agents) {
    throw UsageError("gridforage: expected " + std::to_string(params_.n_agents) + " actions");
  }
  for (int a : actions) {
    if (a < 0 || a >= kGridActions) throw UsageError("gridforage: action " + std::to_string(a) + " out of range");
  }
  ++steps_;
  const int n = params_.n_agents;
  const int g = params_.grid_size;

  // Movement: a move succeeds when its target cell is on-grid, currently empty,
  // and not claimed by any other agent this step.
  std::vector<std::pair<int, int>> target(static_cast<std::size_t>(n));
  std::vector<bool> moving(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const GridEntity& a = agents_[static_cast<std::size_t>(i)];
    int r = a.row, c = a.col;
    switch (actions[static_cast<std::size_t>(i)]) {
      case kGridNorth: --r; break;
      case kGridSouth: ++r; break;
      case kGridWest: --c; break;
      case kGridEast: ++c; break;
      default: break;
    }
    target[static_cast<std::size_t>(i)] = {r, c};
    const bool move = (r != a.row || c != a.col);
    moving[static_cast<std::size_t>(i)] = move && r >= 0 && r < g && c >= 0 && c < g && !occupied(r, c);
  }
  for (int i = 0; i < n; ++i) {
    if (!moving[static_cast<std::size_t>(i)]) continue;
    int claims = 0;
    for (int j = 0; j < n; ++j) {
      if (moving[static_cast<std::size_t>(j)] && target[static_cast<std::size_t>(j)] == target[static_cast<std::size_t>(i)]) ++claims;
    }
    if (claims > 1) continue;
    agents_[static_cast<std::size_t>(i)].row = target[static_cast<std::size_t>(i)].first;
    agents_[static_cast<std::size_t>(i)].col = target[static_cast<std::size_t>(i)].second;
  }

  StepResult result;
  result.agent_rewards.assign(static_cast<std::size_t>(n), 0.0);
  for (GridEntity& food : foods_) {
    if (food.consumed) continue;
    int loader_levels = 0;
    std::vector<int> loaders;
    for (int i = 0; i < n; ++i) {
      const GridEntity& a = agents_[static_cast<std::size_t>(i)];
      if (actions[static_cast<std::size_t>(i)] == kGridLoad && adjacent4(a, food)) {
        loaders.push_back(i);
        loader_levels += a.level;
      }
    }
    if (loaders.empty() || loader_levels < food.level) continue;
    food.consumed = true;
    for (int i : loaders) {
      const double share = static_cast<double>(food.level) * agents_[static_cast<std::size_t>(i)].level /
                           (static_cast<double>(total_food_level_) * loader_levels);
      result.agent_rewards[static_cast<std::size_t>(i)] += share;
    }
  }
  for (double r : result.agent_rewards) result.reward += r;
  result.terminated = std::all_of(foods_.begin(), foods_.end(), [](const GridEntity& f) { return f.consumed; });
  result.truncated = !result.terminated && steps_ >= params_.max_episode_len;
  done_ = result.done();
  result.obs = observe();
  result.state = joint_state();
  return result;
}

RowVector GridForage::observe_from(int agent, bool full_sight) const {
  RowVector o(spec_.obs_dim);
  const GridEntity& self = agents_[static_cast<std::size_t>(agent)];
  Eigen::Index k = 0;
  auto put = [&](const GridEntity& e, bool visible) {
    if (visible) {
      o(k) = e.row;
      o(k + 1) = e.col;
      o(k + 2) = e.level;
    } else {
      o(k) = -1.0;
      o(k + 1) = -1.0;
      o(k + 2) = 0.0;
    }
    k += kTriplet;
  };
  auto in_sight = [&](const GridEntity& e) {
    return full_sight || (std::abs(e.row - self.row) <= params_.sight && std::abs(e.col - self.col) <= params_.sight);
  };
  for (const GridEntity& f : foods_) put(f, !f.consumed && in_sight(f));
  put(self, true);
  for (int j = 0; j < params_.n_agents; ++j) {
    if (j == agent) continue;
    put(agents_[static_cast<std::size_t>(j)], in_sight(agents_[static_cast<std::size_t>(j)]));
  }
  return o;
}

RowVector GridForage::observe(int agent) const {
  if (agent < 0 || agent >= params_.n_agents) throw UsageError("gridforage: agent index out of range");
  return observe_from(agent, false);
}

Matrix GridForage::observe() const {
  Matrix obs(params_.n_agents, spec_.obs_dim);
  for (int i = 0; i < params_.n_agents; ++i) obs.row(i) = observe_from(i, false);
  return obs;
}

RowVector GridForage::joint_state() const {
  RowVector s(spec_.state_dim);
  for (int i = 0; i < params_.n_agents; ++i) s.segment(i * spec_.obs_dim, spec_.obs_dim) = observe_from(i, true);
  return s;
}

}  // namespace smpe::envs
