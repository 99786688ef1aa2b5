#pragma once

#include "smpe/envs/env.hpp"

#include <random>

namespace smpe::envs {

/// Level-based foraging on a square grid.
///
/// Actions: 0 noop, 1 north (row-1), 2 south (row+1), 3 west (col-1),
/// 4 east (col+1), 5 load. An observation is a list of (row, col, level)
/// triplets: foods first, then the observing agent, then the other agents in
/// ascending index. Entities outside the sight window and consumed foods are
/// reported as (-1, -1, 0).
struct GridForageParams {
  int grid_size = 9;
  /// Chebyshev radius of the visible window; >= grid_size - 1 is full sight.
  int sight = 2;
  int n_agents = 3;
  int n_foods = 2;
  int max_agent_level = 2;
  /// Food level equals the sum of all agent levels, so every agent must load.
  bool coop = false;
  int max_episode_len = 50;
  /// Optional fixed levels; empty / 0 means drawn at reset.
  std::vector<int> agent_levels;
  int food_level = 0;

  /// Parses "Ss-GxG-Pp-Ff" with an optional "-coop" suffix.
  static GridForageParams parse(const std::string& name);
  std::string name() const;
};

struct GridEntity {
  int row = 0;
  int col = 0;
  int level = 0;
  bool consumed = false;
};

inline constexpr int kGridNoop = 0;
inline constexpr int kGridNorth = 1;
inline constexpr int kGridSouth = 2;
inline constexpr int kGridWest = 3;
inline constexpr int kGridEast = 4;
inline constexpr int kGridLoad = 5;
inline constexpr int kGridActions = 6;

class GridForage final : public Env {
public:
  explicit GridForage(GridForageParams params);

  const EnvSpec& spec() const override { return spec_; }
  const GridForageParams& params() const { return params_; }
  Observation reset(std::uint64_t seed) override;
  StepResult step(std::span<const int> actions) override;
  Matrix observe() const override;
  RowVector joint_state() const override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<GridForage>(*this); }

  /// Observation of one agent (the gridforage_observe operation).
  RowVector observe(int agent) const;

  /// Replaces the layout (positions, levels, consumed flags) and restarts the
  /// step counter. Used by tests and scripted scenarios.
  void set_layout(std::vector<GridEntity> agents, std::vector<GridEntity> foods);

  const std::vector<GridEntity>& agents() const { return agents_; }
  const std::vector<GridEntity>& foods() const { return foods_; }
  int steps() const { return steps_; }
  /// Sum of the levels of every food placed this episode.
  int total_food_level() const { return total_food_level_; }

private:
  RowVector observe_from(int agent, bool full_sight) const;
  bool occupied(int row, int col) const;

  GridForageParams params_;
  EnvSpec spec_;
  std::vector<GridEntity> agents_;
  std::vector<GridEntity> foods_;
  int steps_ = 0;
  int total_food_level_ = 0;
  bool done_ = true;
};

}  // namespace smpe::envs
