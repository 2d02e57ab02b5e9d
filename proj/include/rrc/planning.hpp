#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rrc/grid.hpp"
#include "rrc/reward_space.hpp"

namespace rrc {

/// Reward-to-go table for a fixed goal: value(t, s) is the best reward
/// collectable from cell s at step t through step `horizon`, ending at the goal,
/// including s itself; -inf when the goal cannot be reached in time.
class ValueTable {
 public:
  ValueTable(const GridEnvironment& env, std::span<const double> theta, Cell goal, int horizon);

  int horizon() const { return horizon_; }
  double value(int t, Cell c) const { return values_[static_cast<std::size_t>(t) * cells_ + index(c)]; }
  double& at(int t, std::size_t cell_index) { return values_[static_cast<std::size_t>(t) * cells_ + cell_index]; }
  std::size_t num_cells() const { return cells_; }

  /// Greedy forward pass: at each step the successor with the highest value is
  /// taken; values within a relative 1e-9 count as ties, broken by smallest cell.
  Trajectory rollout(const GridEnvironment& env, Cell start) const;

 private:
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }

  int horizon_;
  int width_;
  std::size_t cells_;
  std::vector<double> values_;
};

/// Horizon-T trajectory from start ending at goal maximizing theta . phi, by
/// finite-horizon dynamic programming. Ties resolve to the lexicographically
/// smallest cell sequence. Throws unreachable if no such trajectory exists.
Trajectory optimal_trajectory(const GridEnvironment& env, std::span<const double> theta, Cell start, Cell goal);

inline constexpr std::size_t kMaxEnumerationCells = 49;
inline constexpr int kMaxEnumerationHorizon = 12;
inline constexpr std::size_t kDefaultChoiceCap = 20000;

/// Number of length-(horizon+1) walks from start (ending at goal if given).
std::uint64_t count_trajectories(const GridEnvironment& env, Cell start, std::optional<Cell> goal, int horizon);

/// Every trajectory of horizon+1 cells from start (ending at goal when given),
/// in lexicographic order. Throws size_limit beyond 49 cells, horizon 12, or
/// `max_count` results.
std::vector<Trajectory> enumerate_trajectories(const GridEnvironment& env, Cell start,
                                               std::optional<Cell> goal, int horizon,
                                               std::size_t max_count = kDefaultChoiceCap);

/// Walks of horizon+1 cells that end at `end` (any start), lexicographic order.
std::vector<Trajectory> enumerate_trajectories_ending_at(const GridEnvironment& env, Cell end, int horizon,
                                                         std::size_t max_count = kDefaultChoiceCap);

/// Optimal trajectories for every hypothesis plus, for each positive noise
/// scale, one replan per hypothesis under a value table perturbed by i.i.d.
/// N(0, sigma^2) noise. Deduplicated by feature vector, first occurrence kept.
std::vector<Trajectory> candidate_trajectory_set(const GridEnvironment& env, const HypothesisGrid& hypotheses,
                                                 Cell start, Cell goal, std::span<const double> noise_scales,
                                                 std::uint64_t seed);

/// Indices of the first occurrence of each distinct feature vector (|diff| <= tol per entry).
std::vector<std::size_t> unique_by_features(const std::vector<FeatureVector>& features, double tol = 1e-9);

}  // namespace rrc
