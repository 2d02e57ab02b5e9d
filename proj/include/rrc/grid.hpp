#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace rrc {

using FeatureVector = std::vector<double>;

struct Cell {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Ordered sequence of grid cells. Consecutive cells are 4-adjacent or equal.
struct Trajectory {
  std::vector<Cell> cells;

  std::size_t size() const { return cells.size(); }
  const Cell& back() const { return cells.back(); }

  friend auto operator<=>(const Trajectory&, const Trajectory&) = default;
};

struct StartGoal {
  Cell start;
  Cell goal;
};

/// Deterministic finite-horizon gridworld. Each cell carries a named type whose
/// feature vector (dimension d) drives the linear reward.
class GridEnvironment {
 public:
  GridEnvironment(int width, int height, int horizon, std::vector<std::string> cell_types,
                  std::vector<std::string> type_names, std::vector<FeatureVector> type_features,
                  std::vector<StartGoal> start_goal_pairs);

  int width() const { return width_; }
  int height() const { return height_; }
  int horizon() const { return horizon_; }
  std::size_t dim() const { return dim_; }
  std::size_t num_cells() const { return static_cast<std::size_t>(width_) * height_; }

  bool contains(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell_at(std::size_t index) const {
    return {static_cast<int>(index % width_), static_cast<int>(index / width_)};
  }

  std::span<const double> features(Cell c) const;
  const std::string& cell_type(Cell c) const { return cell_types_[index(c)]; }
  const std::vector<std::string>& type_names() const { return type_names_; }
  const std::vector<StartGoal>& start_goal_pairs() const { return start_goal_pairs_; }

  /// Successors under the five deterministic actions, sorted ascending by cell.
  std::vector<Cell> successors(Cell c) const;

  GridEnvironment with_horizon(int horizon) const;

  nlohmann::json to_json() const;
  static GridEnvironment from_json(const nlohmann::json& j);

 private:
  int width_;
  int height_;
  int horizon_;
  std::size_t dim_ = 0;
  std::vector<std::string> cell_types_;
  std::vector<std::string> type_names_;
  std::vector<FeatureVector> type_features_;
  std::vector<std::size_t> cell_type_index_;
  std::vector<double> cell_features_;  // num_cells x dim, row-major
  std::vector<StartGoal> start_goal_pairs_;
};

bool adjacent_or_equal(Cell a, Cell b);

/// Throws invalid_trajectory if a cell is outside the grid or a step is not a legal move.
void validate_trajectory(const GridEnvironment& env, const Trajectory& traj);

/// Sum of cell features over every visited position (revisits counted).
FeatureVector trajectory_features(const GridEnvironment& env, const Trajectory& traj);

double dot(std::span<const double> a, std::span<const double> b);

double reward_of(std::span<const double> theta, const Trajectory& traj, const GridEnvironment& env);

/// Extends a trajectory to `length` cells by staying at its last cell.
Trajectory pad_to_length(Trajectory traj, std::size_t length);

nlohmann::json cell_to_json(Cell c);
Cell cell_from_json(const nlohmann::json& j);
nlohmann::json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

}  // namespace rrc
