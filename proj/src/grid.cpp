#include "rrc/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "rrc/error.hpp"

namespace rrc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_trajectory: return "invalid_trajectory";
    case ErrorCode::unreachable: return "unreachable";
    case ErrorCode::size_limit: return "size_limit";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::empty_grid: return "empty_grid";
    case ErrorCode::divergence_undefined: return "divergence_undefined";
    case ErrorCode::construction: return "construction";
    case ErrorCode::choice_not_in_channel: return "choice_not_in_channel";
    case ErrorCode::empty_grounding: return "empty_grounding";
    case ErrorCode::immovable_start: return "immovable_start";
    case ErrorCode::degenerate_evidence: return "degenerate_evidence";
    case ErrorCode::unsupported_channel: return "unsupported_channel";
    case ErrorCode::missing_channels: return "missing_channels";
    case ErrorCode::domain: return "domain";
    case ErrorCode::indeterminate_beta: return "indeterminate_beta";
    case ErrorCode::empty_query_list: return "empty_query_list";
    case ErrorCode::config: return "config";
    case ErrorCode::not_found: return "not_found";
  }
  return "unknown";
}

GridEnvironment::GridEnvironment(int width, int height, int horizon,
                                 std::vector<std::string> cell_types,
                                 std::vector<std::string> type_names,
                                 std::vector<FeatureVector> type_features,
                                 std::vector<StartGoal> start_goal_pairs)
    : width_(width),
      height_(height),
      horizon_(horizon),
      cell_types_(std::move(cell_types)),
      type_names_(std::move(type_names)),
      type_features_(std::move(type_features)),
      start_goal_pairs_(std::move(start_goal_pairs)) {
  if (width_ <= 0 || height_ <= 0) {
    throw Error(ErrorCode::invalid_argument, "grid width and height must be positive");
  }
  if (horizon_ < 0) throw Error(ErrorCode::invalid_argument, "horizon must be non-negative");
  if (cell_types_.size() != num_cells()) {
    throw Error(ErrorCode::invalid_argument, "expected one cell type per grid cell");
  }
  if (type_names_.size() != type_features_.size() || type_names_.empty()) {
    throw Error(ErrorCode::invalid_argument, "feature table is empty or misaligned");
  }
  dim_ = type_features_.front().size();
  if (dim_ == 0) throw Error(ErrorCode::invalid_argument, "feature dimension must be positive");
  for (const auto& f : type_features_) {
    if (f.size() != dim_) {
      throw Error(ErrorCode::dimension_mismatch, "all feature vectors must share one dimension");
    }
  }
  cell_type_index_.reserve(num_cells());
  cell_features_.reserve(num_cells() * dim_);
  for (const auto& name : cell_types_) {
    auto it = std::find(type_names_.begin(), type_names_.end(), name);
    if (it == type_names_.end()) {
      throw Error(ErrorCode::invalid_argument, "cell type '" + name + "' has no feature vector");
    }
    auto k = static_cast<std::size_t>(it - type_names_.begin());
    cell_type_index_.push_back(k);
    cell_features_.insert(cell_features_.end(), type_features_[k].begin(), type_features_[k].end());
  }
  for (const auto& sg : start_goal_pairs_) {
    if (!contains(sg.start) || !contains(sg.goal)) {
      throw Error(ErrorCode::invalid_argument, "start/goal pair lies outside the grid");
    }
  }
}

std::span<const double> GridEnvironment::features(Cell c) const {
  if (!contains(c)) throw Error(ErrorCode::invalid_trajectory, "cell outside grid");
  return {cell_features_.data() + index(c) * dim_, dim_};
}

std::vector<Cell> GridEnvironment::successors(Cell c) const {
  // Sorted by (x, y): left, down, stay, up, right.
  std::vector<Cell> out;
  out.reserve(5);
  for (Cell n : {Cell{c.x - 1, c.y}, Cell{c.x, c.y - 1}, c, Cell{c.x, c.y + 1}, Cell{c.x + 1, c.y}}) {
    if (contains(n)) out.push_back(n);
  }
  return out;
}

GridEnvironment GridEnvironment::with_horizon(int horizon) const {
  GridEnvironment copy = *this;
  if (horizon < 0) throw Error(ErrorCode::invalid_argument, "horizon must be non-negative");
  copy.horizon_ = horizon;
  return copy;
}

nlohmann::json GridEnvironment::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int y = 0; y < height_; ++y) {
    nlohmann::json row = nlohmann::json::array();
    for (int x = 0; x < width_; ++x) row.push_back(cell_type({x, y}));
    rows.push_back(std::move(row));
  }
  nlohmann::json vectors = nlohmann::json::object();
  for (std::size_t k = 0; k < type_names_.size(); ++k) vectors[type_names_[k]] = type_features_[k];
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& sg : start_goal_pairs_) {
    pairs.push_back({cell_to_json(sg.start), cell_to_json(sg.goal)});
  }
  return {{"width", width_},     {"height", height_},           {"horizon", horizon_},
          {"features", rows},    {"feature_vectors", vectors}, {"start_goal_pairs", pairs}};
}

GridEnvironment GridEnvironment::from_json(const nlohmann::json& j) {
  const int width = j.at("width").get<int>();
  const int height = j.at("height").get<int>();
  const int horizon = j.at("horizon").get<int>();
  const auto& rows = j.at("features");
  if (!rows.is_array() || rows.size() != static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::invalid_argument, "features must have one row per grid row");
  }
  std::vector<std::string> cells;
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(width)) {
      throw Error(ErrorCode::invalid_argument, "every feature row must have width entries");
    }
    for (const auto& name : row) cells.push_back(name.get<std::string>());
  }
  std::vector<std::string> names;
  std::vector<FeatureVector> vectors;
  for (const auto& [name, vec] : j.at("feature_vectors").items()) {
    names.push_back(name);
    vectors.push_back(vec.get<FeatureVector>());
  }
  std::vector<StartGoal> pairs;
  if (j.contains("start_goal_pairs")) {
    for (const auto& p : j.at("start_goal_pairs")) {
      pairs.push_back({cell_from_json(p.at(0)), cell_from_json(p.at(1))});
    }
  }
  return GridEnvironment(width, height, horizon, std::move(cells), std::move(names),
                         std::move(vectors), std::move(pairs));
}

bool adjacent_or_equal(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y) <= 1; }

void validate_trajectory(const GridEnvironment& env, const Trajectory& traj) {
  if (traj.cells.empty()) throw Error(ErrorCode::invalid_trajectory, "empty trajectory");
  for (std::size_t i = 0; i < traj.cells.size(); ++i) {
    if (!env.contains(traj.cells[i])) {
      throw Error(ErrorCode::invalid_trajectory, "trajectory leaves the grid at step " + std::to_string(i));
    }
    if (i > 0 && !adjacent_or_equal(traj.cells[i - 1], traj.cells[i])) {
      throw Error(ErrorCode::invalid_trajectory, "non-adjacent step at index " + std::to_string(i));
    }
  }
}

FeatureVector trajectory_features(const GridEnvironment& env, const Trajectory& traj) {
  FeatureVector out(env.dim(), 0.0);
  for (const Cell& c : traj.cells) {
    auto f = env.features(c);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += f[k];
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: " + std::to_string(a.size()) +
                                                   " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double reward_of(std::span<const double> theta, const Trajectory& traj, const GridEnvironment& env) {
  if (theta.size() != env.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "reward weights do not match feature dimension");
  }
  return dot(theta, trajectory_features(env, traj));
}

Trajectory pad_to_length(Trajectory traj, std::size_t length) {
  if (traj.cells.empty()) throw Error(ErrorCode::invalid_trajectory, "cannot pad an empty trajectory");
  while (traj.cells.size() < length) traj.cells.push_back(traj.cells.back());
  return traj;
}

nlohmann::json cell_to_json(Cell c) { return nlohmann::json::array({c.x, c.y}); }

Cell cell_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorCode::invalid_argument, "cell must be an [x, y] pair");
  }
  return {j.at(0).get<int>(), j.at(1).get<int>()};
}

nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json out = nlohmann::json::array();
  for (const Cell& c : t.cells) out.push_back(cell_to_json(c));
  return out;
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::invalid_argument, "trajectory must be an array of cells");
  Trajectory t;
  for (const auto& c : j) t.cells.push_back(cell_from_json(c));
  return t;
}

}  // namespace rrc
