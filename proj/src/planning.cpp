#include "rrc/planning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "rrc/error.hpp"
#include "rrc/rng.hpp"

namespace rrc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool ties_with(double candidate, double best) {
  return candidate >= best - 1e-9 * std::max(1.0, std::abs(best));
}

void check_enumeration_guard(const GridEnvironment& env, int horizon) {
  if (env.num_cells() > kMaxEnumerationCells || horizon > kMaxEnumerationHorizon) {
    throw Error(ErrorCode::size_limit, "exhaustive enumeration limited to 49 cells and horizon 12");
  }
  if (horizon < 0) throw Error(ErrorCode::invalid_argument, "horizon must be non-negative");
}

void enumerate_from(const GridEnvironment& env, std::optional<Cell> goal, int horizon, Trajectory& prefix,
                    std::vector<Trajectory>& out) {
  const int steps_taken = static_cast<int>(prefix.cells.size()) - 1;
  const Cell here = prefix.cells.back();
  if (steps_taken == horizon) {
    if (!goal || here == *goal) out.push_back(prefix);
    return;
  }
  for (Cell next : env.successors(here)) {
    if (goal && std::abs(next.x - goal->x) + std::abs(next.y - goal->y) > horizon - steps_taken - 1) continue;
    prefix.cells.push_back(next);
    enumerate_from(env, goal, horizon, prefix, out);
    prefix.cells.pop_back();
  }
}

}  // namespace

ValueTable::ValueTable(const GridEnvironment& env, std::span<const double> theta, Cell goal, int horizon)
    : horizon_(horizon), width_(env.width()), cells_(env.num_cells()) {
  if (theta.size() != env.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "reward weights do not match feature dimension");
  }
  if (!env.contains(goal)) throw Error(ErrorCode::invalid_argument, "goal outside grid");
  if (horizon < 0) throw Error(ErrorCode::invalid_argument, "horizon must be non-negative");
  std::vector<double> cell_reward(cells_);
  for (std::size_t i = 0; i < cells_; ++i) cell_reward[i] = dot(theta, env.features(env.cell_at(i)));

  values_.assign(static_cast<std::size_t>(horizon + 1) * cells_, kNegInf);
  at(horizon, index(goal)) = cell_reward[index(goal)];
  for (int t = horizon - 1; t >= 0; --t) {
    for (std::size_t i = 0; i < cells_; ++i) {
      double best = kNegInf;
      for (Cell n : env.successors(env.cell_at(i))) best = std::max(best, value(t + 1, n));
      if (best != kNegInf) at(t, i) = cell_reward[i] + best;
    }
  }
}

Trajectory ValueTable::rollout(const GridEnvironment& env, Cell start) const {
  if (!env.contains(start)) throw Error(ErrorCode::invalid_argument, "start outside grid");
  if (value(0, start) == kNegInf) {
    throw Error(ErrorCode::unreachable, "goal unreachable within horizon " + std::to_string(horizon_));
  }
  Trajectory traj;
  traj.cells.reserve(static_cast<std::size_t>(horizon_) + 1);
  traj.cells.push_back(start);
  for (int t = 0; t < horizon_; ++t) {
    const auto succ = env.successors(traj.cells.back());
    double best = kNegInf;
    for (Cell n : succ) best = std::max(best, value(t + 1, n));
    for (Cell n : succ) {
      if (value(t + 1, n) != kNegInf && ties_with(value(t + 1, n), best)) {
        traj.cells.push_back(n);
        break;
      }
    }
  }
  return traj;
}

Trajectory optimal_trajectory(const GridEnvironment& env, std::span<const double> theta, Cell start, Cell goal) {
  if (!env.contains(start) || !env.contains(goal)) {
    throw Error(ErrorCode::invalid_argument, "start or goal outside grid");
  }
  return ValueTable(env, theta, goal, env.horizon()).rollout(env, start);
}

std::uint64_t count_trajectories(const GridEnvironment& env, Cell start, std::optional<Cell> goal, int horizon) {
  if (horizon < 0) throw Error(ErrorCode::invalid_argument, "horizon must be non-negative");
  const std::size_t n = env.num_cells();
  std::vector<std::uint64_t> next(n, 0), cur(n, 0);
  for (std::size_t i = 0; i < n; ++i) next[i] = (!goal || env.cell_at(i) == *goal) ? 1 : 0;
  for (int t = horizon - 1; t >= 0; --t) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t total = 0;
      for (Cell s : env.successors(env.cell_at(i))) {
        const std::uint64_t add = next[env.index(s)];
        total = (total > UINT64_MAX - add) ? UINT64_MAX : total + add;
      }
      cur[i] = total;
    }
    std::swap(cur, next);
  }
  return next[env.index(start)];
}

std::vector<Trajectory> enumerate_trajectories(const GridEnvironment& env, Cell start, std::optional<Cell> goal,
                                               int horizon, std::size_t max_count) {
  check_enumeration_guard(env, horizon);
  if (!env.contains(start) || (goal && !env.contains(*goal))) {
    throw Error(ErrorCode::invalid_argument, "start or goal outside grid");
  }
  const auto n = count_trajectories(env, start, goal, horizon);
  if (n > max_count) {
    throw Error(ErrorCode::size_limit, "enumeration would produce " + std::to_string(n) +
                                           " trajectories (cap " + std::to_string(max_count) + ")");
  }
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(n));
  Trajectory prefix{{start}};
  enumerate_from(env, goal, horizon, prefix, out);
  return out;
}

std::vector<Trajectory> enumerate_trajectories_ending_at(const GridEnvironment& env, Cell end, int horizon,
                                                         std::size_t max_count) {
  // The move set is symmetric, so walks ending at `end` are reversed walks starting there.
  auto out = enumerate_trajectories(env, end, std::nullopt, horizon, max_count);
  for (auto& t : out) std::reverse(t.cells.begin(), t.cells.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> unique_by_features(const std::vector<FeatureVector>& features, double tol) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < features.size(); ++i) {
    bool duplicate = false;
    for (std::size_t k : keep) {
      bool same = true;
      for (std::size_t d = 0; d < features[i].size() && same; ++d) {
        same = std::abs(features[i][d] - features[k][d]) <= tol;
      }
      if (same) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) keep.push_back(i);
  }
  return keep;
}

std::vector<Trajectory> candidate_trajectory_set(const GridEnvironment& env, const HypothesisGrid& hypotheses,
                                                 Cell start, Cell goal, std::span<const double> noise_scales,
                                                 std::uint64_t seed) {
  if (hypotheses.size() == 0) throw Error(ErrorCode::empty_grid, "candidate set needs hypotheses");
  Rng rng(seed);
  std::vector<Trajectory> raw;
  std::vector<FeatureVector> feats;
  auto add = [&](Trajectory t) {
    feats.push_back(trajectory_features(env, t));
    raw.push_back(std::move(t));
  };
  std::vector<ValueTable> tables;
  tables.reserve(hypotheses.size());
  for (const auto& theta : hypotheses.thetas()) {
    tables.emplace_back(env, theta.values(), goal, env.horizon());
    add(tables.back().rollout(env, start));
  }
  for (double sigma : noise_scales) {
    if (!(sigma > 0.0)) continue;
    for (const auto& base : tables) {
      ValueTable noisy = base;
      for (int t = 0; t <= noisy.horizon(); ++t) {
        for (std::size_t i = 0; i < noisy.num_cells(); ++i) {
          double& v = noisy.at(t, i);
          if (v != kNegInf) v += sigma * rng.normal();
        }
      }
      add(noisy.rollout(env, start));
    }
  }
  std::vector<Trajectory> out;
  for (std::size_t i : unique_by_features(feats)) out.push_back(std::move(raw[i]));
  return out;
}

}  // namespace rrc
