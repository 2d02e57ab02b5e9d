#pragma once

// Independent reference computations for the unit and acceptance tests. None of
// these call the library's planners, likelihoods or posterior code.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rrc/grid.hpp"
#include "rrc/reward_space.hpp"

namespace oracle {

inline std::filesystem::path source_dir() { return RRC_SOURCE_DIR; }
inline std::filesystem::path config_path(const std::string& name) { return source_dir() / "configs" / name; }

/// Random w x h grid with `types` cell types, each a random feature vector in [-1, 1]^dim.
inline rrc::GridEnvironment random_env(std::mt19937_64& gen, int w, int h, int horizon, std::size_t dim,
                                       std::size_t types = 3) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::string> names;
  std::vector<rrc::FeatureVector> feats;
  for (std::size_t t = 0; t < types; ++t) {
    names.push_back("t" + std::to_string(t));
    rrc::FeatureVector f(dim);
    for (auto& x : f) x = u(gen);
    feats.push_back(f);
  }
  std::vector<std::string> cells;
  for (int i = 0; i < w * h; ++i) cells.push_back(names[gen() % types]);
  return rrc::GridEnvironment(w, h, horizon, cells, names, feats, {});
}

inline std::vector<double> random_unit(std::mt19937_64& gen, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  double s = 0.0;
  for (auto& x : v) {
    x = n(gen);
    s += x * x;
  }
  for (auto& x : v) x /= std::sqrt(s);
  return v;
}

using Walk = std::vector<std::pair<int, int>>;

/// Every walk of horizon+1 cells from `start` under the five moves, by plain recursion.
inline void walks_from(const rrc::GridEnvironment& env, Walk& cur, int steps_left, std::vector<Walk>& out) {
  if (steps_left == 0) {
    out.push_back(cur);
    return;
  }
  static const int dx[] = {0, 1, -1, 0, 0};
  static const int dy[] = {0, 0, 0, 1, -1};
  const auto [x, y] = cur.back();
  for (int k = 0; k < 5; ++k) {
    const int nx = x + dx[k], ny = y + dy[k];
    if (nx < 0 || ny < 0 || nx >= env.width() || ny >= env.height()) continue;
    cur.emplace_back(nx, ny);
    walks_from(env, cur, steps_left - 1, out);
    cur.pop_back();
  }
}

inline std::vector<Walk> all_walks(const rrc::GridEnvironment& env, rrc::Cell start, std::optional<rrc::Cell> goal,
                                   int horizon) {
  std::vector<Walk> all;
  Walk cur{{start.x, start.y}};
  walks_from(env, cur, horizon, all);
  if (!goal) return all;
  std::vector<Walk> out;
  for (auto& w : all) {
    if (w.back() == std::make_pair(goal->x, goal->y)) out.push_back(std::move(w));
  }
  return out;
}

/// Feature sum read cell by cell from the environment's per-cell vectors.
inline std::vector<double> walk_features(const rrc::GridEnvironment& env, const Walk& w) {
  std::vector<double> f(env.dim(), 0.0);
  for (const auto& [x, y] : w) {
    const auto c = env.features({x, y});
    for (std::size_t d = 0; d < f.size(); ++d) f[d] += c[d];
  }
  return f;
}

inline double dotp(const std::vector<double>& a, std::span<const double> b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

/// P(c | theta) = exp(beta u_c) / sum exp(beta u), evaluated directly in long double.
inline std::vector<long double> direct_choice_probs(const std::vector<std::vector<double>>& choice_features,
                                                    std::span<const double> theta, double beta) {
  std::vector<long double> w(choice_features.size());
  long double z = 0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    w[c] = std::exp(static_cast<long double>(beta) * dotp(choice_features[c], theta));
    z += w[c];
  }
  for (auto& x : w) x /= z;
  return w;
}

/// Posterior after one observed choice by direct summation over hypotheses.
inline std::vector<double> direct_posterior(const std::vector<std::vector<double>>& choice_features, std::size_t chosen,
                                            double beta, const rrc::HypothesisGrid& grid,
                                            const std::vector<double>& prior) {
  std::vector<long double> post(grid.size());
  long double z = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    post[i] = prior[i] * direct_choice_probs(choice_features, grid[i].values(), beta)[chosen];
    z += post[i];
  }
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(post[i] / z);
  return out;
}

/// Mutual information of the joint p(theta, c) = b(theta) P(c | theta), in nats.
inline double direct_mutual_information(const std::vector<std::vector<double>>& choice_features, double beta,
                                        const rrc::HypothesisGrid& grid, const std::vector<double>& belief) {
  const std::size_t n = choice_features.size();
  std::vector<std::vector<long double>> joint(grid.size(), std::vector<long double>(n));
  std::vector<long double> pc(n, 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = direct_choice_probs(choice_features, grid[i].values(), beta);
    for (std::size_t c = 0; c < n; ++c) {
      joint[i][c] = belief[i] * p[c];
      pc[c] += joint[i][c];
    }
  }
  long double mi = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t c = 0; c < n; ++c) {
      if (joint[i][c] > 0) mi += joint[i][c] * std::log(joint[i][c] / (belief[i] * pc[c]));
    }
  }
  return static_cast<double>(mi);
}

/// Random hypothesis grid of m unit vectors.
inline rrc::HypothesisGrid random_grid(std::mt19937_64& gen, std::size_t m, std::size_t dim) {
  std::vector<rrc::RewardWeights> ws;
  for (std::size_t i = 0; i < m; ++i) ws.emplace_back(random_unit(gen, dim));
  return rrc::HypothesisGrid(std::move(ws));
}

}  // namespace oracle
