#include "rrc/active.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rrc/error.hpp"

namespace rrc {

double info_gain(const Belief& belief, const Channel& channel) {
  if (channel.beta() == 0.0) return 0.0;
  const auto& grid = *belief.grid();
  const std::size_t n = channel.size();
  std::vector<std::size_t> support;
  std::vector<std::vector<double>> lp;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    if (belief[i] <= 0.0) continue;
    support.push_back(i);
    lp.push_back(choice_log_probs(channel, grid[i].values()));
  }
  // log P(c) = log sum_theta b(theta) P(c | theta), normalized by sum b over the support.
  double mass = 0.0;
  for (std::size_t i : support) mass += belief[i];
  std::vector<double> log_pc(n);
  std::vector<double> terms(support.size());
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t k = 0; k < support.size(); ++k) terms[k] = std::log(belief[support[k]]) + lp[k][c];
    log_pc[c] = log_sum_exp(terms) - std::log(mass);
  }
  double mi = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    const double b = belief[support[k]] / mass;
    double inner = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double p = std::exp(lp[k][c]);
      if (p > 0.0) inner += p * (lp[k][c] - log_pc[c]);
    }
    mi += b * inner;
  }
  return std::max(mi, 0.0);
}

std::size_t select_channel(const Belief& belief, std::span<const ChannelPtr> channels) {
  if (channels.empty()) throw Error(ErrorCode::missing_channels, "no channels to select from");
  std::size_t best = 0;
  double best_gain = info_gain(belief, *channels[0]);
  for (std::size_t j = 1; j < channels.size(); ++j) {
    const double g = info_gain(belief, *channels[j]);
    if (g > best_gain) {
      best_gain = g;
      best = j;
    }
  }
  return best;
}

std::string_view to_string(QueryType type) {
  return type == QueryType::demonstration ? "demonstration" : "comparison";
}

std::vector<std::pair<std::size_t, std::size_t>> comparison_pairs(std::size_t n_candidates, std::size_t max_pairs) {
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < n_candidates; ++i) {
    for (std::size_t j = i + 1; j < n_candidates; ++j) all.emplace_back(i, j);
  }
  if (all.size() <= max_pairs) return all;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(max_pairs);
  for (std::size_t k = 0; k < max_pairs; ++k) out.push_back(all[k * all.size() / max_pairs]);
  return out;
}

VolumeRemovalPlanner::VolumeRemovalPlanner(const HypothesisGrid& grid, std::vector<QueryTask> tasks,
                                           std::size_t max_pairs, double tol)
    : m_(grid.size()), tasks_(std::move(tasks)) {
  if (tol < 0.0) throw Error(ErrorCode::invalid_argument, "constraint tolerance must be non-negative");
  data_.resize(tasks_.size());
  std::vector<double> u;
  for (std::size_t q = 0; q < tasks_.size(); ++q) {
    const auto& task = tasks_[q];
    if (task.features.size() != task.candidates.size() || task.features.empty()) {
      throw Error(ErrorCode::invalid_argument, "query task needs one feature vector per candidate");
    }
    auto& d = data_[q];
    const std::size_t k = task.features.size();
    d.answer.resize(m_);
    d.consistent.assign(k, Bitset(m_));
    d.pairs = comparison_pairs(k, max_pairs);
    d.first_ok.assign(d.pairs.size(), Bitset(m_));
    d.second_ok.assign(d.pairs.size(), Bitset(m_));
    u.resize(k);
    for (std::size_t i = 0; i < m_; ++i) {
      double top = -std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        u[c] = dot(grid[i].values(), task.features[c]);
        if (u[c] > top) {
          top = u[c];
          arg = c;
        }
      }
      d.answer[i] = arg;
      for (std::size_t c = 0; c < k; ++c) {
        if (u[c] >= top - tol) d.consistent[c].set(i);
      }
      for (std::size_t p = 0; p < d.pairs.size(); ++p) {
        const auto [a, b] = d.pairs[p];
        if (u[a] >= u[b] - tol) d.first_ok[p].set(i);
        if (u[b] >= u[a] - tol) d.second_ok[p].set(i);
      }
    }
  }
}

double VolumeRemovalPlanner::demo_score(const FeasibleSet& fs, std::size_t task) const {
  const auto& d = data_[task];
  const std::size_t total = feasible_volume(fs);
  if (total == 0) return 0.0;
  // Group feasible theta* by their answer; each group keeps |fs & consistent[answer]|.
  std::vector<std::size_t> group(d.consistent.size(), 0);
  for (std::size_t i = 0; i < m_; ++i) {
    if (fs.contains(i)) ++group[d.answer[i]];
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < group.size(); ++c) {
    if (group[c] != 0) sum += static_cast<double>(group[c]) * static_cast<double>(fs.mask.count_and(d.consistent[c]));
  }
  return sum / static_cast<double>(total);
}

std::size_t VolumeRemovalPlanner::comparison_score(const FeasibleSet& fs, std::size_t task, std::size_t pair) const {
  const auto& d = data_[task];
  return std::max(fs.mask.count_and(d.first_ok[pair]), fs.mask.count_and(d.second_ok[pair]));
}

VolumeStep VolumeRemovalPlanner::step(const FeasibleSet& fs, std::size_t theta_star, VolumeOptions options) const {
  if (feasible_volume(fs) == 0) throw Error(ErrorCode::invalid_argument, "feasible set is empty");
  if (tasks_.empty()) throw Error(ErrorCode::empty_query_list, "no query tasks");
  if (!options.demonstrations && !options.comparisons) {
    throw Error(ErrorCode::invalid_argument, "no query type enabled");
  }
  const double inf = std::numeric_limits<double>::infinity();
  double best_demo = inf;
  std::size_t demo_task = 0;
  if (options.demonstrations) {
    for (std::size_t q = 0; q < tasks_.size(); ++q) {
      const double v = demo_score(fs, q);
      if (v < best_demo) {
        best_demo = v;
        demo_task = q;
      }
    }
  }
  double best_comp = inf;
  std::size_t comp_task = 0;
  std::size_t comp_pair = 0;
  if (options.comparisons) {
    for (std::size_t q = 0; q < tasks_.size(); ++q) {
      for (std::size_t p = 0; p < data_[q].pairs.size(); ++p) {
        const auto v = static_cast<double>(comparison_score(fs, q, p));
        if (v < best_comp) {
          best_comp = v;
          comp_task = q;
          comp_pair = p;
        }
      }
    }
    if (best_comp == inf && !options.demonstrations) {
      throw Error(ErrorCode::empty_query_list, "no comparison pairs available");
    }
  }

  VolumeStep out;
  out.updated = fs;
  if (best_demo <= best_comp) {
    const std::size_t a = data_[demo_task].answer[theta_star];
    out.type = QueryType::demonstration;
    out.task = demo_task;
    out.choice = {a, a};
    out.score = best_demo;
    out.updated.mask &= data_[demo_task].consistent[a];
  } else {
    const auto& d = data_[comp_task];
    const auto [a, b] = d.pairs[comp_pair];
    const bool first = d.first_ok[comp_pair].test(theta_star);
    out.type = QueryType::comparison;
    out.task = comp_task;
    out.score = best_comp;
    if (first) {
      out.choice = {a, b};
      out.updated.mask &= d.first_ok[comp_pair];
    } else {
      out.choice = {b, a};
      out.updated.mask &= d.second_ok[comp_pair];
    }
  }
  return out;
}

VolumeStep greedy_volume_removal(const FeasibleSet& fs, std::span<const QueryTask> tasks, const HypothesisGrid& grid,
                                 std::size_t theta_star, double tol, VolumeOptions options) {
  if (tasks.empty()) throw Error(ErrorCode::empty_query_list, "no query tasks");
  VolumeRemovalPlanner planner(grid, std::vector<QueryTask>(tasks.begin(), tasks.end()), kMaxComparisonPairs, tol);
  return planner.step(fs, theta_star, options);
}

}  // namespace rrc
