#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "rrc/channels.hpp"
#include "rrc/inference.hpp"

namespace rrc {

/// Mutual information between the hypothesis and the next choice from
/// `channel`, in nats. Exactly 0 for beta = 0; clamped at 0 against rounding.
double info_gain(const Belief& belief, const Channel& channel);

/// Index of the channel with the largest info gain, lowest index on ties.
std::size_t select_channel(const Belief& belief, std::span<const ChannelPtr> channels);

enum class QueryType { demonstration, comparison };
std::string_view to_string(QueryType type);

/// A (start, goal) task in some environment with its candidate trajectory set.
/// Demonstrations choose among all candidates; comparisons among pairs of them.
struct QueryTask {
  std::size_t env = 0;
  Cell start;
  Cell goal;
  std::vector<Trajectory> candidates;
  std::vector<FeatureVector> features;
};

struct VolumeStep {
  QueryType type = QueryType::demonstration;
  std::size_t task = 0;
  /// Demonstration: the simulated answer in both slots. Comparison: the pair,
  /// with the simulated preferred trajectory first.
  std::pair<std::size_t, std::size_t> choice{0, 0};
  /// V_demo or V_comp of the selected query.
  double score = 0.0;
  FeasibleSet updated;
};

struct VolumeOptions {
  bool demonstrations = true;
  bool comparisons = true;
};

inline constexpr std::size_t kMaxComparisonPairs = 2000;

/// Greedy volume removal with every per-hypothesis constraint precomputed as a
/// bitset, so each step is a sweep of popcounts.
class VolumeRemovalPlanner {
 public:
  VolumeRemovalPlanner(const HypothesisGrid& grid, std::vector<QueryTask> tasks,
                       std::size_t max_pairs = kMaxComparisonPairs, double tol = kDefaultConstraintTol);

  const std::vector<QueryTask>& tasks() const { return tasks_; }
  std::span<const std::pair<std::size_t, std::size_t>> pairs(std::size_t task) const { return data_[task].pairs; }

  /// Expected surviving count over theta* uniform on fs, after its demonstration.
  double demo_score(const FeasibleSet& fs, std::size_t task) const;
  /// Worst-case surviving count over the two answers to comparison `pair`.
  std::size_t comparison_score(const FeasibleSet& fs, std::size_t task, std::size_t pair) const;

  /// Demonstration answer of hypothesis `theta`: its best candidate, lowest index on ties.
  std::size_t demo_answer(std::size_t task, std::size_t theta) const { return data_[task].answer[theta]; }

  /// Picks the query with the smallest score (demonstration on ties, then the
  /// lowest task and pair index) and applies the answer of hypothesis `theta_star`.
  /// Throws invalid_argument on an empty feasible set.
  VolumeStep step(const FeasibleSet& fs, std::size_t theta_star, VolumeOptions options = {}) const;

 private:
  struct TaskData {
    std::vector<std::size_t> answer;
    std::vector<Bitset> consistent;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<Bitset> first_ok;
    std::vector<Bitset> second_ok;
  };

  std::size_t m_;
  std::vector<QueryTask> tasks_;
  std::vector<TaskData> data_;
};

/// All unordered candidate pairs (i < j, lexicographic), thinned to at most
/// `max_pairs` by taking every (total / max_pairs)-th pair.
std::vector<std::pair<std::size_t, std::size_t>> comparison_pairs(std::size_t n_candidates, std::size_t max_pairs);

/// One greedy step over `tasks`. Throws empty_query_list on no tasks.
VolumeStep greedy_volume_removal(const FeasibleSet& fs, std::span<const QueryTask> tasks, const HypothesisGrid& grid,
                                 std::size_t theta_star, double tol = kDefaultConstraintTol, VolumeOptions options = {});

}  // namespace rrc
