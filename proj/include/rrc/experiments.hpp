#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrc/active.hpp"
#include "rrc/config.hpp"
#include "rrc/table.hpp"

namespace rrc {

struct HoldoutQuery {
  const GridEnvironment* env = nullptr;
  Cell start;
  Cell goal;
};

struct RegretSummary {
  double max = 0.0;
  double mean = 0.0;
};

/// Ground-truth reward lost on each holdout query by executing the plan optimal
/// for theta_hat instead of the plan optimal for theta_star.
RegretSummary regret(std::span<const double> theta_hat, std::span<const double> theta_star,
                     std::span<const HoldoutQuery> holdout);

/// sum_theta b(theta) * mean holdout regret of theta.
double expected_regret_belief(const Belief& belief, std::span<const double> theta_star,
                              std::span<const HoldoutQuery> holdout);

/// Holdout plans for every grid hypothesis, computed once.
class RegretTable {
 public:
  RegretTable(const HypothesisGrid& grid, std::vector<HoldoutQuery> holdout);

  std::size_t queries() const { return holdout_.size(); }

  /// Per-hypothesis mean and max regret over the holdout queries under theta_star.
  struct Profile {
    std::vector<double> mean;
    std::vector<double> max;
  };
  Profile profile(std::span<const double> theta_star) const;

  static double expected(const Profile& p, const Belief& belief);

 private:
  std::vector<HoldoutQuery> holdout_;
  /// features_[i][q]: features of the plan optimal for hypothesis i on query q.
  std::vector<std::vector<FeatureVector>> features_;
};

/// Holdout queries: explicit {env, start, goal} entries under `key`, or every
/// start/goal pair of the environments listed under `key + "_envs"`.
std::vector<HoldoutQuery> holdout_from_config(const Config& cfg, const std::string& key = "holdout");

/// Ground-truth weights: an explicit list under experiment.ground_truths, or
/// {"count": n} distinct grid hypotheses drawn with `seed`.
std::vector<std::vector<double>> ground_truths_from_config(const Config& cfg, std::uint64_t seed);

struct ExperimentResult {
  std::vector<ResultTable> tables;
  nlohmann::json metadata;
};

inline constexpr const char* kSchemaVersion = "1.0";

/// Columns: layout, beta0, trials, naive_regret, meta_regret, naive_regret_exact, meta_regret_exact.
ExperimentResult run_meta_experiment(const Config& cfg, std::uint64_t seed);

/// Tables "active" (method, ground_truth, iteration, query_type, task, volume,
/// diameter, max_regret, avg_regret) and "active_summary" (per method and
/// iteration means plus demo_fraction).
ExperimentResult run_active_experiment(const Config& cfg, std::uint64_t seed);

/// Columns: beta0_true, beta0_assumed, kl, expected_regret.
ExperimentResult run_misspecification_experiment(const Config& cfg, std::uint64_t seed);

/// Checks the experiment block of `cfg` without running it.
void validate_experiment(const Config& cfg);

/// Dispatches on experiment.type ("meta", "active", "misspec").
ExperimentResult run_experiment(const Config& cfg, std::uint64_t seed);

/// Builds the query tasks of the active experiment: for every (start, goal) of
/// each training environment, a planner candidate set over the grid.
std::vector<QueryTask> build_query_tasks(const Config& cfg, std::span<const std::string> envs,
                                         std::span<const double> noise_scales, std::uint64_t seed);

}  // namespace rrc
