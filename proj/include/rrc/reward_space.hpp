#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "rrc/bitset.hpp"

namespace rrc {

/// Unit-norm linear reward weights.
class RewardWeights {
 public:
  /// Throws invalid_argument unless ||values|| = 1 within 1e-9.
  explicit RewardWeights(std::vector<double> values);

  /// Rescales `values` to unit norm; throws on the zero vector.
  static RewardWeights normalized(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  operator std::span<const double>() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// Ordered discretization of the reward hypothesis space.
class HypothesisGrid {
 public:
  explicit HypothesisGrid(std::vector<RewardWeights> thetas);

  std::size_t size() const { return thetas_.size(); }
  std::size_t dim() const { return dim_; }
  const RewardWeights& operator[](std::size_t i) const { return thetas_[i]; }
  const std::vector<RewardWeights>& thetas() const { return thetas_; }

  nlohmann::json to_json() const;
  static HypothesisGrid from_json(const nlohmann::json& j);

 private:
  std::vector<RewardWeights> thetas_;
  std::size_t dim_ = 0;
};

using GridPtr = std::shared_ptr<const HypothesisGrid>;

/// Probability vector over a hypothesis grid.
class Belief {
 public:
  /// Throws unless probs >= 0, aligned with the grid, and summing to 1 within 1e-9.
  Belief(GridPtr grid, std::vector<double> probs);

  /// Normalizes exp(log_weights) with max-subtraction. Throws degenerate_evidence
  /// if every entry is -inf.
  static Belief from_log_weights(GridPtr grid, std::span<const double> log_weights);

  const GridPtr& grid() const { return grid_; }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t size() const { return probs_.size(); }

  /// Index of the most probable hypothesis (lowest index on ties).
  std::size_t map_index() const;

  nlohmann::json to_json() const { return probs_; }

 private:
  GridPtr grid_;
  std::vector<double> probs_;
};

/// Hypotheses surviving the hard-constraint reading of the evidence so far.
struct FeasibleSet {
  Bitset mask;

  static FeasibleSet full(std::size_t m) { return {Bitset(m, true)}; }
  std::size_t size() const { return mask.size(); }
  bool contains(std::size_t i) const { return mask.test(i); }
};

/// Quasi-uniform unit vectors: evenly spaced angles for d = 2, a spherical
/// Fibonacci lattice for d = 3, and normalized Box-Muller images of a Kronecker
/// sequence for d >= 4. `octant_only` restricts every coordinate to be >= 0.
HypothesisGrid sphere_discretization(std::size_t d, std::size_t n_points, bool octant_only);

Belief uniform_prior(const GridPtr& grid);

/// Belief uniform over the feasible hypotheses. Throws on an empty set.
Belief uniform_over(const GridPtr& grid, const FeasibleSet& fs);

/// KL(p || q) in nats, 0 log 0 := 0. Throws divergence_undefined if q = 0 where p > 0.
double kl_divergence(const Belief& p, const Belief& q);

double entropy(const Belief& b);

std::size_t feasible_volume(const FeasibleSet& f);

/// Maximum pairwise Euclidean distance between feasible hypotheses.
double feasible_diameter(const FeasibleSet& f, const HypothesisGrid& grid);

}  // namespace rrc
