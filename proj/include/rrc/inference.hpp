#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rrc/channels.hpp"
#include "rrc/reward_space.hpp"

namespace rrc {

/// An observed choice, the channel it came from, and (when the human picked
/// among feedback types) every channel that was on offer.
struct FeedbackEvent {
  ChannelPtr channel;
  std::size_t chosen = 0;
  std::vector<ChannelPtr> available;

  /// Throws invalid_argument if `chosen` is out of range or `channel` is not
  /// among a non-empty `available`.
  static FeedbackEvent make(ChannelPtr channel, std::size_t chosen, std::vector<ChannelPtr> available = {});

  bool has_available() const { return !available.empty(); }
  /// Position of `channel` in `available`.
  std::size_t channel_index() const;
};

double log_sum_exp(std::span<const double> xs);

/// log P(c | theta, C) for every c in the channel, Boltzmann over beta * E[r(psi(c))].
std::vector<double> choice_log_probs(const Channel& channel, std::span<const double> theta);

/// theta . E[phi(psi(c))] for every choice.
std::vector<double> choice_utilities(const Channel& channel, std::span<const double> theta);

double log_likelihood(const FeedbackEvent& event, std::span<const double> theta);

/// log_likelihood for every hypothesis in grid order.
std::vector<double> log_likelihoods(const FeedbackEvent& event, const HypothesisGrid& grid);

/// b'(theta) proportional to exp(log_likelihood) * b(theta), in log space.
/// Throws degenerate_evidence if all posterior mass vanishes.
Belief posterior_update(const Belief& belief, const FeedbackEvent& event);

/// Prior times the product of per-event likelihoods, normalized once.
Belief batch_posterior(const Belief& belief, std::span<const FeedbackEvent> events);

inline constexpr double kDefaultConstraintTol = 1e-9;

/// Keeps theta iff E[r(psi(c*))] >= E[r(psi(c))] - tol for every c.
FeasibleSet feasible_update(const FeasibleSet& fs, const FeedbackEvent& event, const HypothesisGrid& grid,
                            double tol = kDefaultConstraintTol);

}  // namespace rrc
