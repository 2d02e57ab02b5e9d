#include "rrc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rrc/error.hpp"

namespace rrc {

FeedbackEvent FeedbackEvent::make(ChannelPtr channel, std::size_t chosen, std::vector<ChannelPtr> available) {
  if (!channel) throw Error(ErrorCode::invalid_argument, "event without a channel");
  if (chosen >= channel->size()) {
    throw Error(ErrorCode::choice_not_in_channel, "chosen index outside channel '" + channel->id() + "'");
  }
  FeedbackEvent e{std::move(channel), chosen, std::move(available)};
  if (e.has_available()) e.channel_index();
  return e;
}

std::size_t FeedbackEvent::channel_index() const {
  for (std::size_t i = 0; i < available.size(); ++i) {
    if (available[i] == channel || available[i]->id() == channel->id()) return i;
  }
  throw Error(ErrorCode::invalid_argument, "event channel '" + channel->id() + "' is not among the available channels");
}

double log_sum_exp(std::span<const double> xs) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : xs) top = std::max(top, x);
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - top);
  return top + std::log(s);
}

std::vector<double> choice_utilities(const Channel& channel, std::span<const double> theta) {
  if (theta.size() != channel.dim()) throw Error(ErrorCode::dimension_mismatch, "theta does not match channel features");
  std::vector<double> u(channel.size());
  for (std::size_t c = 0; c < u.size(); ++c) u[c] = dot(theta, channel.expected_features(c));
  return u;
}

std::vector<double> choice_log_probs(const Channel& channel, std::span<const double> theta) {
  auto z = choice_utilities(channel, theta);
  for (double& x : z) x *= channel.beta();
  const double lse = log_sum_exp(z);
  for (double& x : z) x -= lse;
  return z;
}

double log_likelihood(const FeedbackEvent& event, std::span<const double> theta) {
  return choice_log_probs(*event.channel, theta)[event.chosen];
}

std::vector<double> log_likelihoods(const FeedbackEvent& event, const HypothesisGrid& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = log_likelihood(event, grid[i].values());
  return out;
}

namespace {

std::vector<double> log_prior(const Belief& belief) {
  std::vector<double> lp(belief.size());
  for (std::size_t i = 0; i < lp.size(); ++i) {
    lp[i] = belief[i] > 0.0 ? std::log(belief[i]) : -std::numeric_limits<double>::infinity();
  }
  return lp;
}

}  // namespace

Belief posterior_update(const Belief& belief, const FeedbackEvent& event) {
  auto lp = log_prior(belief);
  const auto ll = log_likelihoods(event, *belief.grid());
  for (std::size_t i = 0; i < lp.size(); ++i) lp[i] += ll[i];
  return Belief::from_log_weights(belief.grid(), lp);
}

Belief batch_posterior(const Belief& belief, std::span<const FeedbackEvent> events) {
  if (events.empty()) return belief;
  auto lp = log_prior(belief);
  for (const auto& e : events) {
    const auto ll = log_likelihoods(e, *belief.grid());
    for (std::size_t i = 0; i < lp.size(); ++i) lp[i] += ll[i];
  }
  return Belief::from_log_weights(belief.grid(), lp);
}

FeasibleSet feasible_update(const FeasibleSet& fs, const FeedbackEvent& event, const HypothesisGrid& grid, double tol) {
  if (tol < 0.0) throw Error(ErrorCode::invalid_argument, "constraint tolerance must be non-negative");
  if (fs.size() != grid.size()) throw Error(ErrorCode::dimension_mismatch, "feasible mask does not match grid");
  FeasibleSet out = fs;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!fs.contains(i)) continue;
    const auto u = choice_utilities(*event.channel, grid[i].values());
    const double chosen = u[event.chosen];
    const bool ok = std::all_of(u.begin(), u.end(), [&](double v) { return chosen >= v - tol; });
    if (!ok) out.mask.set(i, false);
  }
  return out;
}

}  // namespace rrc
