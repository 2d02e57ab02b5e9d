#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rrc/channels.hpp"
#include "rrc/inference.hpp"

namespace rrc {

enum class MetaMode {
  /// log[P(c* | theta, C_i) P(C_i | theta)] for the channel the human used.
  observed_channel,
  /// log sum_i P(c* | theta, C_i) P(C_i | theta) over channels offering c*.
  marginal,
};

std::string_view to_string(MetaMode mode);
MetaMode meta_mode_from_string(std::string_view name);

struct MetaOptions {
  double beta0 = 0.0;
  MetaMode mode = MetaMode::observed_channel;
};

/// Distribution over trajectories induced by the human's second-stage choice
/// within `channel`: each distinct grounded trajectory (keyed by feature vector)
/// receives the summed Boltzmann probability of the choices mapping to it.
/// Throws unsupported_channel for stochastic-grounding channels.
TrajectoryDistribution first_stage_grounding(const Channel& channel, std::span<const double> theta);

/// E_{xi ~ first-stage grounding}[theta . phi(xi)].
double first_stage_value(const Channel& channel, std::span<const double> theta);

/// log P(C_j | theta) for every channel j, softmax over beta0 * first_stage_value.
std::vector<double> channel_log_probs(std::span<const ChannelPtr> channels, std::span<const double> theta,
                                      double beta0);

double channel_likelihood(std::span<const ChannelPtr> channels, std::size_t i, std::span<const double> theta,
                          double beta0);

/// Throws missing_channels when the event carries no available channel list.
double meta_log_likelihood(const FeedbackEvent& event, std::span<const double> theta, const MetaOptions& options);

std::vector<double> meta_log_likelihoods(const FeedbackEvent& event, const HypothesisGrid& grid,
                                         const MetaOptions& options);

Belief meta_posterior_update(const Belief& belief, const FeedbackEvent& event, const MetaOptions& options);

/// Batch posterior used by the CLI and the session service: events that list
/// available channels use the meta likelihood when `meta` is set, all others the
/// plain likelihood.
Belief evidence_posterior(const Belief& prior, std::span<const FeedbackEvent> events,
                          const std::optional<MetaOptions>& meta);

/// Id of a choice in `other` equivalent to choice `c` of `channel` (same payload
/// type and identical grounding), if any.
std::optional<std::size_t> equivalent_choice(const Channel& other, const Channel& channel, std::size_t c);

}  // namespace rrc
