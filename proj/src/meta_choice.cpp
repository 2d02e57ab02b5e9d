#include "rrc/meta_choice.hpp"

#include <cmath>
#include <limits>

#include "rrc/error.hpp"
#include "rrc/planning.hpp"

namespace rrc {

std::string_view to_string(MetaMode mode) {
  return mode == MetaMode::observed_channel ? "observed_channel" : "marginal";
}

MetaMode meta_mode_from_string(std::string_view name) {
  if (name == "observed_channel") return MetaMode::observed_channel;
  if (name == "marginal") return MetaMode::marginal;
  throw Error(ErrorCode::config, "unknown meta mode '" + std::string(name) + "'");
}

TrajectoryDistribution first_stage_grounding(const Channel& channel, std::span<const double> theta) {
  if (!channel.deterministic_grounding()) {
    throw Error(ErrorCode::unsupported_channel,
                "first-stage grounding needs deterministic groundings; '" + channel.id() + "' is stochastic");
  }
  const auto lp = choice_log_probs(channel, theta);
  std::vector<FeatureVector> feats;
  feats.reserve(channel.size());
  for (std::size_t c = 0; c < channel.size(); ++c) feats.push_back(channel.grounding(c).support.front().first.features);
  const auto keep = unique_by_features(feats);

  TrajectoryDistribution out;
  for (std::size_t k : keep) out.support.emplace_back(channel.grounding(k).support.front().first, 0.0);
  for (std::size_t c = 0; c < channel.size(); ++c) {
    for (std::size_t s = 0; s < keep.size(); ++s) {
      bool same = true;
      for (std::size_t d = 0; d < feats[c].size() && same; ++d) same = std::abs(feats[c][d] - feats[keep[s]][d]) <= 1e-9;
      if (same) {
        out.support[s].second += std::exp(lp[c]);
        break;
      }
    }
  }
  return out;
}

double first_stage_value(const Channel& channel, std::span<const double> theta) {
  const auto lp = choice_log_probs(channel, theta);
  const auto u = choice_utilities(channel, theta);
  double v = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) v += std::exp(lp[c]) * u[c];
  return v;
}

std::vector<double> channel_log_probs(std::span<const ChannelPtr> channels, std::span<const double> theta,
                                      double beta0) {
  if (channels.empty()) throw Error(ErrorCode::missing_channels, "no channels to choose among");
  std::vector<double> z(channels.size());
  for (std::size_t j = 0; j < z.size(); ++j) z[j] = beta0 * first_stage_value(*channels[j], theta);
  const double lse = log_sum_exp(z);
  for (double& x : z) x -= lse;
  return z;
}

double channel_likelihood(std::span<const ChannelPtr> channels, std::size_t i, std::span<const double> theta,
                          double beta0) {
  if (i >= channels.size()) throw Error(ErrorCode::invalid_argument, "channel index out of range");
  return std::exp(channel_log_probs(channels, theta, beta0)[i]);
}

std::optional<std::size_t> equivalent_choice(const Channel& other, const Channel& channel, std::size_t c) {
  if (&other == &channel || other.id() == channel.id()) return c;
  const auto& target = channel.choices()[c];
  const auto& tg = channel.grounding(c);
  for (const auto& cand : other.choices()) {
    if (cand.payload.index() != target.payload.index()) continue;
    const auto& g = other.grounding(cand.id);
    if (g.support.size() != tg.support.size()) continue;
    bool same = true;
    for (std::size_t s = 0; s < g.support.size() && same; ++s) {
      const auto& a = g.support[s].first;
      const auto& b = tg.support[s].first;
      same = a.segments == b.segments && a.waypoints.has_value() == b.waypoints.has_value() &&
             (!a.waypoints || a.waypoints->waypoints == b.waypoints->waypoints);
    }
    if (same) return cand.id;
  }
  return std::nullopt;
}

double meta_log_likelihood(const FeedbackEvent& event, std::span<const double> theta, const MetaOptions& options) {
  if (!event.has_available()) {
    throw Error(ErrorCode::missing_channels, "meta likelihood needs the list of available channels");
  }
  const auto lpc = channel_log_probs(event.available, theta, options.beta0);
  if (options.mode == MetaMode::observed_channel) {
    return log_likelihood(event, theta) + lpc[event.channel_index()];
  }
  std::vector<double> terms;
  for (std::size_t j = 0; j < event.available.size(); ++j) {
    const auto match = equivalent_choice(*event.available[j], *event.channel, event.chosen);
    if (!match) continue;
    terms.push_back(choice_log_probs(*event.available[j], theta)[*match] + lpc[j]);
  }
  return log_sum_exp(terms);
}

std::vector<double> meta_log_likelihoods(const FeedbackEvent& event, const HypothesisGrid& grid,
                                         const MetaOptions& options) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = meta_log_likelihood(event, grid[i].values(), options);
  return out;
}

Belief meta_posterior_update(const Belief& belief, const FeedbackEvent& event, const MetaOptions& options) {
  std::vector<double> lp(belief.size());
  const auto ll = meta_log_likelihoods(event, *belief.grid(), options);
  for (std::size_t i = 0; i < lp.size(); ++i) {
    lp[i] = (belief[i] > 0.0 ? std::log(belief[i]) : -std::numeric_limits<double>::infinity()) + ll[i];
  }
  return Belief::from_log_weights(belief.grid(), lp);
}

Belief evidence_posterior(const Belief& prior, std::span<const FeedbackEvent> events,
                          const std::optional<MetaOptions>& meta) {
  if (events.empty()) return prior;
  std::vector<double> lp(prior.size());
  for (std::size_t i = 0; i < lp.size(); ++i) {
    lp[i] = prior[i] > 0.0 ? std::log(prior[i]) : -std::numeric_limits<double>::infinity();
  }
  for (const auto& e : events) {
    const auto ll = (meta && e.has_available()) ? meta_log_likelihoods(e, *prior.grid(), *meta)
                                                : log_likelihoods(e, *prior.grid());
    for (std::size_t i = 0; i < lp.size(); ++i) lp[i] += ll[i];
  }
  return Belief::from_log_weights(prior.grid(), lp);
}

}  // namespace rrc
