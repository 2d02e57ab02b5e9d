#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "rrc/channels.hpp"
#include "rrc/rng.hpp"

namespace rrc {

/// Draws a choice id with the Boltzmann probabilities of `channel` under theta_star.
std::size_t sample_choice(const Channel& channel, std::span<const double> theta_star, Rng& rng);
std::size_t sample_choice(const Channel& channel, std::span<const double> theta_star, std::uint64_t seed);

/// Draws a channel index with the meta-choice probabilities.
std::size_t sample_channel(std::span<const ChannelPtr> channels, std::span<const double> theta_star, double beta0,
                           Rng& rng);
std::size_t sample_channel(std::span<const ChannelPtr> channels, std::span<const double> theta_star, double beta0,
                           std::uint64_t seed);

/// E_{c ~ P_beta}[theta . E[phi(psi(c))]] with the channel's own beta replaced by `beta`.
double expected_reward_at_beta(const Channel& channel, std::span<const double> theta, double beta);

/// Satisficing rationality: the beta whose expected reward is max reward - epsilon.
/// Throws indeterminate_beta when every choice has the same reward and domain
/// unless 0 < epsilon < max - min, or when |beta| would exceed 1e8.
double beta_from_epsilon(const Channel& channel, std::span<const double> theta, double epsilon);

inline constexpr double kBetaBracketCap = 1e8;

}  // namespace rrc
