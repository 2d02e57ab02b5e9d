#include "rrc/human_sim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rrc/error.hpp"
#include "rrc/inference.hpp"
#include "rrc/meta_choice.hpp"

namespace rrc {

namespace {

std::size_t draw(std::span<const double> log_probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    const double p = std::exp(log_probs[i]);
    if (p > 0.0) last_positive = i;
    acc += p;
    if (u < acc) return i;
  }
  return last_positive;
}

std::vector<double> softmax_logs(std::span<const double> utilities, double beta) {
  std::vector<double> z(utilities.begin(), utilities.end());
  for (double& x : z) x *= beta;
  const double lse = log_sum_exp(z);
  for (double& x : z) x -= lse;
  return z;
}

}  // namespace

std::size_t sample_choice(const Channel& channel, std::span<const double> theta_star, Rng& rng) {
  return draw(choice_log_probs(channel, theta_star), rng);
}

std::size_t sample_choice(const Channel& channel, std::span<const double> theta_star, std::uint64_t seed) {
  Rng rng(seed);
  return sample_choice(channel, theta_star, rng);
}

std::size_t sample_channel(std::span<const ChannelPtr> channels, std::span<const double> theta_star, double beta0,
                           Rng& rng) {
  return draw(channel_log_probs(channels, theta_star, beta0), rng);
}

std::size_t sample_channel(std::span<const ChannelPtr> channels, std::span<const double> theta_star, double beta0,
                           std::uint64_t seed) {
  Rng rng(seed);
  return sample_channel(channels, theta_star, beta0, rng);
}

double expected_reward_at_beta(const Channel& channel, std::span<const double> theta, double beta) {
  const auto u = choice_utilities(channel, theta);
  const auto lp = softmax_logs(u, beta);
  double v = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) v += std::exp(lp[c]) * u[c];
  return v;
}

double beta_from_epsilon(const Channel& channel, std::span<const double> theta, double epsilon) {
  const auto u = choice_utilities(channel, theta);
  const auto [lo_it, hi_it] = std::minmax_element(u.begin(), u.end());
  const double top = *hi_it;
  const double spread = top - *lo_it;
  if (spread <= 1e-12 * std::max(1.0, std::abs(top))) {
    throw Error(ErrorCode::indeterminate_beta, "every choice has the same reward; beta is not identified");
  }
  if (!(epsilon > 0.0 && epsilon < spread)) {
    throw Error(ErrorCode::domain, "epsilon must lie strictly between 0 and " + std::to_string(spread));
  }
  const double target = top - epsilon;
  auto residual = [&](double beta) {
    const auto lp = softmax_logs(u, beta);
    double v = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) v += std::exp(lp[c]) * u[c];
    return v - target;
  };

  double lo = -1.0;
  double hi = 1.0;
  while (residual(hi) < 0.0) {
    hi *= 2.0;
    if (hi > kBetaBracketCap) throw Error(ErrorCode::domain, "epsilon requires beta above 1e8");
  }
  while (residual(lo) > 0.0) {
    lo *= 2.0;
    if (lo < -kBetaBracketCap) throw Error(ErrorCode::domain, "epsilon requires beta below -1e8");
  }

  const double stop = 1e-10 * std::max(1.0, spread);
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    mid = 0.5 * (lo + hi);
    const double r = residual(mid);
    if (std::abs(r) <= stop) break;
    if (r < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
  }
  return mid;
}

}  // namespace rrc
