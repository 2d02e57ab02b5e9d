#include <doctest.h>

#include <cmath>

#include "rrc/config.hpp"
#include "rrc/error.hpp"
#include "rrc/human_sim.hpp"
#include "rrc/inference.hpp"
#include "rrc/meta_choice.hpp"
#include "support.hpp"

using namespace rrc;

namespace {

ChannelPtr utility_channel(const std::vector<double>& utilities, double beta) {
  // 1-D features on a corridor: choice k stays on a cell whose feature is utilities[k].
  const std::size_t n = utilities.size();
  std::vector<std::string> names, cells;
  std::vector<FeatureVector> feats;
  for (std::size_t k = 0; k < n; ++k) {
    names.push_back("c" + std::to_string(k));
    cells.push_back(names.back());
    feats.push_back({utilities[k]});
  }
  GridEnvironment env(static_cast<int>(n), 1, 0, cells, names, feats, {});
  nlohmann::json trajs = nlohmann::json::array();
  for (std::size_t k = 0; k < n; ++k) trajs.push_back(nlohmann::json::array({{static_cast<int>(k), 0}}));
  ChannelSpec s;
  s.id = "u";
  s.kind = ChannelKind::demonstration;
  s.beta = beta;
  s.context = {{"trajectories", trajs}};
  return std::make_shared<const Channel>(make_channel(s, env));
}

const std::vector<double> kOne{1.0};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::not_found;
}

}  // namespace

TEST_CASE("very rational humans pick the argmax") {
  const auto ch = utility_channel({0.1, 0.5, 0.3}, 1e6);
  Rng rng(1);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) hits += sample_choice(*ch, kOne, rng) == 1;
  CHECK(hits >= 999);
}

TEST_CASE("sampled frequencies match Boltzmann probabilities") {
  for (double beta : {0.0, 2.0}) {
    const auto ch = utility_channel({0.1, 0.5, 0.3, -0.2}, beta);
    const auto lp = choice_log_probs(*ch, kOne);
    Rng rng(2);
    const int n = 20000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < n; ++i) ++counts[sample_choice(*ch, kOne, rng)];
    for (std::size_t k = 0; k < 4; ++k) {
      const double p = std::exp(lp[k]);
      const double sd = std::sqrt(p * (1 - p) / n);
      CHECK(std::abs(counts[k] / double(n) - p) <= 4 * sd);
    }
  }
  const auto single = utility_channel({0.4}, 3.0);
  CHECK(sample_choice(*single, kOne, std::uint64_t{9}) == 0);
  const auto ch = utility_channel({0.1, 0.5, 0.3}, 1.0);
  CHECK(sample_choice(*ch, kOne, std::uint64_t{77}) == sample_choice(*ch, kOne, std::uint64_t{77}));
}

TEST_CASE("channel sampling follows the meta-choice distribution") {
  const auto cfg = load_config(oracle::config_path("meta_choice.json"));
  std::vector<ChannelPtr> chans{cfg.channel_ptr("off_top"), cfg.channel_ptr("corr_top")};
  const auto theta = RewardWeights::normalized({0.3, -0.95});
  const double p0 = channel_likelihood(chans, 0, theta.values(), 1.0);
  Rng rng(3);
  const int n = 20000;
  int c0 = 0;
  for (int i = 0; i < n; ++i) c0 += sample_channel(chans, theta.values(), 1.0, rng) == 0;
  CHECK(std::abs(c0 / double(n) - p0) <= 4 * std::sqrt(p0 * (1 - p0) / n));
}

TEST_CASE("expected reward is monotone in beta") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> utils(2 + trial % 5);
    for (auto& x : utils) x = u(gen);
    const auto ch = utility_channel(utils, 1.0);
    double last = -1e300;
    for (int k = -20; k <= 20; ++k) {
      const double r = expected_reward_at_beta(*ch, kOne, k * 0.5);
      CHECK(r >= last - 1e-12);
      last = r;
    }
  }
}

TEST_CASE("satisficing beta hits the requested gap") {
  const std::vector<double> utils{0.0, 0.25, 1.0};
  const auto ch = utility_channel(utils, 1.0);
  const double mean = (0.0 + 0.25 + 1.0) / 3;
  CHECK(std::abs(beta_from_epsilon(*ch, kOne, 1.0 - mean)) < 1e-6);
  for (double eps : {1e-3, 0.1, 0.4, 0.6, 0.9}) {
    const double beta = beta_from_epsilon(*ch, kOne, eps);
    CHECK(std::abs(expected_reward_at_beta(*ch, kOne, beta) - (1.0 - eps)) < 1e-6);
    CHECK((beta > 0) == (eps < 1.0 - mean));
  }
  double last = 1e300;
  for (double eps = 0.05; eps < 1.0; eps += 0.05) {
    const double beta = beta_from_epsilon(*ch, kOne, eps);
    CHECK(beta <= last);
    last = beta;
  }
}

TEST_CASE("satisficing domain errors") {
  const auto ch = utility_channel({0.0, 1.0}, 1.0);
  CHECK(code_of([&] { beta_from_epsilon(*ch, kOne, 0.0); }) == ErrorCode::domain);
  CHECK(code_of([&] { beta_from_epsilon(*ch, kOne, 1.0); }) == ErrorCode::domain);
  CHECK(code_of([&] { beta_from_epsilon(*ch, kOne, -0.5); }) == ErrorCode::domain);
  const auto flat = utility_channel({0.5, 0.5, 0.5}, 1.0);
  CHECK(code_of([&] { beta_from_epsilon(*flat, kOne, 0.1); }) == ErrorCode::indeterminate_beta);
}
