#include <doctest.h>

#include <cmath>

#include "rrc/config.hpp"
#include "rrc/error.hpp"
#include "rrc/inference.hpp"
#include "rrc/planning.hpp"
#include "support.hpp"

using namespace rrc;

namespace {

ChannelPtr trajectory_channel(const GridEnvironment& env, const std::vector<oracle::Walk>& walks, double beta,
                              const std::string& kind = "demonstration") {
  nlohmann::json ts = nlohmann::json::array();
  for (const auto& w : walks) {
    nlohmann::json t = nlohmann::json::array();
    for (auto [x, y] : w) t.push_back({x, y});
    ts.push_back(t);
  }
  ChannelSpec s;
  s.id = kind;
  s.kind = channel_kind_from_string(kind);
  s.beta = beta;
  s.context = {{"trajectories", ts}};
  return std::make_shared<const Channel>(make_channel(s, env));
}

std::vector<std::vector<double>> walk_features(const GridEnvironment& env, const std::vector<oracle::Walk>& walks) {
  std::vector<std::vector<double>> out;
  for (const auto& w : walks) out.push_back(oracle::walk_features(env, w));
  return out;
}

}  // namespace

TEST_CASE("closed-form two-option likelihood") {
  std::vector<std::string> cells(4, "A");
  cells[1] = "B";
  GridEnvironment env(2, 2, 1, cells, {"A", "B"}, {{0.0}, {1.0}}, {});
  const auto ch = trajectory_channel(env, {{{0, 0}, {1, 0}}, {{0, 0}, {0, 0}}}, 1.0, "comparison");
  const auto ev = FeedbackEvent::make(ch, 0);
  CHECK(log_likelihood(ev, std::vector<double>{1.0}) == doctest::Approx(std::log(std::exp(1.0) / (std::exp(1.0) + 1.0))).epsilon(1e-14));
  const auto flat = std::make_shared<const Channel>(ch->with_beta(0.0));
  CHECK(log_likelihood(FeedbackEvent::make(flat, 1), std::vector<double>{1.0}) == doctest::Approx(std::log(0.5)));
  const auto same = trajectory_channel(env, {{{0, 0}, {1, 0}}, {{0, 0}, {1, 0}}}, 50.0, "comparison");
  CHECK(log_likelihood(FeedbackEvent::make(same, 0), std::vector<double>{1.0}) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("likelihoods normalize for every channel in the rug config") {
  const auto cfg = load_config(oracle::config_path("rug.json"));
  std::mt19937_64 gen(11);
  for (const auto& entry : cfg.channels) {
    for (int k = 0; k < 10; ++k) {
      const auto theta = oracle::random_unit(gen, 3);
      const auto lp = choice_log_probs(*entry.channel, theta);
      double total = 0;
      for (double x : lp) total += std::exp(x);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(lp[0] == doctest::Approx(log_likelihood(FeedbackEvent::make(entry.channel, 0), theta)));
    }
  }
}

TEST_CASE("posterior matches direct Bayes on random small grids") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 10; ++trial) {
    const int horizon = 2 + trial % 3;
    const auto env = oracle::random_env(gen, 4, 4, horizon, 3);
    const Cell start{0, 0};
    auto walks = oracle::all_walks(env, start, std::nullopt, horizon);
    if (walks.size() > 60) walks.resize(60);
    const auto grid = std::make_shared<const HypothesisGrid>(oracle::random_grid(gen, 50, 3));
    const double beta = 0.5 + trial % 3;
    const auto ch = trajectory_channel(env, walks, beta);
    const std::size_t chosen = gen() % walks.size();
    const auto post = posterior_update(uniform_prior(grid), FeedbackEvent::make(ch, chosen));
    const auto expect =
        oracle::direct_posterior(walk_features(env, walks), chosen, beta, *grid, std::vector<double>(50, 1.0 / 50));
    for (std::size_t i = 0; i < 50; ++i) CHECK(std::abs(post[i] - expect[i]) <= 1e-9);
  }
}

TEST_CASE("sequential updates equal batch updates") {
  const auto cfg = load_config(oracle::config_path("rug.json"));
  const auto prior = uniform_prior(cfg.grid);
  std::vector<FeedbackEvent> events{FeedbackEvent::make(cfg.channel_ptr("cmp"), 1),
                                    FeedbackEvent::make(cfg.channel_ptr("demo"), 17),
                                    FeedbackEvent::make(cfg.channel_ptr("off"), 0),
                                    FeedbackEvent::make(cfg.channel_ptr("say"), 0)};
  auto seq = prior;
  for (const auto& e : events) seq = posterior_update(seq, e);
  const auto batch = batch_posterior(prior, events);
  for (std::size_t i = 0; i < prior.size(); ++i) CHECK(std::abs(seq[i] - batch[i]) <= 1e-12);

  const auto empty = batch_posterior(prior, {});
  for (std::size_t i = 0; i < prior.size(); ++i) CHECK(empty[i] == prior[i]);
  const auto one = batch_posterior(prior, std::span(events).first(1));
  const auto single = posterior_update(prior, events[0]);
  for (std::size_t i = 0; i < prior.size(); ++i) CHECK(one[i] == doctest::Approx(single[i]).epsilon(1e-15));
}

TEST_CASE("zero rationality leaves the prior unchanged") {
  const auto cfg = load_config(oracle::config_path("rug.json"));
  const auto flat = std::make_shared<const Channel>(cfg.channel_ptr("demo")->with_beta(0.0));
  const auto prior = uniform_prior(cfg.grid);
  const auto post = posterior_update(prior, FeedbackEvent::make(flat, 3));
  for (std::size_t i = 0; i < prior.size(); ++i) CHECK(post[i] == doctest::Approx(prior[i]).epsilon(1e-15));
}

TEST_CASE("rug comparison evidence shifts mass away from rug-loving hypotheses") {
  const auto cfg = load_config(oracle::config_path("rug.json"));
  const auto prior = uniform_prior(cfg.grid);
  const auto post = posterior_update(prior, FeedbackEvent::make(cfg.channel_ptr("cmp"), 1));
  double before = 0, after = 0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if ((*cfg.grid)[i][0] > 0) {
      before += prior[i];
      after += post[i];
    }
  }
  CHECK(after < before);
}

TEST_CASE("feasible update keeps exactly the half-space") {
  const auto cfg = load_config(oracle::config_path("rug.json"));
  const auto& grid = *cfg.grid;
  const auto cmp = cfg.channel_ptr("cmp");
  const auto fs = feasible_update(FeasibleSet::full(grid.size()), FeedbackEvent::make(cmp, 1), grid);
  std::vector<double> diff(3);
  for (int d = 0; d < 3; ++d) diff[d] = cmp->expected_features(1)[d] - cmp->expected_features(0)[d];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(fs.contains(i) == (oracle::dotp(diff, grid[i].values()) >= -1e-9));
  }
  const auto twice = feasible_update(fs, FeedbackEvent::make(cmp, 1), grid);
  CHECK(twice.mask == fs.mask);

  const auto off = FeedbackEvent::make(cfg.channel_ptr("off"), 0);
  const auto a = feasible_update(feasible_update(FeasibleSet::full(grid.size()), off, grid), FeedbackEvent::make(cmp, 1), grid);
  const auto b = feasible_update(fs, off, grid);
  CHECK(a.mask == b.mask);
  CHECK(b.mask.is_subset_of(fs.mask));

  const auto demo = cfg.channel_ptr("demo");
  const auto best = optimal_trajectory(cfg.env(cfg.env_order.front()), grid[0].values(), {0, 1}, {4, 1});
  const auto idx = demo->resolve_choice(nlohmann::json{{"trajectory", trajectory_to_json(best)}});
  const auto dfs = feasible_update(FeasibleSet::full(grid.size()), FeedbackEvent::make(demo, idx), grid);
  CHECK(dfs.contains(0));
}

TEST_CASE("large rationality concentrates the posterior on the feasible set") {
  const auto cfg = load_config(oracle::config_path("rug.json"));
  const auto& grid = *cfg.grid;
  const auto fs = feasible_update(FeasibleSet::full(grid.size()), FeedbackEvent::make(cfg.channel_ptr("cmp"), 1), grid);
  double last = 0;
  for (double beta : {1.0, 10.0, 100.0, 1000.0}) {
    const auto ch = std::make_shared<const Channel>(cfg.channel_ptr("cmp")->with_beta(beta));
    const auto post = posterior_update(uniform_prior(cfg.grid), FeedbackEvent::make(ch, 1));
    double mass = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (fs.contains(i)) mass += post[i];
    }
    CHECK(mass >= last - 1e-12);
    last = mass;
  }
  CHECK(last > 0.99);
}

TEST_CASE("event construction validates its arguments") {
  const auto cfg = load_config(oracle::config_path("rug.json"));
  CHECK_THROWS_AS(FeedbackEvent::make(cfg.channel_ptr("cmp"), 2), Error);
  CHECK_THROWS_AS(FeedbackEvent::make(cfg.channel_ptr("cmp"), 0, {cfg.channel_ptr("off")}), Error);
  const auto ev = FeedbackEvent::make(cfg.channel_ptr("cmp"), 0, {cfg.channel_ptr("off"), cfg.channel_ptr("cmp")});
  CHECK(ev.channel_index() == 1);
  const std::vector<double> xs{-1e308, 1000.0, 1000.0};
  CHECK(log_sum_exp(xs) == doctest::Approx(1000.0 + std::log(2.0)));
}
