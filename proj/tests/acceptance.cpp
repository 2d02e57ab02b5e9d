// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <tuple>
#include <sstream>
#include <string>

#include "rrc/active.hpp"
#include "rrc/config.hpp"
#include "rrc/event_log.hpp"
#include "rrc/experiments.hpp"
#include "rrc/human_sim.hpp"
#include "rrc/inference.hpp"
#include "rrc/meta_choice.hpp"
#include "support.hpp"

using namespace rrc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    o.pass = false;
    o.detail += " (over the " + std::to_string(static_cast<int>(budget_s)) + " s budget)";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-44s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

ChannelPtr build(const std::string& kind, nlohmann::json context, double beta, const GridEnvironment& env,
                 const ChannelBuildOptions& opts = {}) {
  ChannelSpec s;
  s.id = kind;
  s.kind = channel_kind_from_string(kind);
  s.beta = beta;
  s.context = std::move(context);
  return std::make_shared<const Channel>(make_channel(s, env, opts));
}

nlohmann::json walk_json(const oracle::Walk& w) {
  auto j = nlohmann::json::array();
  for (auto [x, y] : w) j.push_back({x, y});
  return j;
}

ChannelPtr utility_channel(const std::vector<double>& utilities, double beta) {
  const std::size_t n = utilities.size();
  std::vector<std::string> names;
  std::vector<FeatureVector> feats;
  for (std::size_t k = 0; k < n; ++k) {
    names.push_back("c" + std::to_string(k));
    feats.push_back({utilities[k]});
  }
  GridEnvironment env(static_cast<int>(n), 1, 0, names, names, feats, {});
  auto trajs = nlohmann::json::array();
  for (std::size_t k = 0; k < n; ++k) trajs.push_back(nlohmann::json::array({{static_cast<int>(k), 0}}));
  return build("demonstration", {{"trajectories", trajs}}, beta, env);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RRC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  criterion("posterior equals brute-force Bayes", 30, [] {
    std::mt19937_64 gen(101);
    double worst = 0;
    int envs = 0;
    while (envs < 24) {
      const int horizon = 3 + envs % 4;
      const auto env = oracle::random_env(gen, 4, 4, horizon, 3);
      const Cell start{static_cast<int>(gen() % 4), static_cast<int>(gen() % 4)};
      const Cell goal{static_cast<int>(gen() % 4), static_cast<int>(gen() % 4)};
      const auto walks = oracle::all_walks(env, start, goal, horizon);
      if (walks.size() < 2) continue;
      ++envs;
      const auto grid = std::make_shared<const HypothesisGrid>(oracle::random_grid(gen, 50, 3));
      const double beta = 0.5 + (envs % 5);
      const auto demo = build("demonstration", {{"start", {start.x, start.y}}, {"goal", {goal.x, goal.y}}}, beta, env);
      const auto& pick = walks[gen() % walks.size()];
      const auto a = walks[gen() % walks.size()], b = walks[gen() % walks.size()];
      const auto cmp = build("comparison", {{"trajectories", {walk_json(a), walk_json(b)}}}, beta, env);

      // Oracle: features straight from the enumerated walks, product of plain exp ratios.
      std::vector<std::vector<double>> demo_feats;
      for (const auto& w : walks) demo_feats.push_back(oracle::walk_features(env, w));
      const std::vector<std::vector<double>> cmp_feats{oracle::walk_features(env, a), oracle::walk_features(env, b)};
      const auto pick_f = oracle::walk_features(env, pick);
      std::size_t pick_idx = 0;
      while (demo_feats[pick_idx] != pick_f) ++pick_idx;
      std::vector<long double> post(grid->size());
      long double z = 0;
      for (std::size_t i = 0; i < grid->size(); ++i) {
        post[i] = oracle::direct_choice_probs(demo_feats, (*grid)[i].values(), beta)[pick_idx] *
                  oracle::direct_choice_probs(cmp_feats, (*grid)[i].values(), beta)[1];
        z += post[i];
      }

      const auto demo_choice = demo->resolve_choice(nlohmann::json{{"trajectory", walk_json(pick)}});
      std::vector<FeedbackEvent> events{FeedbackEvent::make(demo, demo_choice), FeedbackEvent::make(cmp, 1)};
      const auto got = batch_posterior(uniform_prior(grid), events);
      for (std::size_t i = 0; i < grid->size(); ++i) {
        worst = std::max(worst, std::abs(got[i] - static_cast<double>(post[i] / z)));
      }
    }
    return Outcome{worst <= 1e-9, std::to_string(envs) + " envs, m=50, max |diff| " + fmt(worst)};
  });

  criterion("likelihood normalizes for every channel kind", 0, [] {
    const auto cfg = load_config(oracle::config_path("rug.json"));
    std::mt19937_64 gen(102);
    std::set<ChannelKind> kinds;
    double worst = 0;
    for (const auto& entry : cfg.channels) {
      kinds.insert(entry.channel->kind());
      for (int k = 0; k < 10; ++k) {
        const auto theta = oracle::random_unit(gen, 3);
        double total = 0;
        for (double lp : choice_log_probs(*entry.channel, theta)) total += std::exp(lp);
        worst = std::max(worst, std::abs(total - 1.0));
      }
    }
    return Outcome{kinds.size() == 11 && worst <= 1e-9,
                   std::to_string(kinds.size()) + " kinds x 10 thetas, max |sum - 1| " + fmt(worst)};
  });

  criterion("sequential update equals batch update", 0, [] {
    const auto cfg = load_config(oracle::config_path("rug.json"));
    std::mt19937_64 gen(103);
    double worst = 0;
    std::vector<std::vector<FeedbackEvent>> logs;
    {
      std::ifstream in(oracle::config_path("rug_events.jsonl"));
      logs.push_back(read_event_log(cfg, in, "rug_events.jsonl"));
    }
    for (int k = 0; k < 30; ++k) {
      std::vector<FeedbackEvent> log;
      for (int e = 0; e < 3; ++e) {
        const auto& entry = cfg.channels[gen() % cfg.channels.size()];
        log.push_back(FeedbackEvent::make(entry.channel, gen() % entry.channel->size()));
      }
      logs.push_back(std::move(log));
    }
    for (const auto& log : logs) {
      auto seq = uniform_prior(cfg.grid);
      for (const auto& e : log) seq = posterior_update(seq, e);
      const auto batch = batch_posterior(uniform_prior(cfg.grid), log);
      for (std::size_t i = 0; i < seq.size(); ++i) worst = std::max(worst, std::abs(seq[i] - batch[i]));
    }
    return Outcome{worst <= 1e-12, std::to_string(logs.size()) + " three-event logs, max |diff| " + fmt(worst)};
  });

  criterion("meta-choice inference lowers regret", 60, [] {
    const auto cfg = load_config(oracle::config_path("meta_choice.json"));
    const auto t = run_meta_experiment(cfg, cfg.seed).tables.front();
    bool ok = true;
    std::string detail;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const double b0 = t.number(r, "beta0");
      const double naive = t.number(r, "naive_regret"), meta = t.number(r, "meta_regret");
      if (b0 == 0.0) {
        ok = ok && std::abs(naive - meta) < 1e-9 &&
             std::abs(t.number(r, "naive_regret_exact") - t.number(r, "meta_regret_exact")) < 1e-9;
      }
      if (b0 == 10.0) {
        ok = ok && meta <= naive;
        if (!detail.empty()) detail += "; ";
        detail += t.text(r, "layout") + " naive " + fmt(naive) + " meta " + fmt(meta);
      }
    }
    return Outcome{ok, "beta0=0 equal; beta0=10: " + detail};
  });

  criterion("satisficing rationality", 0, [] {
    std::mt19937_64 gen(105);
    std::uniform_real_distribution<double> u(-1, 1);
    const std::vector<double> one{1.0};
    double worst_res = 0, worst_zero = 0;
    bool monotone = true;
    for (int k = 0; k < 100; ++k) {
      std::vector<double> utils(2 + k % 9);
      for (auto& x : utils) x = u(gen);
      const auto ch = utility_channel(utils, 1.0);
      const double mx = *std::max_element(utils.begin(), utils.end());
      const double mn = *std::min_element(utils.begin(), utils.end());
      double mean = 0;
      for (double x : utils) mean += x;
      mean /= utils.size();
      const double eps = std::uniform_real_distribution<double>(0.02, 0.98)(gen) * (mx - mn);
      const double beta = beta_from_epsilon(*ch, one, eps);
      worst_res = std::max(worst_res, std::abs(expected_reward_at_beta(*ch, one, beta) - (mx - eps)));
      worst_zero = std::max(worst_zero, std::abs(beta_from_epsilon(*ch, one, mx - mean)));
      double last = -1e300;
      for (int s = 0; s <= 40; ++s) {
        const double r = expected_reward_at_beta(*ch, one, -20.0 + s);
        if (r < last - 1e-12) monotone = false;
        last = r;
      }
    }
    return Outcome{worst_res < 1e-6 && worst_zero < 1e-6 && monotone,
                   "100 channels, max residual " + fmt(worst_res) + ", max |beta| at mean gap " + fmt(worst_zero) +
                       (monotone ? ", monotone" : ", NOT monotone")};
  });

  criterion("info gain equals mutual information", 0, [] {
    std::mt19937_64 gen(106);
    double worst = 0, lowest = 1;
    bool zero_ok = true;
    for (int k = 0; k < 200; ++k) {
      const std::size_t m = 2 + gen() % 49, n = 2 + gen() % 99;
      const auto grid = std::make_shared<const HypothesisGrid>(oracle::random_grid(gen, m, 3));
      std::vector<double> probs(m);
      double z = 0;
      for (auto& p : probs) z += (p = std::uniform_real_distribution<double>(0.01, 1)(gen));
      for (auto& p : probs) p /= z;
      const Belief b(grid, probs);
      std::vector<std::vector<double>> feats(n, std::vector<double>(3));
      std::vector<std::string> names;
      for (std::size_t c = 0; c < n; ++c) {
        names.push_back("c" + std::to_string(c));
        for (auto& x : feats[c]) x = std::uniform_real_distribution<double>(-1, 1)(gen);
      }
      GridEnvironment env(static_cast<int>(n), 1, 0, names, names, feats, {});
      auto trajs = nlohmann::json::array();
      for (std::size_t c = 0; c < n; ++c) trajs.push_back(nlohmann::json::array({{static_cast<int>(c), 0}}));
      const double beta = std::uniform_real_distribution<double>(0.1, 8)(gen);
      const auto ch = build("demonstration", {{"trajectories", trajs}}, beta, env);
      const double ig = info_gain(b, *ch);
      lowest = std::min(lowest, ig);
      worst = std::max(worst, std::abs(ig - oracle::direct_mutual_information(feats, beta, *grid, probs)));
      if (info_gain(b, ch->with_beta(0.0)) != 0.0) zero_ok = false;
    }
    return Outcome{lowest >= 0.0 && worst <= 1e-9 && zero_ok,
                   "200 pairs, min " + fmt(lowest) + ", max |diff| " + fmt(worst) + (zero_ok ? ", beta=0 exact" : "")};
  });

  criterion("active selection at desk scale", 120, [] {
    const auto cfg = load_config(oracle::config_path("active_desk.json"));
    const auto result = run_active_experiment(cfg, cfg.seed);
    const auto& s = result.tables[1];
    const double last_it = cfg.experiment.value("iterations", 10);
    std::map<std::string, std::map<std::string, double>> fin;
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
      if (s.number(r, "iteration") != last_it) continue;
      for (const auto* col : {"volume", "diameter", "max_regret", "avg_regret"}) {
        fin[s.text(r, "method")][col] = s.number(r, col);
      }
    }
    bool ok = fin.count("both") && fin.count("demo");
    for (const auto* col : {"volume", "diameter", "max_regret", "avg_regret"}) {
      ok = ok && fin["both"][col] <= fin["demo"][col] + 1e-12;
    }

    auto j = cfg.raw;
    j["experiment"]["selection"] = "info_gain";
    j["experiment"]["methods"] = {"both"};
    j["experiment"]["iterations"] = 1;
    j["experiment"]["ground_truths"] = {{"count", 3}};
    const auto ig_cfg = parse_config(j.dump(2), "active_desk.json");
    const auto ig = run_active_experiment(ig_cfg, ig_cfg.seed).tables[0];
    bool first_demo = true;
    for (std::size_t r = 0; r < ig.rows.size(); ++r) {
      if (ig.number(r, "iteration") == 1 && ig.text(r, "query_type") != "demonstration") first_demo = false;
    }
    return Outcome{ok && first_demo, "final volume both " + fmt(fin["both"]["volume"]) + " vs demo " +
                                         fmt(fin["demo"]["volume"]) + ", avg regret " + fmt(fin["both"]["avg_regret"]) +
                                         " vs " + fmt(fin["demo"]["avg_regret"]) +
                                         (first_demo ? "; info gain opens with a demonstration" : "; info gain did not open with a demonstration")};
  });

  criterion("meta rationality misspecification", 120, [] {
    const auto cfg = load_config(oracle::config_path("misspec.json"));
    const auto t = run_misspecification_experiment(cfg, cfg.seed).tables.front();
    bool diag = true;
    double kl_0_10 = -1, max_5 = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const double a = t.number(r, "beta0_true"), b = t.number(r, "beta0_assumed"), kl = t.number(r, "kl");
      if (a == b && kl != 0.0) diag = false;
      if (a == 0 && b == 10) kl_0_10 = kl;
      if (a == 5) max_5 = std::max(max_5, kl);
    }
    return Outcome{diag && kl_0_10 > max_5, std::string(diag ? "diagonal exactly 0" : "diagonal nonzero") +
                                                 ", KL(0,10) " + fmt(kl_0_10) + " vs max at 5 " + fmt(max_5)};
  });

  criterion("hard-constraint semantics on the rug", 0, [] {
    const auto cfg = load_config(oracle::config_path("rug.json"));
    const auto& grid = *cfg.grid;
    const auto cmp = cfg.channel_ptr("cmp");
    const auto demo = cfg.channel_ptr("demo");
    const auto cmp_fs = feasible_update(FeasibleSet::full(grid.size()), FeedbackEvent::make(cmp, 1), grid);
    std::vector<double> diff(3);
    for (int d = 0; d < 3; ++d) diff[d] = cmp->expected_features(1)[d] - cmp->expected_features(0)[d];
    bool halfspace = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (cmp_fs.contains(i) != (oracle::dotp(diff, grid[i].values()) >= -1e-9)) halfspace = false;
    }
    const auto chosen = cmp->choice_to_json(1)["trajectory"];
    const auto idx = demo->resolve_choice(nlohmann::json{{"trajectory", chosen}});
    const auto demo_fs = feasible_update(FeasibleSet::full(grid.size()), FeedbackEvent::make(demo, idx), grid);
    const bool subset = demo_fs.mask.is_subset_of(cmp_fs.mask);
    return Outcome{halfspace && subset, "comparison keeps " + std::to_string(feasible_volume(cmp_fs)) +
                                            " (half-space " + (halfspace ? "exact" : "MISMATCH") + "), demonstration keeps " +
                                            std::to_string(feasible_volume(demo_fs)) + (subset ? " (subset)" : " (NOT subset)")};
  });

  criterion("correction propagation", 0, [] {
    std::mt19937_64 gen(110);
    std::normal_distribution<double> n(0.0, 1.0);
    bool zero_exact = true;
    double worst = 0;
    for (std::size_t T = 2; T <= 10; ++T) {
      const auto N = static_cast<Eigen::Index>(T - 1);
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
      for (Eigen::Index i = 0; i < N; ++i) {
        K(i, i) = 1.0;
        if (i > 0) K(i, i - 1) = -1.0;
      }
      const Eigen::MatrixXd Ainv = (K.transpose() * K).inverse();
      for (std::size_t dim = 1; dim <= 3; ++dim) {
        WaypointTrajectory xi;
        for (std::size_t i = 0; i < T; ++i) {
          std::vector<double> w(dim);
          for (auto& x : w) x = n(gen);
          xi.waypoints.push_back(w);
        }
        std::vector<double> dq(dim);
        for (auto& x : dq) x = n(gen);
        for (std::size_t t = 1; t < T; ++t) {
          if (propagate_correction(xi, std::vector<double>(dim, 0.0), t).waypoints != xi.waypoints) zero_exact = false;
          const auto out = propagate_correction(xi, dq, t);
          for (std::size_t i = 1; i < T; ++i) {
            for (std::size_t k = 0; k < dim; ++k) {
              const double expect = xi.waypoints[i][k] + Ainv(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(t - 1)) * dq[k];
              worst = std::max(worst, std::abs(out.waypoints[i][k] - expect));
            }
          }
        }
      }
    }
    return Outcome{zero_exact && worst <= 1e-10,
                   std::string(zero_exact ? "zero delta exact" : "zero delta moved") + ", max |diff| vs dense inverse " + fmt(worst)};
  });

  criterion("CLI output is deterministic", 0, [] {
    const auto base = fs::temp_directory_path() / ("rrc_accept_" + std::to_string(::getpid()));
    fs::remove_all(base);
    bool ok = true;
    std::string detail;
    for (const auto& [cmd, cfg, file] : {std::tuple{"run-misspec", "misspec.json", "misspec.csv"},
                                         std::tuple{"run-meta", "meta_choice.json", "meta.csv"}}) {
      std::string first;
      for (int k = 0; k < 2; ++k) {
        const auto dir = base / (std::string(cmd) + std::to_string(k));
        const int status = run_cli("--seed 7 --out " + dir.string() + " " + cmd + " " + oracle::config_path(cfg).string());
        const auto data = slurp(dir / file);
        ok = ok && status == 0 && !data.empty();
        if (k == 0) first = data;
        else ok = ok && data == first;
      }
      detail += std::string(cmd) + " " + std::to_string(first.size()) + " bytes; ";
    }
    fs::remove_all(base);
    return Outcome{ok, detail + (ok ? "identical across runs" : "DIFFERENT")};
  });

  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
