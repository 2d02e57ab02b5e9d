#include "rrc/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "rrc/error.hpp"
#include "rrc/human_sim.hpp"
#include "rrc/inference.hpp"
#include "rrc/meta_choice.hpp"
#include "rrc/planning.hpp"
#include "rrc/rng.hpp"

namespace rrc {

RegretSummary regret(std::span<const double> theta_hat, std::span<const double> theta_star,
                     std::span<const HoldoutQuery> holdout) {
  if (holdout.empty()) throw Error(ErrorCode::empty_query_list, "regret needs at least one holdout query");
  RegretSummary out;
  for (const auto& q : holdout) {
    const auto best = trajectory_features(*q.env, optimal_trajectory(*q.env, theta_star, q.start, q.goal));
    const auto got = trajectory_features(*q.env, optimal_trajectory(*q.env, theta_hat, q.start, q.goal));
    const double r = std::max(0.0, dot(theta_star, best) - dot(theta_star, got));
    out.max = std::max(out.max, r);
    out.mean += r;
  }
  out.mean /= static_cast<double>(holdout.size());
  return out;
}

double expected_regret_belief(const Belief& belief, std::span<const double> theta_star,
                              std::span<const HoldoutQuery> holdout) {
  double total = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    if (belief[i] > 0.0) total += belief[i] * regret((*belief.grid())[i].values(), theta_star, holdout).mean;
  }
  return total;
}

RegretTable::RegretTable(const HypothesisGrid& grid, std::vector<HoldoutQuery> holdout)
    : holdout_(std::move(holdout)) {
  if (holdout_.empty()) throw Error(ErrorCode::empty_query_list, "regret needs at least one holdout query");
  features_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    features_[i].reserve(holdout_.size());
    for (const auto& q : holdout_) {
      features_[i].push_back(trajectory_features(*q.env, optimal_trajectory(*q.env, grid[i].values(), q.start, q.goal)));
    }
  }
}

RegretTable::Profile RegretTable::profile(std::span<const double> theta_star) const {
  std::vector<double> best(holdout_.size());
  for (std::size_t q = 0; q < holdout_.size(); ++q) {
    const auto& h = holdout_[q];
    best[q] = dot(theta_star, trajectory_features(*h.env, optimal_trajectory(*h.env, theta_star, h.start, h.goal)));
  }
  Profile p;
  p.mean.resize(features_.size());
  p.max.resize(features_.size());
  for (std::size_t i = 0; i < features_.size(); ++i) {
    double sum = 0.0;
    double top = 0.0;
    for (std::size_t q = 0; q < holdout_.size(); ++q) {
      const double r = std::max(0.0, best[q] - dot(theta_star, features_[i][q]));
      sum += r;
      top = std::max(top, r);
    }
    p.mean[i] = sum / static_cast<double>(holdout_.size());
    p.max[i] = top;
  }
  return p;
}

double RegretTable::expected(const Profile& p, const Belief& belief) {
  double total = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i) total += belief[i] * p.mean[i];
  return total;
}

namespace {

const nlohmann::json& ex_at(const Config& cfg, const std::string& key) {
  if (!cfg.experiment.contains(key)) cfg.fail("/experiment", "missing '" + key + "'");
  return cfg.experiment.at(key);
}

template <typename T>
T ex_value(const Config& cfg, const std::string& key, T fallback) {
  if (!cfg.experiment.contains(key)) return fallback;
  try {
    return cfg.experiment.at(key).get<T>();
  } catch (const std::exception& e) {
    cfg.fail("/experiment/" + key, e.what());
  }
}

/// A list of numbers or {"from", "to", "count"} (inclusive, evenly spaced).
std::vector<double> read_sweep(const Config& cfg, const std::string& key, std::vector<double> fallback) {
  if (!cfg.experiment.contains(key)) return fallback;
  const auto& j = cfg.experiment.at(key);
  const std::string ptr = "/experiment/" + key;
  try {
    if (j.is_array()) {
      auto v = j.get<std::vector<double>>();
      if (v.empty()) cfg.fail(ptr, "sweep is empty");
      return v;
    }
    const double from = j.at("from").get<double>();
    const double to = j.at("to").get<double>();
    const auto count = j.at("count").get<std::size_t>();
    if (count < 2) cfg.fail(ptr, "count must be at least 2");
    std::vector<double> v(count);
    for (std::size_t k = 0; k < count; ++k) v[k] = from + (to - from) * static_cast<double>(k) / static_cast<double>(count - 1);
    v.back() = to;
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    cfg.fail(ptr, e.what());
  }
}

std::vector<std::string> read_names(const Config& cfg, const std::string& key) {
  const std::string ptr = "/experiment/" + key;
  std::vector<std::string> names;
  try {
    names = ex_at(cfg, key).get<std::vector<std::string>>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    cfg.fail(ptr, e.what());
  }
  if (names.empty()) cfg.fail(ptr, "list is empty");
  return names;
}

std::vector<ChannelPtr> read_channels(const Config& cfg, const std::string& ptr, const std::vector<std::string>& ids) {
  std::vector<ChannelPtr> out;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    try {
      out.push_back(cfg.channel_ptr(ids[k]));
    } catch (const Error& e) {
      cfg.fail(ptr + "/" + std::to_string(k), e.what());
    }
  }
  return out;
}

struct GroundTruths {
  std::vector<std::vector<double>> thetas;
  std::vector<std::optional<std::size_t>> grid_index;
};

GroundTruths read_ground_truths(const Config& cfg, std::uint64_t seed) {
  GroundTruths out;
  const auto& grid = *cfg.grid;
  const std::string ptr = "/experiment/ground_truths";
  const auto& j = ex_at(cfg, "ground_truths");
  auto push_index = [&](std::size_t i) {
    if (i >= grid.size()) cfg.fail(ptr, "ground-truth index out of range");
    const auto v = grid[i].values();
    out.thetas.emplace_back(v.begin(), v.end());
    out.grid_index.emplace_back(i);
  };
  try {
    if (j.is_array()) {
      for (const auto& t : j) {
        const auto w = RewardWeights::normalized(t.get<std::vector<double>>());
        if (w.dim() != grid.dim()) cfg.fail(ptr, "ground truth dimension differs from the hypotheses");
        std::optional<std::size_t> idx;
        for (std::size_t i = 0; i < grid.size() && !idx; ++i) {
          bool same = true;
          for (std::size_t d = 0; d < w.dim() && same; ++d) same = std::abs(w[d] - grid[i][d]) <= 1e-12;
          if (same) idx = i;
        }
        out.thetas.emplace_back(w.values().begin(), w.values().end());
        out.grid_index.push_back(idx);
      }
    } else if (j.contains("indices")) {
      for (const auto& i : j.at("indices")) push_index(i.get<std::size_t>());
    } else {
      const auto count = j.at("count").get<std::size_t>();
      Rng rng(derive_seed(seed, {0x67u}));
      for (std::size_t i : sample_without_replacement(grid.size(), count, rng)) push_index(i);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    cfg.fail(ptr, e.what());
  }
  if (out.thetas.empty()) cfg.fail(ptr, "no ground truths");
  return out;
}

nlohmann::json base_metadata(const Config& cfg, std::uint64_t seed, const std::string& type) {
  return {{"experiment", type},
          {"config_hash", cfg.hash()},
          {"seed", seed},
          {"schema_version", kSchemaVersion},
          {"rng", std::string(Rng::algorithm)},
          {"version", RRC_VERSION}};
}

std::size_t best_choice(const Channel& channel, std::span<const double> theta) {
  const auto u = choice_utilities(channel, theta);
  return static_cast<std::size_t>(std::max_element(u.begin(), u.end()) - u.begin());
}

// ---- meta --------------------------------------------------------------------

struct Layout {
  std::string name;
  std::vector<ChannelPtr> channels;
};

struct MetaSettings {
  std::vector<double> beta0;
  std::vector<Layout> layouts;
  std::vector<HoldoutQuery> holdout;
  std::size_t trials = 100;
  MetaMode mode = MetaMode::observed_channel;
};

MetaSettings read_meta_settings(const Config& cfg) {
  MetaSettings s;
  s.beta0 = read_sweep(cfg, "beta0", {});
  if (s.beta0.empty()) cfg.fail("/experiment", "missing 'beta0'");
  const auto& layouts = ex_at(cfg, "layouts");
  if (!layouts.is_array() || layouts.empty()) cfg.fail("/experiment/layouts", "layouts must be a non-empty array");
  for (std::size_t k = 0; k < layouts.size(); ++k) {
    const std::string ptr = "/experiment/layouts/" + std::to_string(k);
    Layout l;
    try {
      l.name = layouts[k].at("name").get<std::string>();
      const auto ids = layouts[k].at("channels").get<std::vector<std::string>>();
      if (ids.empty()) cfg.fail(ptr + "/channels", "layout needs at least one channel");
      l.channels = read_channels(cfg, ptr + "/channels", ids);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      cfg.fail(ptr, e.what());
    }
    s.layouts.push_back(std::move(l));
  }
  s.holdout = holdout_from_config(cfg);
  s.trials = ex_value<std::size_t>(cfg, "trials", 100);
  if (s.trials == 0) cfg.fail("/experiment/trials", "trials must be positive");
  if (cfg.meta) s.mode = cfg.meta->mode;
  read_ground_truths(cfg, 0);
  return s;
}

// ---- misspecification --------------------------------------------------------

struct MisspecSettings {
  std::vector<ChannelPtr> channels;
  std::vector<double> beta0_true;
  std::vector<double> beta0_assumed;
  std::vector<HoldoutQuery> holdout;
};

MisspecSettings read_misspec_settings(const Config& cfg) {
  MisspecSettings s;
  s.channels = read_channels(cfg, "/experiment/channels", read_names(cfg, "channels"));
  s.beta0_true = read_sweep(cfg, "beta0_true", {0.0, 2.5, 5.0, 7.5});
  s.beta0_assumed = read_sweep(cfg, "beta0_assumed", {});
  if (s.beta0_assumed.empty()) {
    for (int k = 0; k <= 20; ++k) s.beta0_assumed.push_back(0.5 * k);
  }
  s.holdout = holdout_from_config(cfg);
  read_ground_truths(cfg, 0);
  return s;
}

// ---- active ------------------------------------------------------------------

enum class Method { demo, comparison, both };

struct ActiveSettings {
  std::vector<std::string> training;
  std::vector<HoldoutQuery> holdout;
  std::vector<Method> methods;
  std::vector<std::string> method_names;
  std::size_t iterations = 10;
  bool info_gain = false;
  std::vector<double> noise;
  std::uint64_t candidate_seed = 0;
  std::size_t max_pairs = kMaxComparisonPairs;
  double ig_beta = 5.0;
  std::size_t ig_pairs = 50;
  double tol = kDefaultConstraintTol;
};

ActiveSettings read_active_settings(const Config& cfg) {
  ActiveSettings s;
  s.training = read_names(cfg, "training_envs");
  for (std::size_t k = 0; k < s.training.size(); ++k) {
    if (!cfg.environments.contains(s.training[k])) {
      cfg.fail("/experiment/training_envs/" + std::to_string(k), "unknown environment '" + s.training[k] + "'");
    }
    if (cfg.env(s.training[k]).start_goal_pairs().empty()) {
      cfg.fail("/experiment/training_envs/" + std::to_string(k), "training environment has no start/goal pairs");
    }
  }
  s.holdout = holdout_from_config(cfg);
  s.method_names = ex_value<std::vector<std::string>>(cfg, "methods", {"demo", "comparison", "both"});
  for (std::size_t k = 0; k < s.method_names.size(); ++k) {
    const auto& n = s.method_names[k];
    if (n == "demo") {
      s.methods.push_back(Method::demo);
    } else if (n == "comparison") {
      s.methods.push_back(Method::comparison);
    } else if (n == "both") {
      s.methods.push_back(Method::both);
    } else {
      cfg.fail("/experiment/methods/" + std::to_string(k), "method must be demo, comparison or both");
    }
  }
  s.iterations = ex_value<std::size_t>(cfg, "iterations", 10);
  const auto selection = ex_value<std::string>(cfg, "selection", "volume");
  if (selection != "volume" && selection != "info_gain") {
    cfg.fail("/experiment/selection", "selection must be volume or info_gain");
  }
  s.info_gain = selection == "info_gain";
  s.noise = ex_value<std::vector<double>>(cfg, "candidate_noise", {});
  s.candidate_seed = ex_value<std::uint64_t>(cfg, "candidate_seed", 0);
  s.max_pairs = ex_value<std::size_t>(cfg, "max_pairs", kMaxComparisonPairs);
  s.tol = ex_value<double>(cfg, "tol", kDefaultConstraintTol);
  if (s.tol < 0.0) cfg.fail("/experiment/tol", "tol must be non-negative");
  if (cfg.experiment.contains("info_gain")) {
    const auto& ig = cfg.experiment.at("info_gain");
    try {
      s.ig_beta = ig.value("beta", 5.0);
      s.ig_pairs = ig.value("max_pairs", std::size_t{50});
    } catch (const std::exception& e) {
      cfg.fail("/experiment/info_gain", e.what());
    }
  }
  const auto gts = read_ground_truths(cfg, 0);
  for (const auto& gi : gts.grid_index) {
    if (!gi) cfg.fail("/experiment/ground_truths", "active ground truths must be grid hypotheses");
  }
  return s;
}

}  // namespace

std::vector<HoldoutQuery> holdout_from_config(const Config& cfg, const std::string& key) {
  std::vector<HoldoutQuery> out;
  const std::string envs_key = key + "_envs";
  if (cfg.experiment.contains(key)) {
    const auto& j = cfg.experiment.at(key);
    for (std::size_t k = 0; k < j.size(); ++k) {
      const std::string ptr = "/experiment/" + key + "/" + std::to_string(k);
      try {
        const auto name = j[k].at("env").get<std::string>();
        if (!cfg.environments.contains(name)) cfg.fail(ptr + "/env", "unknown environment '" + name + "'");
        out.push_back({&cfg.env(name), cell_from_json(j[k].at("start")), cell_from_json(j[k].at("goal"))});
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        cfg.fail(ptr, e.what());
      }
    }
  } else if (cfg.experiment.contains(envs_key)) {
    const auto names = read_names(cfg, envs_key);
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (!cfg.environments.contains(names[k])) {
        cfg.fail("/experiment/" + envs_key + "/" + std::to_string(k), "unknown environment '" + names[k] + "'");
      }
      const auto& env = cfg.env(names[k]);
      for (const auto& sg : env.start_goal_pairs()) out.push_back({&env, sg.start, sg.goal});
    }
  }
  if (out.empty()) cfg.fail("/experiment", "no holdout queries ('" + key + "' or '" + envs_key + "')");
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (count_trajectories(*out[k].env, out[k].start, out[k].goal, out[k].env->horizon()) == 0) {
      cfg.fail("/experiment", "holdout query " + std::to_string(k) + " has an unreachable goal");
    }
  }
  return out;
}

std::vector<std::vector<double>> ground_truths_from_config(const Config& cfg, std::uint64_t seed) {
  return read_ground_truths(cfg, seed).thetas;
}

std::vector<QueryTask> build_query_tasks(const Config& cfg, std::span<const std::string> envs,
                                         std::span<const double> noise_scales, std::uint64_t seed) {
  std::vector<QueryTask> tasks;
  for (std::size_t e = 0; e < envs.size(); ++e) {
    const auto& env = cfg.env(envs[e]);
    const auto& pairs = env.start_goal_pairs();
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      QueryTask t;
      t.env = e;
      t.start = pairs[p].start;
      t.goal = pairs[p].goal;
      t.candidates = candidate_trajectory_set(env, *cfg.grid, t.start, t.goal, noise_scales, derive_seed(seed, {e, p}));
      for (const auto& c : t.candidates) t.features.push_back(trajectory_features(env, c));
      tasks.push_back(std::move(t));
    }
  }
  return tasks;
}

ExperimentResult run_meta_experiment(const Config& cfg, std::uint64_t seed) {
  const auto s = read_meta_settings(cfg);
  const auto gts = read_ground_truths(cfg, seed);
  const RegretTable table(*cfg.grid, s.holdout);
  std::vector<RegretTable::Profile> profiles;
  for (const auto& t : gts.thetas) profiles.push_back(table.profile(t));
  const Belief prior = uniform_prior(cfg.grid);

  ResultTable out;
  out.name = "meta";
  out.columns = {"layout", "beta0", "trials", "naive_regret", "meta_regret", "naive_regret_exact", "meta_regret_exact"};
  for (std::size_t l = 0; l < s.layouts.size(); ++l) {
    const auto& chs = s.layouts[l].channels;
    // Posteriors depend only on (channel, choice) and beta0, never on the ground truth.
    std::vector<std::vector<Belief>> naive(chs.size());
    for (std::size_t i = 0; i < chs.size(); ++i) {
      for (std::size_t c = 0; c < chs[i]->size(); ++c) {
        const FeedbackEvent e = FeedbackEvent::make(chs[i], c);
        naive[i].push_back(batch_posterior(prior, std::span(&e, 1)));
      }
    }
    for (std::size_t b = 0; b < s.beta0.size(); ++b) {
      const MetaOptions opts{s.beta0[b], s.mode};
      std::vector<std::vector<Belief>> meta(chs.size());
      for (std::size_t i = 0; i < chs.size(); ++i) {
        for (std::size_t c = 0; c < chs[i]->size(); ++c) {
          const FeedbackEvent e = FeedbackEvent::make(chs[i], c, chs);
          meta[i].push_back(evidence_posterior(prior, std::span(&e, 1), opts));
        }
      }
      double naive_sum = 0.0, meta_sum = 0.0, naive_exact = 0.0, meta_exact = 0.0;
      for (std::size_t g = 0; g < gts.thetas.size(); ++g) {
        const auto& theta = gts.thetas[g];
        const auto& prof = profiles[g];
        Rng rng(derive_seed(seed, {l, b, g}));
        for (std::size_t t = 0; t < s.trials; ++t) {
          const std::size_t i = sample_channel(chs, theta, opts.beta0, rng);
          const std::size_t c = sample_choice(*chs[i], theta, rng);
          naive_sum += RegretTable::expected(prof, naive[i][c]);
          meta_sum += RegretTable::expected(prof, meta[i][c]);
        }
        const auto lpc = channel_log_probs(chs, theta, opts.beta0);
        for (std::size_t i = 0; i < chs.size(); ++i) {
          const auto lp = choice_log_probs(*chs[i], theta);
          for (std::size_t c = 0; c < chs[i]->size(); ++c) {
            const double w = std::exp(lpc[i] + lp[c]);
            naive_exact += w * RegretTable::expected(prof, naive[i][c]);
            meta_exact += w * RegretTable::expected(prof, meta[i][c]);
          }
        }
      }
      const auto n_gt = static_cast<double>(gts.thetas.size());
      const double n = n_gt * static_cast<double>(s.trials);
      out.rows.push_back({s.layouts[l].name, s.beta0[b], static_cast<std::int64_t>(s.trials), naive_sum / n,
                          meta_sum / n, naive_exact / n_gt, meta_exact / n_gt});
    }
  }
  ExperimentResult r;
  r.metadata = base_metadata(cfg, seed, "meta");
  r.metadata["meta_mode"] = std::string(to_string(s.mode));
  r.metadata["ground_truths"] = gts.thetas;
  r.tables.push_back(std::move(out));
  return r;
}

ExperimentResult run_misspecification_experiment(const Config& cfg, std::uint64_t seed) {
  const auto s = read_misspec_settings(cfg);
  const auto gts = read_ground_truths(cfg, seed);
  const RegretTable table(*cfg.grid, s.holdout);
  const Belief prior = uniform_prior(cfg.grid);
  const auto& chs = s.channels;

  // posts[beta0][i][c]: meta posterior after choice c from channel i.
  std::map<double, std::vector<std::vector<Belief>>> posts;
  auto posteriors_for = [&](double beta0) -> const std::vector<std::vector<Belief>>& {
    auto it = posts.find(beta0);
    if (it != posts.end()) return it->second;
    std::vector<std::vector<Belief>> p(chs.size());
    for (std::size_t i = 0; i < chs.size(); ++i) {
      for (std::size_t c = 0; c < chs[i]->size(); ++c) {
        const FeedbackEvent e = FeedbackEvent::make(chs[i], c, chs);
        p[i].push_back(meta_posterior_update(prior, e, MetaOptions{beta0, MetaMode::observed_channel}));
      }
    }
    return posts.emplace(beta0, std::move(p)).first->second;
  };

  std::vector<RegretTable::Profile> profiles;
  for (const auto& t : gts.thetas) profiles.push_back(table.profile(t));

  ResultTable out;
  out.name = "misspec";
  out.columns = {"beta0_true", "beta0_assumed", "kl", "expected_regret"};
  auto observations = nlohmann::json::array();
  for (double bt : s.beta0_true) {
    const auto& truth = posteriors_for(bt);
    // Weights P(C_i | theta*, beta0*) P(c | C_i, theta*) per ground truth.
    std::vector<std::vector<std::vector<double>>> weights(gts.thetas.size());
    for (std::size_t g = 0; g < gts.thetas.size(); ++g) {
      const auto lpc = channel_log_probs(chs, gts.thetas[g], bt);
      weights[g].resize(chs.size());
      for (std::size_t i = 0; i < chs.size(); ++i) {
        const auto lp = choice_log_probs(*chs[i], gts.thetas[g]);
        for (double x : lp) weights[g][i].push_back(std::exp(lpc[i] + x));
      }
    }
    double best_regret = std::numeric_limits<double>::infinity();
    double best_beta = 0.0;
    for (double ba : s.beta0_assumed) {
      const auto& hat = posteriors_for(ba);
      double kl = 0.0;
      double reg = 0.0;
      for (std::size_t g = 0; g < gts.thetas.size(); ++g) {
        for (std::size_t i = 0; i < chs.size(); ++i) {
          for (std::size_t c = 0; c < chs[i]->size(); ++c) {
            const double w = weights[g][i][c];
            kl += w * kl_divergence(truth[i][c], hat[i][c]);
            reg += w * RegretTable::expected(profiles[g], hat[i][c]);
          }
        }
      }
      const auto n = static_cast<double>(gts.thetas.size());
      kl /= n;
      reg /= n;
      if (reg < best_regret) {
        best_regret = reg;
        best_beta = ba;
      }
      out.rows.push_back({bt, ba, kl, reg});
    }
    observations.push_back({{"beta0_true", bt},
                            {"regret_minimizing_beta0_assumed", best_beta},
                            {"minimum_at_true_beta0", best_beta == bt}});
  }
  ExperimentResult r;
  r.metadata = base_metadata(cfg, seed, "misspec");
  r.metadata["observations"] = std::move(observations);
  r.metadata["ground_truths"] = gts.thetas;
  r.tables.push_back(std::move(out));
  return r;
}

ExperimentResult run_active_experiment(const Config& cfg, std::uint64_t seed) {
  const auto s = read_active_settings(cfg);
  const auto gts = read_ground_truths(cfg, seed);
  const auto& grid = *cfg.grid;
  const std::uint64_t cand_seed = cfg.experiment.contains("candidate_seed") ? s.candidate_seed : seed;
  auto tasks = build_query_tasks(cfg, s.training, s.noise, cand_seed);
  const VolumeRemovalPlanner planner(grid, tasks, s.max_pairs, s.tol);
  const RegretTable table(grid, s.holdout);

  // Info-gain candidates: one demonstration channel per task and comparison
  // channels over a thinned pair set.
  struct Candidate {
    ChannelPtr channel;
    QueryType type;
    std::size_t task;
  };
  std::vector<Candidate> candidates;
  if (s.info_gain) {
    ChannelBuildOptions opts;
    opts.max_choices = std::numeric_limits<std::size_t>::max();
    for (std::size_t q = 0; q < tasks.size(); ++q) {
      const auto& task = tasks[q];
      const auto& env = cfg.env(s.training[task.env]);
      auto trajs = nlohmann::json::array();
      for (const auto& t : task.candidates) trajs.push_back(trajectory_to_json(t));
      ChannelSpec demo{"demo:" + std::to_string(q), ChannelKind::demonstration, s.ig_beta, {{"trajectories", trajs}}};
      candidates.push_back({std::make_shared<const Channel>(make_channel(demo, env, opts)), QueryType::demonstration, q});
      const auto pairs = comparison_pairs(task.candidates.size(), s.ig_pairs);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        ChannelSpec comp{"comparison:" + std::to_string(q) + ":" + std::to_string(p), ChannelKind::comparison, s.ig_beta,
                         {{"trajectories", {trajs[pairs[p].first], trajs[pairs[p].second]}}}};
        candidates.push_back({std::make_shared<const Channel>(make_channel(comp, env, opts)), QueryType::comparison, q});
      }
    }
  }

  ResultTable rows;
  rows.name = "active";
  rows.columns = {"method", "ground_truth", "iteration", "query_type", "env", "task",
                  "volume", "diameter", "max_regret", "avg_regret"};
  ResultTable summary;
  summary.name = "active_summary";
  summary.columns = {"method", "iteration", "volume", "diameter", "max_regret", "avg_regret", "demo_fraction"};

  for (std::size_t mi = 0; mi < s.methods.size(); ++mi) {
    const Method method = s.methods[mi];
    const VolumeOptions vopts{method != Method::comparison, method != Method::demo};
    std::vector<ChannelPtr> allowed;
    std::vector<const Candidate*> allowed_meta;
    for (const auto& c : candidates) {
      if ((c.type == QueryType::demonstration && vopts.demonstrations) ||
          (c.type == QueryType::comparison && vopts.comparisons)) {
        allowed.push_back(c.channel);
        allowed_meta.push_back(&c);
      }
    }
    std::vector<std::array<double, 5>> sums(s.iterations + 1, std::array<double, 5>{});
    for (std::size_t g = 0; g < gts.thetas.size(); ++g) {
      const std::size_t star = *gts.grid_index[g];
      const auto prof = table.profile(gts.thetas[g]);
      FeasibleSet fs = FeasibleSet::full(grid.size());
      for (std::size_t it = 0; it <= s.iterations; ++it) {
        std::string type;
        std::string env_name;
        std::int64_t task_id = -1;
        if (it > 0) {
          if (!s.info_gain) {
            const auto step = planner.step(fs, star, vopts);
            fs = step.updated;
            type = std::string(to_string(step.type));
            task_id = static_cast<std::int64_t>(step.task);
          } else {
            const Belief b = uniform_over(cfg.grid, fs);
            const std::size_t j = select_channel(b, allowed);
            const auto& cand = *allowed_meta[j];
            const auto e = FeedbackEvent::make(cand.channel, best_choice(*cand.channel, gts.thetas[g]));
            fs = feasible_update(fs, e, grid, s.tol);
            type = std::string(to_string(cand.type));
            task_id = static_cast<std::int64_t>(cand.task);
          }
          env_name = s.training[tasks[static_cast<std::size_t>(task_id)].env];
        }
        double max_r = 0.0;
        double avg_r = 0.0;
        std::size_t vol = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (!fs.contains(i)) continue;
          ++vol;
          max_r = std::max(max_r, prof.max[i]);
          avg_r += prof.mean[i];
        }
        avg_r /= static_cast<double>(vol);
        const double diam = feasible_diameter(fs, grid);
        rows.rows.push_back({s.method_names[mi], static_cast<std::int64_t>(star), static_cast<std::int64_t>(it), type,
                             env_name, task_id, static_cast<std::int64_t>(vol), diam, max_r, avg_r});
        auto& acc = sums[it];
        acc[0] += static_cast<double>(vol);
        acc[1] += diam;
        acc[2] += max_r;
        acc[3] += avg_r;
        acc[4] += type == "demonstration" ? 1.0 : 0.0;
      }
    }
    const auto n = static_cast<double>(gts.thetas.size());
    for (std::size_t it = 0; it <= s.iterations; ++it) {
      const auto& a = sums[it];
      summary.rows.push_back({s.method_names[mi], static_cast<std::int64_t>(it), a[0] / n, a[1] / n, a[2] / n, a[3] / n,
                              a[4] / n});
    }
  }

  ExperimentResult r;
  r.metadata = base_metadata(cfg, seed, "active");
  r.metadata["selection"] = s.info_gain ? "info_gain" : "volume";
  auto task_info = nlohmann::json::array();
  for (const auto& t : tasks) {
    task_info.push_back({{"env", s.training[t.env]},
                         {"start", cell_to_json(t.start)},
                         {"goal", cell_to_json(t.goal)},
                         {"candidates", t.candidates.size()},
                         {"pairs", planner.pairs(&t - tasks.data()).size()}});
  }
  r.metadata["tasks"] = std::move(task_info);
  r.tables.push_back(std::move(rows));
  r.tables.push_back(std::move(summary));
  return r;
}

void validate_experiment(const Config& cfg) {
  if (cfg.experiment.empty()) return;
  const auto type = ex_value<std::string>(cfg, "type", "");
  if (type == "meta") {
    read_meta_settings(cfg);
  } else if (type == "active") {
    read_active_settings(cfg);
  } else if (type == "misspec") {
    read_misspec_settings(cfg);
  } else {
    cfg.fail("/experiment/type", "experiment type must be meta, active or misspec");
  }
}

ExperimentResult run_experiment(const Config& cfg, std::uint64_t seed) {
  const auto type = ex_value<std::string>(cfg, "type", "");
  if (type == "meta") return run_meta_experiment(cfg, seed);
  if (type == "active") return run_active_experiment(cfg, seed);
  if (type == "misspec") return run_misspecification_experiment(cfg, seed);
  cfg.fail("/experiment/type", "experiment type must be meta, active or misspec");
}

}  // namespace rrc
