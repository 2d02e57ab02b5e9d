#include "rrc/channels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "rrc/error.hpp"
#include "rrc/language.hpp"
#include "rrc/planning.hpp"

namespace rrc {

namespace {

constexpr std::array<std::pair<ChannelKind, std::string_view>, 11> kKindNames{{
    {ChannelKind::comparison, "comparison"},
    {ChannelKind::demonstration, "demonstration"},
    {ChannelKind::correction_continuous, "correction_continuous"},
    {ChannelKind::correction_grid, "correction_grid"},
    {ChannelKind::improvement, "improvement"},
    {ChannelKind::off, "off"},
    {ChannelKind::language, "language"},
    {ChannelKind::proxy, "proxy"},
    {ChannelKind::reward_punish, "reward_punish"},
    {ChannelKind::initial_state, "initial_state"},
    {ChannelKind::credit_assignment, "credit_assignment"},
}};

std::string_view token_label(Token t) {
  switch (t) {
    case Token::off: return "off";
    case Token::continue_on: return "continue";
    case Token::reward: return "+1";
    case Token::punish: return "-1";
  }
  return "?";
}

[[noreturn]] void incomplete(const ChannelSpec& spec, const std::string& what) {
  throw Error(ErrorCode::construction,
              "channel '" + spec.id + "' (" + std::string(to_string(spec.kind)) + "): " + what);
}

const nlohmann::json& need(const ChannelSpec& spec, const char* key) {
  if (!spec.context.contains(key)) incomplete(spec, std::string("context is missing '") + key + "'");
  return spec.context.at(key);
}

Trajectory context_trajectory(const ChannelSpec& spec, const GridEnvironment& env, const nlohmann::json& j,
                              bool pad) {
  Trajectory t;
  try {
    t = trajectory_from_json(j);
    validate_trajectory(env, t);
  } catch (const Error& e) {
    incomplete(spec, e.what());
  }
  const auto full = static_cast<std::size_t>(env.horizon()) + 1;
  if (t.size() > full) incomplete(spec, "trajectory longer than horizon + 1");
  return pad ? pad_to_length(std::move(t), full) : t;
}

GroundedPath grid_path(const GridEnvironment& env, Trajectory t) {
  GroundedPath p;
  p.features = trajectory_features(env, t);
  p.segments.push_back(std::move(t));
  return p;
}

TrajectoryDistribution uniform_over_paths(const GridEnvironment& env, std::vector<Trajectory> trajs) {
  TrajectoryDistribution d;
  const double p = 1.0 / static_cast<double>(trajs.size());
  for (auto& t : trajs) d.support.emplace_back(grid_path(env, std::move(t)), p);
  return d;
}

std::string cell_label(Cell c) { return std::to_string(c.x) + "," + std::to_string(c.y); }

std::vector<std::vector<double>> delta_grid(const nlohmann::json& values, std::size_t n) {
  const auto axis = values.get<std::vector<double>>();
  std::vector<std::vector<double>> out{{}};
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out) {
      for (double v : axis) {
        auto p = prefix;
        p.push_back(v);
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::optional<Cell> optional_goal(const ChannelSpec& spec) {
  const bool constrained = spec.context.value("goal_constrained", true);
  if (!constrained) return std::nullopt;
  return cell_from_json(need(spec, "goal"));
}

}  // namespace

std::string_view to_string(ChannelKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ChannelKind channel_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::config, "unknown channel kind '" + std::string(name) + "'");
}

WaypointTrajectory propagate_correction(const WaypointTrajectory& xi_r, std::span<const double> dq, std::size_t t) {
  const std::size_t T = xi_r.size();
  if (T < 2) throw Error(ErrorCode::invalid_argument, "waypoint trajectory needs at least 2 waypoints");
  if (t == 0) throw Error(ErrorCode::immovable_start, "the start waypoint cannot be corrected");
  if (t >= T) throw Error(ErrorCode::invalid_argument, "correction index beyond the trajectory");
  if (dq.size() != xi_r.dim()) throw Error(ErrorCode::dimension_mismatch, "dq dimension differs from waypoints");

  // Tridiagonal A over the N = T-1 movable waypoints: diag (2, ..., 2, 1), off-diagonals -1.
  const std::size_t N = T - 1;
  std::vector<double> diag(N, 2.0), c_prime(N), unit(N, 0.0);
  diag[N - 1] = 1.0;
  unit[t - 1] = 1.0;
  // Thomas algorithm for A x = e_{t-1}; the result scales linearly with each coordinate of dq.
  std::vector<double> d_prime(N);
  c_prime[0] = -1.0 / diag[0];
  d_prime[0] = unit[0] / diag[0];
  for (std::size_t i = 1; i < N; ++i) {
    const double denom = diag[i] + c_prime[i - 1];
    c_prime[i] = (i + 1 < N) ? -1.0 / denom : 0.0;
    d_prime[i] = (unit[i] + d_prime[i - 1]) / denom;
  }
  std::vector<double> x(N);
  x[N - 1] = d_prime[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) x[i] = d_prime[i] - c_prime[i] * x[i + 1];

  WaypointTrajectory out = xi_r;
  for (std::size_t i = 1; i < T; ++i) {
    for (std::size_t k = 0; k < dq.size(); ++k) out.waypoints[i][k] += x[i - 1] * dq[k];
  }
  return out;
}

FeatureVector waypoint_features(const GridEnvironment& env, const WaypointTrajectory& traj) {
  if (traj.dim() != 2) {
    throw Error(ErrorCode::dimension_mismatch, "grid features need 2-D waypoints");
  }
  FeatureVector out(env.dim(), 0.0);
  for (const auto& w : traj.waypoints) {
    const int x = std::clamp(static_cast<int>(std::lround(w[0])), 0, env.width() - 1);
    const int y = std::clamp(static_cast<int>(std::lround(w[1])), 0, env.height() - 1);
    auto f = env.features({x, y});
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += f[k];
  }
  return out;
}

TrajectoryDistribution TrajectoryDistribution::point_mass(GroundedPath path) {
  TrajectoryDistribution d;
  d.support.emplace_back(std::move(path), 1.0);
  return d;
}

FeatureVector TrajectoryDistribution::mean_features() const {
  FeatureVector out(support.empty() ? 0 : support.front().first.features.size(), 0.0);
  for (const auto& [path, p] : support) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += p * path.features[k];
  }
  return out;
}

double TrajectoryDistribution::total_probability() const {
  double s = 0.0;
  for (const auto& entry : support) s += entry.second;
  return s;
}

nlohmann::json ChannelSpec::to_json() const {
  return {{"id", id}, {"kind", std::string(rrc::to_string(kind))}, {"beta", beta}, {"context", context}};
}

ChannelSpec ChannelSpec::from_json(const nlohmann::json& j) {
  ChannelSpec s;
  s.id = j.at("id").get<std::string>();
  s.kind = channel_kind_from_string(j.at("kind").get<std::string>());
  s.beta = j.value("beta", 1.0);
  if (!std::isfinite(s.beta)) throw Error(ErrorCode::config, "channel '" + s.id + "' has a non-finite beta");
  s.context = j.value("context", nlohmann::json::object());
  return s;
}

bool Channel::deterministic_grounding() const {
  return kind() != ChannelKind::language && kind() != ChannelKind::initial_state;
}

Channel Channel::with_beta(double beta) const {
  Channel copy = *this;
  copy.spec_.beta = beta;
  return copy;
}

std::size_t Channel::resolve_choice(const nlohmann::json& payload) const {
  auto fail = [&](const std::string& why) -> std::size_t {
    throw Error(ErrorCode::choice_not_in_channel, "choice not in channel '" + id() + "': " + why);
  };
  auto find_label = [&](const std::string& label) {
    for (const auto& c : choices_) {
      if (c.label == label) return c.id;
    }
    return fail("no choice labelled '" + label + "'");
  };
  if (payload.is_number_integer()) {
    const auto i = payload.get<long long>();
    if (i < 0 || static_cast<std::size_t>(i) >= choices_.size()) return fail("index out of range");
    return static_cast<std::size_t>(i);
  }
  if (payload.is_string()) return find_label(payload.get<std::string>());
  if (!payload.is_object()) return fail("payload must be an object, index, or label");
  if (payload.contains("index")) return resolve_choice(payload.at("index"));
  if (payload.contains("label")) return find_label(payload.at("label").get<std::string>());
  if (payload.contains("token")) return find_label(payload.at("token").get<std::string>());
  if (payload.contains("utterance")) return find_label(payload.at("utterance").get<std::string>());
  if (payload.contains("segment")) return find_label("segment:" + std::to_string(payload.at("segment").get<std::size_t>()));
  if (payload.contains("proxy")) return find_label("proxy:" + std::to_string(payload.at("proxy").get<std::size_t>()));
  if (payload.contains("state")) return find_label("state:" + cell_label(cell_from_json(payload.at("state"))));
  if (payload.contains("delta")) {
    const auto dq = payload.at("delta").get<std::vector<double>>();
    for (const auto& c : choices_) {
      const auto* d = std::get_if<CorrectionDelta>(&c.payload);
      if (d && d->dq == dq) return c.id;
    }
    return fail("no matching correction delta");
  }
  if (payload.contains("trajectory")) {
    Trajectory t = trajectory_from_json(payload.at("trajectory"));
    for (const auto& c : choices_) {
      if (!std::holds_alternative<TrajectoryOption>(c.payload)) continue;
      const auto& segs = groundings_[c.id].support.front().first.segments;
      if (segs.size() == 1 && !t.cells.empty() &&
          (segs[0] == t || segs[0] == pad_to_length(t, segs[0].size()))) {
        return c.id;
      }
    }
    return fail("trajectory is not among the options");
  }
  return fail("unrecognized payload");
}

nlohmann::json Channel::choice_to_json(std::size_t choice_id) const {
  const Choice& c = choices_.at(choice_id);
  nlohmann::json j{{"index", c.id}, {"label", c.label}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CorrectionDelta>) {
          j["delta"] = p.dq;
        } else if constexpr (std::is_same_v<T, Utterance>) {
          j["utterance"] = p.text;
        } else if constexpr (std::is_same_v<T, SegmentStart>) {
          j["segment"] = p.start;
        } else if constexpr (std::is_same_v<T, Token>) {
          j["token"] = std::string(token_label(p));
        } else if constexpr (std::is_same_v<T, ProxyOption>) {
          j["proxy"] = p.index;
        } else if constexpr (std::is_same_v<T, StateOption>) {
          j["state"] = cell_to_json(p.state);
        }
      },
      c.payload);
  const auto& g = groundings_.at(choice_id);
  if (g.is_point_mass()) {
    const auto& path = g.support.front().first;
    if (path.waypoints) {
      j["waypoints"] = path.waypoints->waypoints;
    } else if (path.segments.size() == 1) {
      j["trajectory"] = trajectory_to_json(path.segments.front());
    } else {
      nlohmann::json segs = nlohmann::json::array();
      for (const auto& s : path.segments) segs.push_back(trajectory_to_json(s));
      j["trajectories"] = segs;
    }
  } else {
    j["support_size"] = g.support.size();
  }
  j["expected_features"] = std::vector<double>(expected_features(choice_id).begin(), expected_features(choice_id).end());
  return j;
}

nlohmann::json Channel::describe() const {
  nlohmann::json choices = nlohmann::json::array();
  for (std::size_t i = 0; i < choices_.size(); ++i) choices.push_back(choice_to_json(i));
  auto j = spec_.to_json();
  j["choices"] = std::move(choices);
  return j;
}

Trajectory freeze_after(const Trajectory& xi_r, std::size_t t) {
  if (t >= xi_r.size()) throw Error(ErrorCode::invalid_argument, "off time beyond trajectory end");
  Trajectory out;
  out.cells.assign(xi_r.cells.begin(), xi_r.cells.begin() + static_cast<std::ptrdiff_t>(t) + 1);
  out.cells.resize(xi_r.size(), xi_r.cells[t]);
  return out;
}

Channel make_channel(const ChannelSpec& spec, const GridEnvironment& env, const ChannelBuildOptions& options) {
  if (std::isnan(spec.beta)) incomplete(spec, "beta must be a number");
  Channel ch;
  ch.spec_ = spec;
  ch.dim_ = env.dim();

  auto add = [&](ChoicePayload payload, std::string label, TrajectoryDistribution g) {
    if (ch.choices_.size() >= options.max_choices) {
      throw Error(ErrorCode::size_limit, "channel '" + spec.id + "' exceeds the choice cap of " +
                                             std::to_string(options.max_choices));
    }
    ch.choices_.push_back({ch.choices_.size(), std::move(payload), std::move(label)});
    ch.groundings_.push_back(std::move(g));
  };
  auto add_trajectory = [&](Trajectory t) {
    const std::size_t i = ch.choices_.size();
    add(TrajectoryOption{i}, "traj:" + std::to_string(i), TrajectoryDistribution::point_mass(grid_path(env, std::move(t))));
  };
  auto check_count = [&](std::uint64_t n) {
    if (n > options.max_choices) {
      throw Error(ErrorCode::size_limit, "channel '" + spec.id + "' would have " + std::to_string(n) +
                                             " choices (cap " + std::to_string(options.max_choices) + ")");
    }
  };

  switch (spec.kind) {
    case ChannelKind::comparison: {
      const auto& ts = need(spec, "trajectories");
      if (!ts.is_array() || ts.size() != 2) incomplete(spec, "comparison needs exactly two trajectories");
      for (const auto& t : ts) add_trajectory(context_trajectory(spec, env, t, true));
      break;
    }
    case ChannelKind::demonstration: {
      if (spec.context.contains("trajectories")) {
        for (const auto& t : spec.context.at("trajectories")) add_trajectory(context_trajectory(spec, env, t, true));
        break;
      }
      const Cell start = cell_from_json(need(spec, "start"));
      const std::string source = spec.context.value("candidates", std::string("enumerate"));
      std::vector<Trajectory> trajs;
      if (source == "enumerate") {
        const auto goal = optional_goal(spec);
        check_count(count_trajectories(env, start, goal, env.horizon()));
        trajs = enumerate_trajectories(env, start, goal, env.horizon(), options.max_choices);
      } else if (source == "planner") {
        if (!options.grid) incomplete(spec, "planner candidates need a hypothesis grid");
        const auto scales = spec.context.value("noise_scales", std::vector<double>{});
        trajs = candidate_trajectory_set(env, *options.grid, start, cell_from_json(need(spec, "goal")), scales,
                                         spec.context.value("seed", std::uint64_t{0}));
      } else {
        incomplete(spec, "unknown candidate source '" + source + "'");
      }
      for (auto& t : trajs) add_trajectory(std::move(t));
      break;
    }
    case ChannelKind::correction_continuous: {
      WaypointTrajectory xi;
      xi.waypoints = need(spec, "robot_waypoints").get<std::vector<std::vector<double>>>();
      if (xi.size() < 2) incomplete(spec, "robot_waypoints needs at least two waypoints");
      for (const auto& w : xi.waypoints) {
        if (w.size() != xi.dim()) incomplete(spec, "waypoints differ in dimension");
      }
      const auto t = need(spec, "time").get<std::size_t>();
      std::vector<std::vector<double>> deltas;
      if (spec.context.contains("deltas")) {
        deltas = spec.context.at("deltas").get<std::vector<std::vector<double>>>();
      } else if (spec.context.contains("delta_values")) {
        deltas = delta_grid(spec.context.at("delta_values"), xi.dim());
      } else {
        incomplete(spec, "context needs 'deltas' or 'delta_values'");
      }
      for (auto& dq : deltas) {
        GroundedPath p;
        p.waypoints = propagate_correction(xi, dq, t);
        p.features = waypoint_features(env, *p.waypoints);
        std::ostringstream label;
        label << "delta:" << ch.choices_.size();
        add(CorrectionDelta{std::move(dq)}, label.str(), TrajectoryDistribution::point_mass(std::move(p)));
      }
      break;
    }
    case ChannelKind::correction_grid: {
      if (spec.context.contains("robot_trajectory")) context_trajectory(spec, env, spec.context.at("robot_trajectory"), true);
      for (const auto& t : need(spec, "corrections")) add_trajectory(context_trajectory(spec, env, t, true));
      break;
    }
    case ChannelKind::improvement: {
      add_trajectory(context_trajectory(spec, env, need(spec, "improved_trajectory"), true));
      add_trajectory(context_trajectory(spec, env, need(spec, "robot_trajectory"), true));
      break;
    }
    case ChannelKind::off: {
      const Trajectory xi = context_trajectory(spec, env, need(spec, "robot_trajectory"), true);
      const auto t = need(spec, "time").get<std::size_t>();
      if (t >= xi.size()) incomplete(spec, "off time beyond the robot trajectory");
      add(Token::off, "off", TrajectoryDistribution::point_mass(grid_path(env, freeze_after(xi, t))));
      add(Token::continue_on, "continue", TrajectoryDistribution::point_mass(grid_path(env, xi)));
      break;
    }
    case ChannelKind::language: {
      const Cell start = cell_from_json(need(spec, "start"));
      const auto goal = optional_goal(spec);
      check_count(count_trajectories(env, start, goal, env.horizon()));
      const auto candidates = enumerate_trajectories(env, start, goal, env.horizon(), options.max_choices);
      for (const auto& u : need(spec, "utterances")) {
        const auto text = u.get<std::string>();
        const auto sem = UtteranceSemantics::parse(text);
        std::vector<Trajectory> consistent;
        for (const auto& t : candidates) {
          if (sem.holds(env, t)) consistent.push_back(t);
        }
        if (consistent.empty()) {
          throw Error(ErrorCode::empty_grounding, "utterance '" + text + "' is consistent with no trajectory");
        }
        add(Utterance{text}, text, uniform_over_paths(env, std::move(consistent)));
      }
      break;
    }
    case ChannelKind::proxy: {
      std::vector<std::vector<double>> proxies;
      if (spec.context.contains("proxies")) {
        for (const auto& p : spec.context.at("proxies")) {
          const auto w = RewardWeights::normalized(p.get<std::vector<double>>());
          proxies.emplace_back(w.values().begin(), w.values().end());
        }
      } else if (spec.context.contains("proxy_indices")) {
        if (!options.grid) incomplete(spec, "proxy_indices need a hypothesis grid");
        for (const auto& i : spec.context.at("proxy_indices")) {
          const auto k = i.get<std::size_t>();
          if (k >= options.grid->size()) incomplete(spec, "proxy index out of range");
          const auto v = (*options.grid)[k].values();
          proxies.emplace_back(v.begin(), v.end());
        }
      } else {
        incomplete(spec, "context needs 'proxies' or 'proxy_indices'");
      }
      std::vector<StartGoal> tasks;
      if (spec.context.contains("tasks")) {
        for (const auto& p : spec.context.at("tasks")) tasks.push_back({cell_from_json(p.at(0)), cell_from_json(p.at(1))});
      } else {
        tasks = env.start_goal_pairs();
      }
      if (tasks.empty()) incomplete(spec, "proxy grounding needs at least one training task");
      for (std::size_t k = 0; k < proxies.size(); ++k) {
        if (proxies[k].size() != env.dim()) incomplete(spec, "proxy dimension differs from features");
        GroundedPath p;
        p.features.assign(env.dim(), 0.0);
        for (const auto& task : tasks) {
          Trajectory t = optimal_trajectory(env, proxies[k], task.start, task.goal);
          const auto f = trajectory_features(env, t);
          for (std::size_t d = 0; d < f.size(); ++d) p.features[d] += f[d];
          p.segments.push_back(std::move(t));
        }
        add(ProxyOption{k}, "proxy:" + std::to_string(k), TrajectoryDistribution::point_mass(std::move(p)));
      }
      break;
    }
    case ChannelKind::reward_punish: {
      const Trajectory xi = context_trajectory(spec, env, need(spec, "robot_trajectory"), true);
      Trajectory expected;
      if (spec.context.contains("expected_trajectory")) {
        expected = context_trajectory(spec, env, spec.context.at("expected_trajectory"), true);
      } else {
        std::vector<double> theta;
        if (spec.context.contains("expected_theta")) {
          theta = spec.context.at("expected_theta").get<std::vector<double>>();
        } else if (options.expected_theta) {
          theta = *options.expected_theta;
        } else {
          incomplete(spec, "needs expected_trajectory, expected_theta, or a MAP hypothesis");
        }
        const Cell start = spec.context.contains("start") ? cell_from_json(spec.context.at("start")) : xi.cells.front();
        const Cell goal = spec.context.contains("goal") ? cell_from_json(spec.context.at("goal")) : xi.back();
        expected = optimal_trajectory(env, theta, start, goal);
      }
      add(Token::reward, "+1", TrajectoryDistribution::point_mass(grid_path(env, xi)));
      add(Token::punish, "-1", TrajectoryDistribution::point_mass(grid_path(env, std::move(expected))));
      break;
    }
    case ChannelKind::initial_state: {
      const int th = need(spec, "human_horizon").get<int>();
      for (const auto& s : need(spec, "states")) {
        const Cell c = cell_from_json(s);
        if (!env.contains(c)) incomplete(spec, "initial state outside grid");
        check_count(count_trajectories(env, c, std::nullopt, th));
        auto trajs = enumerate_trajectories_ending_at(env, c, th, options.max_choices);
        add(StateOption{c}, "state:" + cell_label(c), uniform_over_paths(env, std::move(trajs)));
      }
      break;
    }
    case ChannelKind::credit_assignment: {
      const Trajectory xi = context_trajectory(spec, env, need(spec, "robot_trajectory"), false);
      const auto k = need(spec, "k").get<std::size_t>();
      if (k == 0 || k > xi.size()) incomplete(spec, "segment length k must be in [1, T]");
      for (std::size_t i = 0; i + k <= xi.size(); ++i) {
        Trajectory seg;
        seg.cells.assign(xi.cells.begin() + static_cast<std::ptrdiff_t>(i),
                         xi.cells.begin() + static_cast<std::ptrdiff_t>(i + k));
        add(SegmentStart{i}, "segment:" + std::to_string(i), TrajectoryDistribution::point_mass(grid_path(env, std::move(seg))));
      }
      break;
    }
  }

  if (ch.choices_.empty()) incomplete(spec, "choice set is empty");
  ch.mean_features_.reserve(ch.choices_.size() * ch.dim_);
  for (const auto& g : ch.groundings_) {
    const auto mu = g.mean_features();
    ch.mean_features_.insert(ch.mean_features_.end(), mu.begin(), mu.end());
  }
  return ch;
}

TrajectoryDistribution ground(const Channel& channel, const Choice& choice, const GridEnvironment& env) {
  if (choice.id >= channel.size() || channel.choices()[choice.id].label != choice.label) {
    throw Error(ErrorCode::choice_not_in_channel, "choice '" + choice.label + "' is not in channel '" + channel.id() + "'");
  }
  if (env.dim() != channel.dim()) throw Error(ErrorCode::dimension_mismatch, "environment does not match channel");
  return channel.grounding(choice.id);
}

double expected_grounded_reward(const Channel& channel, const Choice& choice, std::span<const double> theta,
                                const GridEnvironment& env) {
  const auto dist = ground(channel, choice, env);
  double total = 0.0;
  for (const auto& [path, p] : dist.support) total += p * dot(theta, path.features);
  return total;
}

}  // namespace rrc
