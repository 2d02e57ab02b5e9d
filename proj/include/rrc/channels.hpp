#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rrc/grid.hpp"
#include "rrc/reward_space.hpp"

namespace rrc {

enum class ChannelKind {
  comparison,
  demonstration,
  correction_continuous,
  correction_grid,
  improvement,
  off,
  language,
  proxy,
  reward_punish,
  initial_state,
  credit_assignment,
};

std::string_view to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(std::string_view name);

/// Continuous-space robot trajectory: T waypoints in R^n, index 0 immovable.
struct WaypointTrajectory {
  std::vector<std::vector<double>> waypoints;

  std::size_t size() const { return waypoints.size(); }
  std::size_t dim() const { return waypoints.empty() ? 0 : waypoints.front().size(); }
};

/// The correction grounding xi_R + A^-1 U_t dq, per coordinate. A = K^T K with K
/// the first-difference matrix over the movable waypoints 1..T-1 (the start is
/// the fixed anchor of the first difference), so waypoint 0 never moves.
/// Throws immovable_start for t = 0.
WaypointTrajectory propagate_correction(const WaypointTrajectory& xi_r, std::span<const double> dq, std::size_t t);

/// Features of a 2-D waypoint path: each waypoint contributes the features of
/// its nearest grid cell (rounded, clamped to the grid).
FeatureVector waypoint_features(const GridEnvironment& env, const WaypointTrajectory& traj);

enum class Token { off, continue_on, reward, punish };

struct TrajectoryOption {
  std::size_t index;
};
struct CorrectionDelta {
  std::vector<double> dq;
};
struct Utterance {
  std::string text;
};
struct SegmentStart {
  std::size_t start;
};
struct ProxyOption {
  std::size_t index;
};
struct StateOption {
  Cell state;
};

using ChoicePayload =
    std::variant<TrajectoryOption, CorrectionDelta, Utterance, SegmentStart, Token, ProxyOption, StateOption>;

/// One element of a channel's choice set. `id` is its position in the set.
struct Choice {
  std::size_t id = 0;
  ChoicePayload payload;
  std::string label;
};

/// A trajectory as the reward sees it: one or more grid paths (several when a
/// proxy is grounded on multiple training tasks) or a waypoint path.
struct GroundedPath {
  std::vector<Trajectory> segments;
  std::optional<WaypointTrajectory> waypoints;
  FeatureVector features;
};

struct TrajectoryDistribution {
  std::vector<std::pair<GroundedPath, double>> support;

  static TrajectoryDistribution point_mass(GroundedPath path);
  bool is_point_mass() const { return support.size() == 1; }
  FeatureVector mean_features() const;
  double total_probability() const;
};

struct ChannelSpec {
  std::string id;
  ChannelKind kind = ChannelKind::comparison;
  double beta = 1.0;
  nlohmann::json context = nlohmann::json::object();

  nlohmann::json to_json() const;
  static ChannelSpec from_json(const nlohmann::json& j);
};

struct ChannelBuildOptions {
  /// Needed by proxy channels that reference hypotheses by index and by
  /// planner-generated demonstration choice sets.
  const HypothesisGrid* grid = nullptr;
  /// Weights whose optimal plan is the punish grounding when the context gives
  /// no explicit expected trajectory (the robot's current MAP hypothesis).
  std::optional<std::vector<double>> expected_theta;
  std::size_t max_choices = 20000;
};

/// A feedback type: explicit ordered choice set, grounding per choice, and
/// rationality beta. Immutable once built.
class Channel {
 public:
  const ChannelSpec& spec() const { return spec_; }
  const std::string& id() const { return spec_.id; }
  ChannelKind kind() const { return spec_.kind; }
  double beta() const { return spec_.beta; }
  std::size_t dim() const { return dim_; }

  const std::vector<Choice>& choices() const { return choices_; }
  std::size_t size() const { return choices_.size(); }
  const TrajectoryDistribution& grounding(std::size_t choice_id) const { return groundings_.at(choice_id); }

  /// E[phi(xi)] under the grounding of `choice_id`; the reward is linear, so
  /// theta . expected_features equals the expected grounded reward.
  std::span<const double> expected_features(std::size_t choice_id) const {
    return {mean_features_.data() + choice_id * dim_, dim_};
  }

  /// Language and initial-state groundings are distributions; all others are point masses.
  bool deterministic_grounding() const;

  /// Same channel with a different rationality coefficient.
  Channel with_beta(double beta) const;

  /// Resolves a JSON choice payload ({"index": i} or a kind-specific key) to a choice id.
  std::size_t resolve_choice(const nlohmann::json& payload) const;

  nlohmann::json choice_to_json(std::size_t choice_id) const;
  /// Descriptor with every choice rendered, for clients.
  nlohmann::json describe() const;

 private:
  friend Channel make_channel(const ChannelSpec&, const GridEnvironment&, const ChannelBuildOptions&);

  ChannelSpec spec_;
  std::size_t dim_ = 0;
  std::vector<Choice> choices_;
  std::vector<TrajectoryDistribution> groundings_;
  std::vector<double> mean_features_;
};

using ChannelPtr = std::shared_ptr<const Channel>;

/// Builds the choice set and groundings for `spec.kind` from its context.
/// Throws construction on incomplete context or an empty choice set,
/// size_limit above `max_choices`, empty_grounding for unsatisfiable utterances.
Channel make_channel(const ChannelSpec& spec, const GridEnvironment& env, const ChannelBuildOptions& options = {});

/// Throws choice_not_in_channel unless `choice` is an element of `channel`.
TrajectoryDistribution ground(const Channel& channel, const Choice& choice, const GridEnvironment& env);

/// Sum over the grounding support of probability * reward.
double expected_grounded_reward(const Channel& channel, const Choice& choice, std::span<const double> theta,
                                const GridEnvironment& env);

/// Off grounding: xi_R up to step t, then frozen at xi_R[t].
Trajectory freeze_after(const Trajectory& xi_r, std::size_t t);

}  // namespace rrc
