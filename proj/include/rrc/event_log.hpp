#pragma once

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrc/config.hpp"
#include "rrc/inference.hpp"
#include "rrc/meta_choice.hpp"

namespace rrc {

/// {"channel": id, "choice": <payload>, "available_channels": [ids]?}; the choice
/// payload is anything Channel::resolve_choice accepts.
FeedbackEvent event_from_json(const Config& cfg, const nlohmann::json& j);

/// Canonical form: the choice is written as {"index": i, "label": ...}.
nlohmann::json event_to_json(const FeedbackEvent& event);

/// One event per non-blank line. Errors name the source and line.
std::vector<FeedbackEvent> read_event_log(const Config& cfg, std::istream& in, const std::string& source = "<events>");

enum class InferenceMode { bayes, constraint };
InferenceMode inference_mode_from_string(const std::string& name);

/// Posterior (bayes) or feasible set (constraint) from the uniform prior after
/// `events`. Bayes mode uses the meta likelihood for events listing available
/// channels when the config enables meta-choice.
nlohmann::json infer_report(const Config& cfg, std::span<const FeedbackEvent> events, InferenceMode mode);

/// The same report as CSV, one row per hypothesis.
std::string infer_report_csv(const nlohmann::json& report);

}  // namespace rrc
