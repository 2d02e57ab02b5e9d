#include "rrc/event_log.hpp"

#include <sstream>

#include "rrc/error.hpp"
#include "rrc/table.hpp"

namespace rrc {

FeedbackEvent event_from_json(const Config& cfg, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("channel") || !j.contains("choice")) {
    throw Error(ErrorCode::invalid_argument, "event needs 'channel' and 'choice'");
  }
  auto channel = cfg.channel_ptr(j.at("channel").get<std::string>());
  const std::size_t chosen = channel->resolve_choice(j.at("choice"));
  std::vector<ChannelPtr> available;
  if (j.contains("available_channels")) {
    for (const auto& id : j.at("available_channels")) available.push_back(cfg.channel_ptr(id.get<std::string>()));
  }
  return FeedbackEvent::make(std::move(channel), chosen, std::move(available));
}

nlohmann::json event_to_json(const FeedbackEvent& event) {
  nlohmann::json j;
  j["channel"] = event.channel->id();
  j["choice"] = {{"index", event.chosen}, {"label", event.channel->choices()[event.chosen].label}};
  if (event.has_available()) {
    auto ids = nlohmann::json::array();
    for (const auto& c : event.available) ids.push_back(c->id());
    j["available_channels"] = std::move(ids);
  }
  return j;
}

std::vector<FeedbackEvent> read_event_log(const Config& cfg, std::istream& in, const std::string& source) {
  std::vector<FeedbackEvent> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(event_from_json(cfg, nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::invalid_argument, source + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

InferenceMode inference_mode_from_string(const std::string& name) {
  if (name == "bayes") return InferenceMode::bayes;
  if (name == "constraint") return InferenceMode::constraint;
  throw Error(ErrorCode::invalid_argument, "mode must be bayes or constraint, got '" + name + "'");
}

nlohmann::json infer_report(const Config& cfg, std::span<const FeedbackEvent> events, InferenceMode mode) {
  const auto& grid = *cfg.grid;
  nlohmann::json j;
  j["events"] = events.size();
  auto thetas = nlohmann::json::array();
  for (const auto& t : grid.thetas()) thetas.push_back(std::vector<double>(t.values().begin(), t.values().end()));
  j["hypotheses"] = std::move(thetas);
  if (mode == InferenceMode::bayes) {
    const auto post = evidence_posterior(uniform_prior(cfg.grid), events, cfg.meta);
    j["mode"] = "bayes";
    j["belief"] = post.to_json();
    j["map_index"] = post.map_index();
    j["entropy"] = entropy(post);
  } else {
    auto fs = FeasibleSet::full(grid.size());
    for (const auto& e : events) fs = feasible_update(fs, e, grid);
    auto mask = nlohmann::json::array();
    for (std::size_t i = 0; i < fs.size(); ++i) mask.push_back(fs.contains(i) ? 1 : 0);
    j["mode"] = "constraint";
    j["feasible"] = std::move(mask);
    j["volume"] = feasible_volume(fs);
    j["diameter"] = feasible_diameter(fs, grid);
  }
  return j;
}

std::string infer_report_csv(const nlohmann::json& report) {
  const bool bayes = report.at("mode") == "bayes";
  const auto& thetas = report.at("hypotheses");
  ResultTable t;
  t.columns.push_back("index");
  const std::size_t d = thetas.empty() ? 0 : thetas.front().size();
  for (std::size_t k = 0; k < d; ++k) t.columns.push_back("theta_" + std::to_string(k));
  t.columns.push_back(bayes ? "probability" : "feasible");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    std::vector<TableValue> row{static_cast<std::int64_t>(i)};
    for (std::size_t k = 0; k < d; ++k) row.emplace_back(thetas[i][k].get<double>());
    if (bayes) {
      row.emplace_back(report.at("belief")[i].get<double>());
    } else {
      row.emplace_back(report.at("feasible")[i].get<std::int64_t>());
    }
    t.rows.push_back(std::move(row));
  }
  return t.to_csv();
}

}  // namespace rrc
