#include "rrc/session.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "rrc/active.hpp"
#include "rrc/error.hpp"
#include "rrc/meta_choice.hpp"

namespace fs = std::filesystem;

namespace rrc {

void Session::recompute() {
  belief = evidence_posterior(uniform_prior(config.grid), history, config.meta);
  feasible = FeasibleSet::full(config.grid->size());
  for (const auto& e : history) feasible = feasible_update(feasible, e, *config.grid);
}

SessionManager::SessionManager(std::optional<fs::path> data_dir) : data_dir_(std::move(data_dir)) {
  if (!data_dir_) return;
  fs::create_directories(*data_dir_);
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(*data_dir_)) {
    if (entry.is_directory() && fs::exists(entry.path() / "config.json")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const std::string id = dir.filename().string();
    nlohmann::json body;
    {
      std::ifstream in(dir / "config.json");
      body["config"] = nlohmann::json::parse(in);
    }
    if (fs::exists(dir / "session.json")) {
      std::ifstream in(dir / "session.json");
      const auto meta = nlohmann::json::parse(in);
      if (meta.contains("mode")) body["mode"] = meta["mode"];
    }
    auto s = build(id, body);
    std::ifstream events(dir / "events.jsonl");
    if (events) s->history = read_event_log(s->config, events, (dir / "events.jsonl").string());
    s->recompute();
    s->revision = s->history.size();
    sessions_.emplace(id, std::move(s));
  }
}

std::string SessionManager::fresh_id() {
  std::random_device rd;
  const std::uint64_t x = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^ (++counter_ * 0x9e3779b97f4a7c15ULL);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::shared_ptr<Session> SessionManager::build(const std::string& id, const nlohmann::json& body) const {
  if (!body.is_object() || !body.contains("config") || !body["config"].is_object()) {
    throw SessionError(400, "config", "request body needs a 'config' object");
  }
  auto s = std::make_shared<Session>();
  s->id = id;
  s->request = body;
  try {
    s->config = parse_config(body["config"].dump(2), "config");
    s->mode = inference_mode_from_string(body.value("mode", std::string("bayes")));
  } catch (const ConfigError& e) {
    throw SessionError(400, "config", e.what(), {{"pointer", e.pointer()}, {"line", e.line()}});
  } catch (const std::exception& e) {
    throw SessionError(400, "config", e.what());
  }
  s->recompute();
  return s;
}

std::string SessionManager::create(const nlohmann::json& body) {
  std::unique_lock lock(mutex_);
  std::string id = fresh_id();
  while (sessions_.contains(id)) id = fresh_id();
  auto s = build(id, body);
  if (data_dir_) {
    const auto dir = *data_dir_ / id;
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << body["config"].dump(2) << '\n';
    std::ofstream(dir / "session.json") << nlohmann::json{{"mode", body.value("mode", std::string("bayes"))}}.dump() << '\n';
    std::ofstream(dir / "events.jsonl");
  }
  sessions_.emplace(id, std::move(s));
  return id;
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionError(404, "not_found", "no session '" + id + "'");
  return it->second;
}

std::vector<std::string> SessionManager::ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

nlohmann::json SessionManager::summary(const Session& s) const {
  const auto& b = *s.belief;
  std::vector<std::size_t> order(b.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return b[a] > b[c]; });
  auto top = nlohmann::json::array();
  for (std::size_t k = 0; k < std::min(kTopK, order.size()); ++k) {
    const auto v = (*s.config.grid)[order[k]].values();
    top.push_back({{"index", order[k]}, {"theta", std::vector<double>(v.begin(), v.end())}, {"probability", b[order[k]]}});
  }
  return {{"id", s.id},
          {"revision", s.revision},
          {"history_length", s.history.size()},
          {"entropy", entropy(b)},
          {"feasible_volume", feasible_volume(s.feasible)},
          {"top", std::move(top)}};
}

nlohmann::json SessionManager::state(const std::string& id) const {
  const auto s = find(id);
  std::lock_guard lock(s->mutex);
  nlohmann::json j = summary(*s);
  j["mode"] = s->mode == InferenceMode::bayes ? "bayes" : "constraint";
  j["meta_enabled"] = s->meta_enabled();
  if (s->config.meta) j["beta0"] = s->config.meta->beta0;
  nlohmann::json envs = nlohmann::json::object();
  for (const auto& name : s->config.env_order) envs[name] = s->config.env(name).to_json();
  j["environments"] = std::move(envs);
  j["hypotheses"] = s->config.grid->to_json();
  j["belief"] = s->belief->to_json();
  auto mask = nlohmann::json::array();
  for (std::size_t i = 0; i < s->feasible.size(); ++i) mask.push_back(s->feasible.contains(i) ? 1 : 0);
  j["feasible"] = std::move(mask);
  auto hist = nlohmann::json::array();
  for (const auto& e : s->history) hist.push_back(event_to_json(e));
  j["history"] = std::move(hist);
  auto chans = nlohmann::json::array();
  for (const auto& c : s->config.channels) {
    auto d = c.channel->describe();
    d["env"] = c.env;
    chans.push_back(std::move(d));
  }
  j["channels"] = std::move(chans);
  j["pending_query"] = s->pending_query ? *s->pending_query : nlohmann::json(nullptr);
  return j;
}

nlohmann::json SessionManager::propose_query(const std::string& id) {
  const auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (!s->pending_query) {
    if (s->config.channels.empty()) throw SessionError(422, "missing_channels", "session has no channels");
    std::vector<ChannelPtr> chans;
    for (const auto& c : s->config.channels) chans.push_back(c.channel);
    const Belief b = (s->mode == InferenceMode::constraint && feasible_volume(s->feasible) > 0)
                         ? uniform_over(s->config.grid, s->feasible)
                         : *s->belief;
    const std::size_t k = select_channel(b, chans);
    s->pending_query = nlohmann::json{{"channel", chans[k]->id()},
                                      {"channel_index", k},
                                      {"info_gain", info_gain(b, *chans[k])},
                                      {"choices", chans[k]->describe()}};
  }
  return {{"id", s->id}, {"revision", s->revision}, {"query", *s->pending_query}};
}

nlohmann::json SessionManager::submit_feedback(const std::string& id, const nlohmann::json& body) {
  const auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (!body.is_object() || !body.contains("channel") || !body.contains("choice")) {
    throw SessionError(422, "invalid_feedback", "feedback needs 'channel' and 'choice'");
  }
  nlohmann::json ev{{"channel", body["channel"]}, {"choice", body["choice"]}};
  if (s->meta_enabled()) {
    auto ids = nlohmann::json::array();
    for (const auto& c : s->config.channels) ids.push_back(c.spec.id);
    ev["available_channels"] = std::move(ids);
  }
  FeedbackEvent event;
  try {
    event = event_from_json(s->config, ev);
  } catch (const Error& e) {
    throw SessionError(422, std::string(to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    throw SessionError(422, "invalid_feedback", e.what());
  }
  s->history.push_back(event);
  try {
    s->recompute();
  } catch (const Error& e) {
    s->history.pop_back();
    s->recompute();
    throw SessionError(422, std::string(to_string(e.code())), e.what());
  }
  if (data_dir_) {
    std::ofstream(*data_dir_ / s->id / "events.jsonl", std::ios::app) << event_to_json(event).dump() << '\n';
  }
  ++s->revision;
  s->pending_query.reset();
  return summary(*s);
}

void SessionManager::remove(const std::string& id) {
  std::unique_lock lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionError(404, "not_found", "no session '" + id + "'");
  sessions_.erase(it);
  if (data_dir_) fs::remove_all(*data_dir_ / id);
}

}  // namespace rrc
