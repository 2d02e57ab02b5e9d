#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrc/config.hpp"
#include "rrc/event_log.hpp"
#include "rrc/inference.hpp"

namespace rrc {

/// Failure carrying the HTTP status the service reports.
class SessionError : public std::runtime_error {
 public:
  SessionError(int status, std::string code, const std::string& message, nlohmann::json detail = nullptr)
      : std::runtime_error(message), status_(status), code_(std::move(code)), detail_(std::move(detail)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  const nlohmann::json& detail() const { return detail_; }

 private:
  int status_;
  std::string code_;
  nlohmann::json detail_;
};

/// One teaching session. Belief and feasible set are derived from the history
/// by batch replay after every change.
struct Session {
  std::string id;
  nlohmann::json request;
  Config config;
  InferenceMode mode = InferenceMode::bayes;
  std::vector<FeedbackEvent> history;
  std::optional<Belief> belief;
  FeasibleSet feasible;
  std::optional<nlohmann::json> pending_query;
  std::uint64_t revision = 0;
  mutable std::mutex mutex;

  /// Meta-choice is on when the config declares a meta block.
  bool meta_enabled() const { return config.meta.has_value(); }
  void recompute();
};

class SessionManager {
 public:
  /// With a data directory, sessions persist as config.json plus an append-only
  /// events.jsonl per session and are replayed on construction.
  explicit SessionManager(std::optional<std::filesystem::path> data_dir = std::nullopt);

  /// Body: {"config": <config document>, "mode": "bayes"|"constraint"}. Returns the new id.
  std::string create(const nlohmann::json& body);
  nlohmann::json state(const std::string& id) const;
  /// Channel with the highest info gain (lowest index on ties); repeated calls
  /// without feedback return the stored query.
  nlohmann::json propose_query(const std::string& id);
  /// Body: {"channel": id, "choice": payload}. Returns the belief summary.
  nlohmann::json submit_feedback(const std::string& id, const nlohmann::json& body);
  void remove(const std::string& id);
  std::vector<std::string> ids() const;

  static constexpr std::size_t kTopK = 5;

 private:
  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<Session> build(const std::string& id, const nlohmann::json& body) const;
  nlohmann::json summary(const Session& s) const;
  std::string fresh_id();

  std::optional<std::filesystem::path> data_dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

}  // namespace rrc
