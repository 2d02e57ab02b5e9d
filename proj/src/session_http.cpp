#include "rrc/session_http.hpp"

#include <httplib.h>

namespace rrc {

namespace {

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const nlohmann::json& detail = nullptr) {
  send(res, status, {{"code", code}, {"message", message}, {"detail", detail}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const SessionError& e) {
    send_error(res, e.status(), e.code(), e.what(), e.detail());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw SessionError(400, "malformed_json", e.what());
  }
}

}  // namespace

void install_session_routes(httplib::Server& server, SessionManager& manager) {
  server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto id = manager.create(parse_body(req));
      auto st = manager.state(id);
      send(res, 201, {{"id", id}, {"revision", st["revision"]}, {"channels", st["channels"]}});
    });
  });
  server.Get("/sessions/:id", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send(res, 200, manager.state(req.path_params.at("id"))); });
  });
  server.Get("/sessions/:id/query", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send(res, 200, manager.propose_query(req.path_params.at("id"))); });
  });
  server.Post("/sessions/:id/feedback", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto& id = req.path_params.at("id");
      auto body = nlohmann::json();
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::parse_error& e) {
        manager.state(id);
        throw SessionError(422, "malformed_json", e.what());
      }
      send(res, 200, manager.submit_feedback(id, body));
    });
  });
  server.Delete("/sessions/:id", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto& id = req.path_params.at("id");
      manager.remove(id);
      send(res, 200, {{"deleted", id}});
    });
  });
}

}  // namespace rrc
