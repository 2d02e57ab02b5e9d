#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "rrc/event_log.hpp"
#include "rrc/session.hpp"
#include "rrc/session_http.hpp"
#include "support.hpp"

using namespace rrc;
namespace fs = std::filesystem;

namespace {

nlohmann::json config_json(const std::string& name) {
  std::ifstream in(oracle::config_path(name));
  return nlohmann::json::parse(in);
}

nlohmann::json rug_body() { return {{"config", config_json("rug.json")}}; }

int status_of(auto&& fn) {
  try {
    fn();
  } catch (const SessionError& e) {
    return e.status();
  }
  return 0;
}

fs::path fresh_dir(const std::string& tag) {
  auto d = fs::temp_directory_path() / ("rrc_session_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("a new session starts from the uniform prior") {
  SessionManager mgr;
  const auto id = mgr.create(rug_body());
  const auto st = mgr.state(id);
  CHECK(st["revision"] == 0);
  CHECK(st["history_length"] == 0);
  CHECK(st["channels"].size() == 11);
  CHECK(st["feasible_volume"] == 200);
  CHECK(st["entropy"].get<double>() == doctest::Approx(std::log(200.0)));
  CHECK(st["top"].size() == SessionManager::kTopK);
  CHECK(mgr.ids() == std::vector<std::string>{id});
}

TEST_CASE("bad requests map to 400, 404 and 422") {
  SessionManager mgr;
  CHECK(status_of([&] { mgr.create(nlohmann::json{{"mode", "bayes"}}); }) == 400);
  auto broken = config_json("rug.json");
  broken["channels"][0]["kind"] = "telepathy";
  try {
    mgr.create({{"config", broken}});
    FAIL("expected 400");
  } catch (const SessionError& e) {
    CHECK(e.status() == 400);
    CHECK(e.detail()["pointer"].get<std::string>().rfind("/channels/0", 0) == 0);
    CHECK(e.detail()["line"].get<int>() > 0);
  }
  CHECK(status_of([&] { mgr.state("missing"); }) == 404);
  CHECK(status_of([&] { mgr.propose_query("missing"); }) == 404);
  CHECK(status_of([&] { mgr.remove("missing"); }) == 404);
  const auto id = mgr.create(rug_body());
  CHECK(status_of([&] { mgr.submit_feedback(id, {{"channel", "cmp"}, {"choice", 7}}); }) == 422);
  CHECK(status_of([&] { mgr.submit_feedback(id, {{"channel", "nope"}, {"choice", 0}}); }) == 422);
  CHECK(status_of([&] { mgr.submit_feedback(id, {{"choice", 0}}); }) == 422);
  CHECK(mgr.state(id)["revision"] == 0);
}

TEST_CASE("queries are stable until feedback arrives") {
  SessionManager mgr;
  const auto id = mgr.create(rug_body());
  const auto q1 = mgr.propose_query(id);
  const auto q2 = mgr.propose_query(id);
  CHECK(q1 == q2);
  CHECK(q1["query"]["info_gain"].get<double>() >= 0.0);
  const auto s = mgr.submit_feedback(id, {{"channel", "cmp"}, {"choice", 1}});
  CHECK(s["revision"] == 1);
  CHECK(mgr.state(id)["pending_query"].is_null());
}

TEST_CASE("feedback updates match batch replay and the CLI report") {
  SessionManager mgr;
  const auto id = mgr.create(rug_body());
  mgr.submit_feedback(id, {{"channel", "cmp"}, {"choice", 1}});
  mgr.submit_feedback(id, {{"channel", "off"}, {"choice", "off"}});
  const auto st = mgr.submit_feedback(id, {{"channel", "say"}, {"choice", {{"utterance", "AVOID(rug)"}}}});
  CHECK(st["revision"] == 3);

  const auto full = mgr.state(id);
  const auto cfg = load_config(oracle::config_path("rug.json"));
  std::stringstream log;
  for (const auto& e : full["history"]) log << e.dump() << '\n';
  const auto events = read_event_log(cfg, log);
  const auto report = infer_report(cfg, events, InferenceMode::bayes);
  CHECK(full["belief"] == report["belief"]);
  CHECK(st["entropy"].get<double>() < std::log(200.0));
}

TEST_CASE("sessions persist and replay from the data directory") {
  const auto dir = fresh_dir("persist");
  std::string id;
  nlohmann::json before;
  {
    SessionManager mgr(dir);
    id = mgr.create({{"config", config_json("rug.json")}, {"mode", "constraint"}});
    mgr.submit_feedback(id, {{"channel", "cmp"}, {"choice", 1}});
    mgr.submit_feedback(id, {{"channel", "demo"}, {"choice", 3}});
    before = mgr.state(id);
  }
  CHECK(fs::exists(dir / id / "events.jsonl"));
  {
    SessionManager mgr(dir);
    const auto after = mgr.state(id);
    CHECK(after["belief"] == before["belief"]);
    CHECK(after["feasible"] == before["feasible"]);
    CHECK(after["revision"] == 2);
    CHECK(after["mode"] == "constraint");
    mgr.remove(id);
  }
  CHECK_FALSE(fs::exists(dir / id));
  fs::remove_all(dir);
}

TEST_CASE("meta-enabled sessions attach the available channels") {
  SessionManager mgr;
  const auto id = mgr.create({{"config", config_json("meta_choice.json")}});
  mgr.submit_feedback(id, {{"channel", "off_top"}, {"choice", "off"}});
  const auto st = mgr.state(id);
  CHECK(st["meta_enabled"] == true);
  CHECK(st["history"][0]["available_channels"].size() == 4);
  const auto cfg = load_config(oracle::config_path("meta_choice.json"));
  std::stringstream log;
  log << st["history"][0].dump() << '\n';
  const auto events = read_event_log(cfg, log);
  CHECK(st["belief"] == infer_report(cfg, events, InferenceMode::bayes)["belief"]);
}

TEST_CASE("http endpoints") {
  SessionManager mgr;
  httplib::Server server;
  install_session_routes(server, mgr);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);

  auto created = client.Post("/sessions", rug_body().dump(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const auto id = nlohmann::json::parse(created->body)["id"].get<std::string>();

  auto state = client.Get("/sessions/" + id);
  REQUIRE(state);
  CHECK(state->status == 200);
  CHECK(nlohmann::json::parse(state->body)["revision"] == 0);

  auto q1 = client.Get("/sessions/" + id + "/query");
  auto q2 = client.Get("/sessions/" + id + "/query");
  REQUIRE(q1);
  REQUIRE(q2);
  CHECK(q1->status == 200);
  CHECK(q1->body == q2->body);

  auto fb = client.Post("/sessions/" + id + "/feedback", R"({"channel": "cmp", "choice": 1})", "application/json");
  REQUIRE(fb);
  CHECK(fb->status == 200);
  CHECK(nlohmann::json::parse(fb->body)["revision"] == 1);

  auto bad = client.Post("/sessions/" + id + "/feedback", R"({"channel": "cmp", "choice": 5})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 422);
  const auto err = nlohmann::json::parse(bad->body);
  CHECK(err.contains("code"));
  CHECK(err.contains("message"));

  auto garbage = client.Post("/sessions", "{not json", "application/json");
  REQUIRE(garbage);
  CHECK(garbage->status == 400);

  auto missing = client.Get("/sessions/nope");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  auto del = client.Delete("/sessions/" + id);
  REQUIRE(del);
  CHECK(del->status == 200);
  auto gone = client.Get("/sessions/" + id);
  REQUIRE(gone);
  CHECK(gone->status == 404);

  server.stop();
  worker.join();
}
