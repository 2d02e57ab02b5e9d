#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "rrc/session_http.hpp"

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teaching-session HTTP service"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  app.add_option("--host", host, "Listen address")->envname("RRC_HOST");
  app.add_option("--port", port, "Listen port")->envname("RRC_PORT");
  app.add_option("--data-dir", data_dir, "Session storage directory (in-memory when empty)")->envname("RRC_DATA_DIR");
  CLI11_PARSE(app, argc, argv);

  try {
    rrc::SessionManager manager(data_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(data_dir));
    httplib::Server server;
    rrc::install_session_routes(server, manager);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on " << host << ":" << port << '\n';
    if (!server.listen(host, port)) {
      std::cerr << "error: cannot listen on " << host << ":" << port << '\n';
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
