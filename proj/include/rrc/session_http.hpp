#pragma once

#include "rrc/session.hpp"

namespace httplib {
class Server;
}

namespace rrc {

/// Registers the session endpoints on `server`:
///   POST /sessions, GET /sessions/{id}, GET /sessions/{id}/query,
///   POST /sessions/{id}/feedback, DELETE /sessions/{id}.
/// Errors are JSON {code, message, detail} with 400, 404 or 422 status.
void install_session_routes(httplib::Server& server, SessionManager& manager);

}  // namespace rrc
