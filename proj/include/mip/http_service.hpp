#pragma once

// JSON-over-HTTP binding of SessionManager. Routes:
//   POST /sessions               {"map", "agent", "params"?, "seed"?}
//   POST /sessions/{id}/actions  {"action": "Up" | "Down" | "Left" | "Right" | "Detect"}
//   GET  /sessions/{id}
//   GET  /sessions/{id}/log      episode record without the map document
//   GET  /maps

#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "mip/service.hpp"

namespace mip {

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Conflict& e) {
    send_json(res, 409, {{"error", "Conflict"}, {"message", e.what()}});
  } catch (const IllegalAction& e) {
    send_json(res, 422, {{"error", "IllegalAction"}, {"message", e.what()}});
  } catch (const NotFound& e) {
    send_json(res, 404, {{"error", "NotFound"}, {"message", e.what()}});
  } catch (const UnknownMap& e) {
    send_json(res, 404, {{"error", "UnknownMap"}, {"message", e.what()}});
  } catch (const UnknownAgent& e) {
    send_json(res, 400, {{"error", "UnknownAgent"}, {"message", e.what()}});
  } catch (const nlohmann::json::exception& e) {
    send_json(res, 400, {{"error", "SyntaxError"}, {"message", e.what()}});
  } catch (const Error& e) {
    send_json(res, 400, {{"error", "BadRequest"}, {"message", e.what()}});
  }
}

}  // namespace detail

inline void install_routes(httplib::Server& server, SessionManager& sessions,
                           const std::string& cors_origin = "*") {
  server.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/maps", [&](const httplib::Request&, httplib::Response& res) {
    detail::send_json(res, 200, sessions.list_maps());
  });

  server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      detail::send_json(res, 201, sessions.create_session(session_request_from_json(body)));
    });
  });

  server.Post(R"(/sessions/([^/]+)/actions)", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      if (!body.is_object() || !body.contains("action")) throw SyntaxError("'action' is required");
      detail::send_json(res, 200,
                        sessions.submit_action(req.matches[1], human_action_from_json(body["action"])));
    });
  });

  server.Get(R"(/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { detail::send_json(res, 200, sessions.get_session(req.matches[1])); });
  });

  server.Get(R"(/sessions/([^/]+)/log)", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      // The map document holds the true layer; clients replay by map id.
      EpisodeRecord record = sessions.export_log(req.matches[1]);
      record.map_document = nullptr;
      detail::send_json(res, 200, to_json(record));
    });
  });
}

}  // namespace mip
