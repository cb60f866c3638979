#pragma once

// HTTP binding of LabService. Routes are documented in docs/api.md.

#include <chrono>
#include <string>

#include "httplib.h"

#include "cellulat/service.hpp"

namespace cellulat {

namespace http_detail {

inline void reply(httplib::Response& res, const ServiceResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

// Empty bodies count as {} so `POST /sessions/{id}/step` alone steps once.
inline std::optional<json> body_json(const httplib::Request& req, httplib::Response& res) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) {
    reply(res, {422, json{{"error", "invalid_body"}, {"message", "body is not valid JSON"}}});
    return std::nullopt;
  }
  return j;
}

inline std::string format_sse(const StreamMessage& m) { return "event: " + m.type + "\ndata: " + m.data.dump() + "\n\n"; }

}  // namespace http_detail

inline void mount(httplib::Server& server, LabService& service) {
  using http_detail::body_json;
  using http_detail::reply;
  using httplib::Request;
  using httplib::Response;

  server.Post("/models", [&](const Request& req, Response& res) {
    reply(res, service.create_model(req.body, req.has_param("id") ? req.get_param_value("id") : ""));
  });
  server.Get("/models", [&](const Request&, Response& res) {
    reply(res, {200, json{{"models", service.model_ids()}}});
  });
  server.Get(R"(/models/([^/]+))", [&](const Request& req, Response& res) {
    reply(res, service.get_model(req.matches[1]));
  });
  server.Post("/sessions", [&](const Request& req, Response& res) {
    if (auto body = body_json(req, res)) reply(res, service.create_session(*body));
  });
  server.Post(R"(/sessions/([^/]+)/step)", [&](const Request& req, Response& res) {
    if (auto body = body_json(req, res)) reply(res, service.step(req.matches[1], *body));
  });
  server.Post(R"(/sessions/([^/]+)/stimuli)", [&](const Request& req, Response& res) {
    if (auto body = body_json(req, res)) reply(res, service.add_stimulus(req.matches[1], *body));
  });
  server.Post(R"(/sessions/([^/]+)/lesions)", [&](const Request& req, Response& res) {
    if (auto body = body_json(req, res)) reply(res, service.add_lesion(req.matches[1], *body));
  });
  server.Post(R"(/sessions/([^/]+)/fork)", [&](const Request& req, Response& res) {
    reply(res, service.fork(req.matches[1]));
  });
  server.Post(R"(/sessions/([^/]+)/end)", [&](const Request& req, Response& res) {
    reply(res, service.end_session(req.matches[1]));
  });
  server.Get(R"(/sessions/([^/]+)/state)", [&](const Request& req, Response& res) {
    reply(res, service.state(req.matches[1]));
  });
  server.Get(R"(/sessions/([^/]+)/history)", [&](const Request& req, Response& res) {
    reply(res, service.history(req.matches[1]));
  });
  server.Get(R"(/sessions/([^/]+)/trace)", [&](const Request& req, Response& res) {
    Tick from = 0;
    if (req.has_param("from")) {
      auto v = parse_int(req.get_param_value("from"));
      if (!v || *v < 0) {
        reply(res, {422, json{{"error", "invalid_body"}, {"message", "from must be a non-negative integer"}}});
        return;
      }
      from = *v;
    }
    reply(res, service.trace(req.matches[1], from));
  });
  server.Get(R"(/sessions/([^/]+)/events)", [&](const Request& req, Response& res) {
    auto sub = service.subscribe(req.matches[1]);
    if (!sub) {
      reply(res, {404, json{{"error", "not_found"}, {"message", "unknown session '" + std::string(req.matches[1]) + "'"}}});
      return;
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [sub](std::size_t, httplib::DataSink& sink) {
      // Drain what is queued, waiting briefly when idle so the connection
      // thread does not spin. Returning false aborts the response.
      auto m = sub->next(std::chrono::milliseconds(200));
      if (!m) {
        if (sub->finished()) sink.done();
        return sink.is_writable();
      }
      const std::string frame = http_detail::format_sse(*m);
      if (!sink.write(frame.data(), frame.size())) return false;
      if (m->type == "close") sink.done();
      return true;
    });
  });
}

}  // namespace cellulat
