#include <httplib.h>

#include "cogniplay/service.hpp"

namespace cogniplay {

struct HttpServer::Impl {
  GameService& service;
  httplib::Server server;
  int port = 0;

  explicit Impl(GameService& s) : service(s) {}

  void reply(httplib::Response& res, const GameService::Response& r) {
    res.status = r.status;
    if (r.status != 204) res.set_content(r.body.dump(), "application/json");
  }

  static nlohmann::json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    return nlohmann::json::parse(req.body);
  }

  // Malformed JSON bodies answer 400 before reaching the service.
  template <class Fn>
  void with_body(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
    nlohmann::json body;
    try {
      body = parse_body(req);
    } catch (const nlohmann::json::exception& e) {
      reply(res, {400, {{"error", "bad-request"}, {"message", e.what()}}});
      return;
    }
    reply(res, fn(body));
  }

  void routes() {
    const std::string origin = service.config().cors_origin;
    server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
    server.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      with_body(req, res, [&](const nlohmann::json& b) { return service.create_session(b); });
    });
    server.Get("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, service.list_sessions());
    });
    server.Get(R"(/api/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.get_session(req.matches[1]));
    });
    server.Post(R"(/api/sessions/([^/]+)/moves)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  with_body(req, res, [&](const nlohmann::json& b) {
                    return service.play_move(req.matches[1], b);
                  });
                });
    server.Post("/api/agent-games", [this](const httplib::Request& req, httplib::Response& res) {
      with_body(req, res, [&](const nlohmann::json& b) { return service.create_agent_game(b); });
    });
    server.Get("/api/review/next", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.next_review(req.get_param_value("rater")));
    });
    server.Post(R"(/api/review/([^/]+)/rating)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  with_body(req, res, [&](const nlohmann::json& b) {
                    return service.submit_rating(req.matches[1], b);
                  });
                });
    server.Get("/api/ratings", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, service.ratings_report());
    });
  }
};

HttpServer::HttpServer(GameService& service) : impl_(std::make_unique<Impl>(service)) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("io-error", "cannot bind " + host + ":" + std::to_string(port));
  impl_->port = bound;
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace cogniplay
