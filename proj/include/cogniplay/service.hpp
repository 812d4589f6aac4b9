#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "cogniplay/agent.hpp"
#include "cogniplay/features.hpp"
#include "cogniplay/session_store.hpp"

namespace cogniplay {

struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  std::shared_ptr<const FeatureSet> features;  // null: untrained radius-2 atomic set
  std::string weights_id = "atomic";
  int iterations = 2000;          // agent budget per reply
  double time_limit_ms = 1500.0;  // soft wall-clock cap per reply, 0 = off
  std::uint64_t seed = 0;         // agent and review-queue randomness
  std::string cors_origin = "*";
};

// JSON API independent of the transport. Every call returns an HTTP status
// and a body (null for 204).
class GameService {
 public:
  struct Response {
    int status = 200;
    nlohmann::json body;
  };

  explicit GameService(ServiceConfig cfg);

  // {"game", "preset", "human_side": "P1"|"P2", "blind"?: bool}
  Response create_session(const nlohmann::json& body);
  // {"move": "b2"}
  Response play_move(const std::string& id, const nlohmann::json& body);
  // {"game", "preset"}: plays a full agent-vs-agent game and stores it.
  Response create_agent_game(const nlohmann::json& body);
  Response get_session(const std::string& id) const;
  Response list_sessions() const;
  // Anonymized finished game the rater has not rated yet; 204 when none.
  Response next_review(const std::string& rater_id);
  // {"rater_id", "guess": "human"|"agent", "scores": {...}}
  Response submit_rating(const std::string& id, const nlohmann::json& body);
  Response ratings_report() const;

  const ServiceConfig& config() const noexcept { return cfg_; }
  SessionStore& store() noexcept { return store_; }

 private:
  std::shared_ptr<std::mutex> session_lock(const std::string& id);
  DualProcessAgent& agent(const std::string& preset);
  nlohmann::json state_json(const SessionRecord& r, const GameState& s) const;
  // Runs the agent on `s` and records the move; returns the decision.
  Decision agent_move(const SessionRecord& r, const GameState& s);
  void finish_if_terminal(const std::string& id, const GameState& s);

  ServiceConfig cfg_;
  SessionStore store_;
  std::mutex mutex_;  // guards the maps below and the id generator
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
  std::map<std::string, std::unique_ptr<DualProcessAgent>> agents_;
  std::map<std::string, std::chrono::steady_clock::time_point> last_seen_;
  Rng ids_;
};

// Error code to HTTP status for the API.
int http_status_for(const std::string& error_code);

// HTTP front end with CORS headers. Routes:
//   POST /api/sessions                 GET /api/sessions
//   GET  /api/sessions/{id}            POST /api/sessions/{id}/moves
//   POST /api/agent-games              GET /api/review/next?rater=...
//   POST /api/review/{id}/rating       GET /api/ratings
class HttpServer {
 public:
  explicit HttpServer(GameService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws Error("io-error").
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cogniplay
