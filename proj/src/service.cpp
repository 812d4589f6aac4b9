#include "cogniplay/service.hpp"

#include <algorithm>
#include <random>

#include "cogniplay/evaluation.hpp"

namespace cogniplay {
namespace {

std::uint64_t hash_id(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

GameService::Response error_response(const Error& e) {
  return {http_status_for(e.code()), {{"error", e.code()}, {"message", e.what()}}};
}

GameService::Response bad_request(const std::string& message) {
  return {400, {{"error", "bad-request"}, {"message", message}}};
}

std::string required_string(const nlohmann::json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string()) {
    throw Error("bad-request", std::string("missing string field \"") + key + "\"");
  }
  return body[key].get<std::string>();
}

// Runs `fn`, turning library errors into API error responses.
template <class Fn>
GameService::Response guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(e);
  } catch (const nlohmann::json::exception& e) {
    return bad_request(e.what());
  }
}

}  // namespace

int http_status_for(const std::string& code) {
  if (code == "unknown-session" || code == "unknown-record") return 404;
  if (code == "not-your-turn" || code == "session-finished" || code == "not-finished") return 409;
  if (code == "illegal-move" || code == "bad-notation" || code == "invalid-rating" ||
      code == "terminal-state") {
    return 422;
  }
  if (code == "unknown-game" || code == "unknown-preset" || code == "invalid-spec" ||
      code == "invalid-config" || code == "bad-request") {
    return 400;
  }
  return 500;
}

GameService::GameService(ServiceConfig cfg)
    : cfg_(std::move(cfg)), store_(cfg_.data_dir), ids_(cfg_.seed ? cfg_.seed : std::random_device{}()) {
  if (!cfg_.features) cfg_.features = std::make_shared<FeatureSet>(FeatureSet::atomic(2));
  if (cfg_.iterations < 1) throw Error("invalid-config", "iterations must be at least 1");
}

std::shared_ptr<std::mutex> GameService::session_lock(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto& m = locks_[id];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

DualProcessAgent& GameService::agent(const std::string& preset) {
  std::lock_guard lock(mutex_);
  auto& a = agents_[preset];
  if (!a) {
    AgentConfig ac;
    try {
      ac = AgentConfig::from_preset(preset);
    } catch (const Error&) {
      agents_.erase(preset);
      throw;
    }
    ac.radius = cfg_.features->radius();
    ac.max_features = std::max(ac.max_features, cfg_.features->max_features());
    ac.search.iterations = cfg_.iterations;
    ac.search.time_limit_ms = cfg_.time_limit_ms;
    ac.search.seed = cfg_.seed;
    a = std::make_unique<DualProcessAgent>(ac, cfg_.features);
  }
  return *a;
}

nlohmann::json GameService::state_json(const SessionRecord& r, const GameState& s) const {
  nlohmann::json j{{"spec", spec_to_json(r.spec)},
                   {"moves", moves_to_strings(s.history())},
                   {"to_move", s.terminal() ? nlohmann::json(nullptr) : nlohmann::json(player_name(s.to_move()))},
                   {"finished", s.terminal()},
                   {"result", nullptr}};
  if (s.terminal()) {
    const int v = s.outcome().value;
    j["result"] = {{"value", v},
                   {"winner", v > 0 ? nlohmann::json("P1") : v < 0 ? nlohmann::json("P2") : nlohmann::json(nullptr)}};
  }
  return j;
}

Decision GameService::agent_move(const SessionRecord& r, const GameState& s) {
  auto& a = agent(r.preset);
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = derive_seed(cfg_.seed, {hash_id(r.id), static_cast<std::uint64_t>(s.ply())});
  Decision d = a.decide(s, seed);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  store_.append_move(r.id, SessionMove{d.action, s.to_move(), d.certain, ms});
  return d;
}

void GameService::finish_if_terminal(const std::string& id, const GameState& s) {
  if (s.terminal()) store_.append_result(id, s.outcome());
}

GameService::Response GameService::create_session(const nlohmann::json& body) {
  return guarded([&]() -> Response {
    SessionRecord r;
    r.spec = GameSpec::by_name(required_string(body, "game"));
    r.preset = body.value("preset", std::string("human"));
    agent(r.preset);  // validates the preset name
    try {
      r.human_side = player_from_name(body.value("human_side", std::string("P1")));
    } catch (const Error& e) {
      throw Error("bad-request", e.what());
    }
    r.blind = body.value("blind", false);
    r.participant = Participant::Human;
    r.weights = cfg_.weights_id;
    r.created_at = utc_now_iso8601();
    {
      std::lock_guard lock(mutex_);
      r.id = make_uuid(ids_);
    }
    const auto lock = session_lock(r.id);
    std::lock_guard guard(*lock);
    store_.create(r);

    GameState s(r.spec);
    nlohmann::json out{{"session_id", r.id}};
    if (s.to_move() != *r.human_side) {
      const Decision d = agent_move(r, s);
      s = s.apply(d.action);
      out["agent_move"] = d.action.to_string();
      if (!r.blind) out["meta"] = {{"certain", d.certain}, {"good_count", d.good.size()}};
      finish_if_terminal(r.id, s);
    }
    out["state"] = state_json(r, s);
    {
      std::lock_guard l(mutex_);
      last_seen_[r.id] = std::chrono::steady_clock::now();
    }
    return {201, out};
  });
}

GameService::Response GameService::play_move(const std::string& id, const nlohmann::json& body) {
  return guarded([&]() -> Response {
    if (!store_.contains(id)) throw Error("unknown-session", id);
    const auto lock = session_lock(id);
    std::lock_guard guard(*lock);
    const SessionRecord r = store_.get(id);
    if (r.participant != Participant::Human || !r.human_side) {
      throw Error("not-your-turn", "session has no human player");
    }
    GameState s = r.replay();
    if (s.terminal()) throw Error("session-finished", id);
    if (s.to_move() != *r.human_side) throw Error("not-your-turn", id);
    const Action a = Action::parse(required_string(body, "move"));
    if (!s.is_legal(a)) throw Error("illegal-move", a.to_string());

    double elapsed = 0.0;
    {
      std::lock_guard l(mutex_);
      const auto now = std::chrono::steady_clock::now();
      if (const auto it = last_seen_.find(id); it != last_seen_.end()) {
        elapsed = std::chrono::duration<double, std::milli>(now - it->second).count();
      }
    }
    store_.append_move(id, SessionMove{a, s.to_move(), std::nullopt, elapsed});
    s = s.apply(a);
    nlohmann::json out;
    if (s.terminal()) {
      finish_if_terminal(id, s);
    } else {
      const Decision d = agent_move(r, s);
      s = s.apply(d.action);
      out["agent_move"] = d.action.to_string();
      if (!r.blind) out["meta"] = {{"certain", d.certain}, {"good_count", d.good.size()}};
      finish_if_terminal(id, s);
    }
    out["state"] = state_json(r, s);
    {
      std::lock_guard l(mutex_);
      last_seen_[id] = std::chrono::steady_clock::now();
    }
    return {200, out};
  });
}

GameService::Response GameService::create_agent_game(const nlohmann::json& body) {
  return guarded([&]() -> Response {
    SessionRecord r;
    r.spec = GameSpec::by_name(required_string(body, "game"));
    r.preset = body.value("preset", std::string("human"));
    agent(r.preset);
    r.participant = Participant::AgentVsAgent;
    r.weights = cfg_.weights_id;
    r.created_at = utc_now_iso8601();
    {
      std::lock_guard lock(mutex_);
      r.id = make_uuid(ids_);
    }
    const auto lock = session_lock(r.id);
    std::lock_guard guard(*lock);
    store_.create(r);
    GameState s(r.spec);
    while (!s.terminal()) s = s.apply(agent_move(r, s).action);
    finish_if_terminal(r.id, s);
    return {201, {{"session_id", r.id}, {"state", state_json(r, s)}}};
  });
}

GameService::Response GameService::get_session(const std::string& id) const {
  return guarded([&]() -> Response { return {200, session_to_json(store_.get(id))}; });
}

GameService::Response GameService::list_sessions() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : store_.list()) out.push_back(session_summary_to_json(s));
  return {200, {{"sessions", out}}};
}

GameService::Response GameService::next_review(const std::string& rater_id) {
  std::vector<SessionRecord> humans;
  std::vector<SessionRecord> agents;
  int rated_by_rater = 0;
  for (auto& r : store_.all()) {
    const bool rated = std::any_of(r.ratings.begin(), r.ratings.end(),
                                   [&](const RatingRecord& x) { return x.rater_id == rater_id; });
    rated_by_rater += rated;
    if (!r.finished() || rated) continue;
    (r.participant == Participant::Human ? humans : agents).push_back(std::move(r));
  }
  if (humans.empty() && agents.empty()) return {204, nullptr};
  // Alternate sources per rater, random pick inside the source.
  const bool want_human = rated_by_rater % 2 == 0;
  auto& pool = (want_human && !humans.empty()) || agents.empty() ? humans : agents;
  Rng rng(derive_seed(cfg_.seed, {hash_id(rater_id), static_cast<std::uint64_t>(rated_by_rater)}));
  const SessionRecord& pick = pool[uniform_index(rng, pool.size())];
  std::vector<Action> moves;
  for (const auto& m : pick.moves) moves.push_back(m.action);
  return {200,
          {{"record_id", pick.id}, {"spec", spec_to_json(pick.spec)}, {"moves", moves_to_strings(moves)}}};
}

GameService::Response GameService::submit_rating(const std::string& id, const nlohmann::json& body) {
  return guarded([&]() -> Response {
    if (!store_.contains(id)) throw Error("unknown-record", id);
    if (!body.is_object()) throw Error("invalid-rating", "body must be an object");
    nlohmann::json j = body;
    j["record_id"] = id;
    const RatingRecord rating = rating_from_json(j);
    const auto lock = session_lock(id);
    std::lock_guard guard(*lock);
    const SessionRecord r = store_.get(id);
    if (!r.finished()) throw Error("not-finished", id);
    const bool duplicate = std::any_of(r.ratings.begin(), r.ratings.end(), [&](const RatingRecord& x) {
      return x.rater_id == rating.rater_id;
    });
    if (!duplicate) store_.append_rating(id, rating);
    return {204, nullptr};
  });
}

GameService::Response GameService::ratings_report() const {
  return guarded([&]() -> Response {
    std::vector<RatingRecord> ratings;
    std::map<std::string, Source> truth;
    for (const auto& r : store_.all()) {
      truth[r.id] = r.participant == Participant::Human ? Source::Human : Source::Agent;
      ratings.insert(ratings.end(), r.ratings.begin(), r.ratings.end());
    }
    return {200, ratings_report_to_json(aggregate_ratings(ratings, truth))};
  });
}

}  // namespace cogniplay
