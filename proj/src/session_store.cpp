#include "cogniplay/session_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cogniplay {
namespace {

namespace fs = std::filesystem;

void write_all(int fd, const std::string& data, const fs::path& path) {
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("io-error", "write " + path.string() + ": " + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

// Appends (or creates, failing if it exists) and syncs before returning, so a
// crash loses at most the line being written.
void durable_write(const fs::path& path, const std::string& data, bool create) {
  const int flags = create ? (O_WRONLY | O_CREAT | O_EXCL) : (O_WRONLY | O_APPEND);
  const int fd = ::open(path.c_str(), flags, 0644);
  if (fd < 0) throw Error("io-error", "open " + path.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, data, path);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::fsync(fd);
  ::close(fd);
}

SessionMove move_from_json(const nlohmann::json& j) {
  SessionMove m;
  m.action = Action::parse(j.at("action").get<std::string>());
  m.mover = player_from_name(j.at("mover").get<std::string>());
  if (j.contains("certain") && !j["certain"].is_null()) m.certain = j["certain"].get<bool>();
  m.elapsed_ms = j.value("elapsed_ms", 0.0);
  return m;
}

nlohmann::json move_to_json(const SessionMove& m) {
  nlohmann::json j{{"action", m.action.to_string()},
                   {"mover", player_name(m.mover)},
                   {"certain", nullptr},
                   {"elapsed_ms", m.elapsed_ms}};
  if (m.certain) j["certain"] = *m.certain;
  return j;
}

nlohmann::json header_to_json(const SessionRecord& r) {
  nlohmann::json j{{"v", kSessionSchemaVersion},
                   {"type", "header"},
                   {"id", r.id},
                   {"created_at", r.created_at},
                   {"spec", spec_to_json(r.spec)},
                   {"preset", r.preset},
                   {"weights", r.weights},
                   {"participant", participant_name(r.participant)},
                   {"human_side", nullptr},
                   {"blind", r.blind}};
  if (r.human_side) j["human_side"] = player_name(*r.human_side);
  return j;
}

SessionSummary summarize(const SessionRecord& r) {
  return SessionSummary{r.id,         r.created_at,         r.spec.name.empty() ? spec_to_json(r.spec).dump() : r.spec.name,
                        r.participant, r.finished(), static_cast<int>(r.moves.size()),
                        static_cast<int>(r.ratings.size())};
}

}  // namespace

nlohmann::json session_summary_to_json(const SessionSummary& s) {
  return nlohmann::json{{"id", s.id},
                        {"created_at", s.created_at},
                        {"game", s.game},
                        {"participant", participant_name(s.participant)},
                        {"finished", s.finished},
                        {"moves", s.moves},
                        {"ratings", s.ratings}};
}

std::string participant_name(Participant p) {
  return p == Participant::Human ? "human" : "agent-vs-agent";
}

Participant participant_from_name(const std::string& s) {
  if (s == "human") return Participant::Human;
  if (s == "agent-vs-agent") return Participant::AgentVsAgent;
  throw Error("bad-session", "unknown participant type " + s);
}

GameState SessionRecord::replay() const {
  GameState s(spec);
  for (const auto& m : moves) {
    if (s.terminal() || s.to_move() != m.mover) throw Error("illegal-move", "out of turn");
    s = s.apply(m.action);
  }
  return s;
}

nlohmann::json session_to_json(const SessionRecord& r) {
  nlohmann::json j = header_to_json(r);
  j.erase("type");
  nlohmann::json moves = nlohmann::json::array();
  for (const auto& m : r.moves) moves.push_back(move_to_json(m));
  j["moves"] = moves;
  j["result"] = nullptr;
  if (r.result) j["result"] = {{"value", r.result->value}};
  nlohmann::json ratings = nlohmann::json::array();
  for (const auto& rating : r.ratings) ratings.push_back(rating_to_json(rating));
  j["ratings"] = ratings;
  return j;
}

std::string make_uuid(Rng& rng) {
  std::uint64_t hi = rng();
  std::uint64_t lo = rng();
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;  // version 4
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;  // RFC 4122 variant
  char buf[37];
  std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xffff),
                static_cast<unsigned>(hi & 0xffff), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return buf;
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

SessionRecord SessionStore::load_file(const fs::path& path, bool repair,
                                      std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-error", "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  SessionRecord r;
  bool have_header = false;
  GameState state(GameSpec::tic_tac_toe());
  std::size_t good_end = 0;  // byte offset just past the last accepted line
  std::size_t pos = 0;
  std::string problem;
  while (pos < data.size()) {
    const std::size_t nl = data.find('\n', pos);
    if (nl == std::string::npos) {
      problem = "partial trailing line";
      break;
    }
    const std::string line = data.substr(pos, nl - pos);
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.at("v").get<int>() > kSessionSchemaVersion) {
        throw Error("bad-session", "newer schema version");
      }
      const auto type = j.at("type").get<std::string>();
      if (!have_header) {
        if (type != "header") throw Error("bad-session", "first line is not a header");
        r.id = j.at("id").get<std::string>();
        r.created_at = j.value("created_at", std::string());
        r.spec = spec_from_json(j.at("spec"));
        r.preset = j.value("preset", std::string());
        r.weights = j.value("weights", std::string());
        r.participant = participant_from_name(j.at("participant").get<std::string>());
        if (j.contains("human_side") && !j["human_side"].is_null()) {
          r.human_side = player_from_name(j["human_side"].get<std::string>());
        }
        r.blind = j.value("blind", false);
        state = GameState(r.spec);
        have_header = true;
      } else if (type == "move") {
        if (r.result) throw Error("bad-session", "move after result");
        const SessionMove m = move_from_json(j);
        if (state.to_move() != m.mover) throw Error("illegal-move", "out of turn");
        state = state.apply(m.action);
        r.moves.push_back(m);
      } else if (type == "result") {
        const Outcome o{j.at("value").get<int>(), true};
        if (!state.terminal() || state.outcome() != o) {
          throw Error("bad-session", "result does not match the replayed game");
        }
        r.result = o;
      } else if (type == "rating") {
        r.ratings.push_back(rating_from_json(j));
      } else {
        throw Error("bad-session", "unknown line type " + type);
      }
    } catch (const std::exception& e) {
      problem = e.what();
      break;
    }
    pos = nl + 1;
    good_end = pos;
  }
  if (!have_header) throw Error("bad-session", path.string() + ": no valid header");
  if (!problem.empty()) {
    const std::string msg = path.string() + ": dropped " + std::to_string(data.size() - good_end) +
                            " bytes after a corrupt line (" + problem + ")";
    if (warnings) warnings->push_back(msg);
    if (repair) fs::resize_file(path, good_end);
  }
  return r;
}

SessionStore::SessionStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_ / "sessions");
  for (const auto& entry : fs::directory_iterator(dir_ / "sessions")) {
    if (entry.path().extension() != ".jsonl") continue;
    try {
      SessionRecord r = load_file(entry.path(), true, &warnings_);
      sessions_.emplace(r.id, std::move(r));
    } catch (const std::exception& e) {
      warnings_.push_back(std::string("skipped ") + entry.path().string() + ": " + e.what());
    }
  }
  for (const auto& w : warnings_) std::cerr << "warning: " << w << '\n';

  bool fresh = false;
  const fs::path index = dir_ / "index.json";
  if (std::ifstream in{index}) {
    try {
      const auto j = nlohmann::json::parse(in);
      std::vector<std::string> ids;
      for (const auto& s : j.at("sessions")) ids.push_back(s.at("id").get<std::string>());
      std::vector<std::string> mine;
      for (const auto& [id, r] : sessions_) mine.push_back(id);
      std::sort(ids.begin(), ids.end());
      fresh = ids == mine;
    } catch (const std::exception&) {
      fresh = false;
    }
  }
  if (!fresh) write_index();
}

fs::path SessionStore::session_path(const std::string& id) const {
  return dir_ / "sessions" / (id + ".jsonl");
}

void SessionStore::write_index() const {
  nlohmann::json sessions = nlohmann::json::array();
  for (const auto& [id, r] : sessions_) sessions.push_back(session_summary_to_json(summarize(r)));
  const nlohmann::json j{{"v", kSessionSchemaVersion}, {"sessions", sessions}};
  const fs::path tmp = dir_ / "index.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("io-error", "cannot write " + tmp.string());
    out << j.dump(1) << '\n';
  }
  fs::rename(tmp, dir_ / "index.json");
}

SessionRecord& SessionStore::record(const std::string& id) {
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error("unknown-session", id);
  return it->second;
}

void SessionStore::create(const SessionRecord& header) {
  std::lock_guard lock(mutex_);
  if (sessions_.contains(header.id)) throw Error("bad-session", "duplicate id " + header.id);
  durable_write(session_path(header.id), header_to_json(header).dump() + "\n", true);
  SessionRecord r = header;
  r.moves.clear();
  r.result.reset();
  r.ratings.clear();
  sessions_.emplace(r.id, std::move(r));
  write_index();
}

void SessionStore::append_line(const std::string& id, const nlohmann::json& line) {
  durable_write(session_path(id), line.dump() + "\n", false);
}

void SessionStore::append_move(const std::string& id, const SessionMove& move) {
  std::lock_guard lock(mutex_);
  SessionRecord& r = record(id);
  if (r.finished()) throw Error("session-finished", id);
  nlohmann::json j = move_to_json(move);
  j["v"] = kSessionSchemaVersion;
  j["type"] = "move";
  append_line(id, j);
  r.moves.push_back(move);
}

void SessionStore::append_result(const std::string& id, const Outcome& result) {
  std::lock_guard lock(mutex_);
  SessionRecord& r = record(id);
  if (r.finished()) throw Error("session-finished", id);
  append_line(id, {{"v", kSessionSchemaVersion}, {"type", "result"}, {"value", result.value}});
  r.result = result;
  write_index();
}

void SessionStore::append_rating(const std::string& id, const RatingRecord& rating) {
  std::lock_guard lock(mutex_);
  SessionRecord& r = record(id);
  nlohmann::json j = rating_to_json(rating);
  j["v"] = kSessionSchemaVersion;
  j["type"] = "rating";
  append_line(id, j);
  r.ratings.push_back(rating);
}

SessionRecord SessionStore::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error("unknown-session", id);
  return it->second;
}

bool SessionStore::contains(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return sessions_.contains(id);
}

std::vector<SessionSummary> SessionStore::list() const {
  std::lock_guard lock(mutex_);
  std::vector<SessionSummary> out;
  for (const auto& [id, r] : sessions_) out.push_back(summarize(r));
  return out;
}

std::vector<SessionRecord> SessionStore::all() const {
  std::lock_guard lock(mutex_);
  std::vector<SessionRecord> out;
  for (const auto& [id, r] : sessions_) out.push_back(r);
  return out;
}

}  // namespace cogniplay
