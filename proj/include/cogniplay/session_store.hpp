#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogniplay/evaluation.hpp"
#include "cogniplay/game.hpp"
#include "cogniplay/rng.hpp"

namespace cogniplay {

inline constexpr int kSessionSchemaVersion = 1;

enum class Participant { Human, AgentVsAgent };

std::string participant_name(Participant p);
Participant participant_from_name(const std::string& s);

struct SessionMove {
  Action action;
  Player mover = Player::P1;
  std::optional<bool> certain;  // absent for human moves
  double elapsed_ms = 0.0;
};

struct SessionRecord {
  std::string id;
  std::string created_at;  // UTC ISO-8601
  GameSpec spec = GameSpec::tic_tac_toe();
  std::string preset;
  std::string weights;  // checkpoint id
  Participant participant = Participant::Human;
  std::optional<Player> human_side;
  bool blind = false;
  std::vector<SessionMove> moves;
  std::optional<Outcome> result;
  std::vector<RatingRecord> ratings;

  bool finished() const noexcept { return result.has_value(); }
  // Throws Error("illegal-move") if the moves do not replay.
  GameState replay() const;
};

nlohmann::json session_to_json(const SessionRecord& r);

struct SessionSummary {
  std::string id;
  std::string created_at;
  std::string game;
  Participant participant = Participant::Human;
  bool finished = false;
  int moves = 0;
  int ratings = 0;
};

nlohmann::json session_summary_to_json(const SessionSummary& s);

// One append-only JSON-lines file per session under <dir>/sessions plus an
// index at <dir>/index.json. Lines carry a "v" schema field and a "type" of
// header, move, result or rating. Thread-safe; writes to one file are
// serialized by the caller holding that session's lock.
class SessionStore {
 public:
  // Loads every session; rebuilds the index when it is missing or stale.
  // A corrupt trailing line is truncated away with a warning on stderr.
  explicit SessionStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path session_path(const std::string& id) const;

  void create(const SessionRecord& header);
  void append_move(const std::string& id, const SessionMove& move);
  void append_result(const std::string& id, const Outcome& result);
  void append_rating(const std::string& id, const RatingRecord& rating);

  // Throws Error("unknown-session").
  SessionRecord get(const std::string& id) const;
  bool contains(const std::string& id) const;
  std::vector<SessionSummary> list() const;
  std::vector<SessionRecord> all() const;

  // Warnings produced while loading, e.g. truncated lines.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  // Reads one session file; truncates a corrupt tail when `repair` is set.
  static SessionRecord load_file(const std::filesystem::path& path, bool repair,
                                 std::vector<std::string>* warnings = nullptr);

 private:
  void append_line(const std::string& id, const nlohmann::json& line);
  void write_index() const;
  SessionRecord& record(const std::string& id);

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<std::string, SessionRecord> sessions_;
  std::vector<std::string> warnings_;
};

// Random RFC 4122 version-4 identifier.
std::string make_uuid(Rng& rng);
std::string utc_now_iso8601();

}  // namespace cogniplay
