#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogniplay/agent.hpp"
#include "cogniplay/game.hpp"
#include "cogniplay/kernels.hpp"

namespace cogniplay {

// ---------------------------------------------------------------------------
// Move matching

struct MoveEntry {
  GameState state;
  Action played;
  std::optional<std::string> tag;  // e.g. player strength
};

struct MoveDataset {
  std::string source;
  std::vector<MoveEntry> entries;
  // Lines that could not be replayed, with line numbers.
  std::vector<std::string> diagnostics;
};

// JSON lines {"moves": [...], "played": "h8", "spec"?: {...}, "tag"?: "..."}.
// `spec` defaults to `default_spec`. Entries whose history does not replay are
// skipped with a diagnostic; the played move is checked later by move_match.
MoveDataset parse_move_dataset(std::istream& in, const std::string& source,
                               const GameSpec& default_spec);
MoveDataset load_move_dataset(const std::filesystem::path& path, const GameSpec& default_spec);
nlohmann::json move_entry_to_json(const MoveEntry& e);

// Preference-ordered actions for a state; front() is the chosen move.
using RankFn = std::function<std::vector<Action>(const GameState&)>;

struct MatchReport {
  double top1 = 0.0;
  std::map<int, double> topk;
  double ceiling = 1.0;
  int n = 0;
  std::vector<std::string> rejected;
};

nlohmann::json match_report_to_json(const MatchReport& r);

// Entries whose played move is illegal are excluded from n and listed in
// `rejected`. Throws Error("empty-dataset") when nothing is left.
MatchReport move_match(const MoveDataset& data, const RankFn& rank, std::span<const int> ks);

// Ranking from an agent, seeded by the position so the report does not depend
// on entry order.
RankFn agent_ranker(Agent& agent, std::uint64_t seed);

// Share of entries a deterministic policy could match at best: entries are
// grouped by canonical state and each group contributes its most frequent
// (canonical) move. Only entries with a legal played move count.
double self_consistency_ceiling(const MoveDataset& data);

// ---------------------------------------------------------------------------
// Strength matches

struct StrengthReport {
  int games = 0;
  int wins_a = 0;
  int draws = 0;
  int wins_b = 0;
  double elo_diff = 0.0;
  std::int64_t searches = 0;
  int max_depth_reached = 0;  // over every search either side ran
};

nlohmann::json strength_report_to_json(const StrengthReport& r);

// 400 log10((wins_a + draws/2) / (wins_b + draws/2)), clamped to +-1000.
double elo_difference(int wins_a, int draws, int wins_b);

// Games are played in colour-swapped pairs sharing one seed; game 2i has A as
// P1. Agents must be safe to call concurrently. Throws Error("invalid-config")
// for odd or non-positive N.
StrengthReport strength_match(Agent& a, Agent& b, const GameSpec& spec, int games,
                              std::uint64_t seed, kernels::Exec exec = kernels::Exec::Parallel);

// ---------------------------------------------------------------------------
// Blind-review ratings

enum class Source { Human, Agent };

std::string source_name(Source s);
// Throws Error("invalid-rating").
Source source_from_name(const std::string& s);

inline constexpr std::array<const char*, 4> kQualities = {"human_likeness", "aggressiveness",
                                                          "tactical_depth", "traps"};

struct RatingRecord {
  std::string record_id;
  std::string rater_id;
  Source guess = Source::Human;
  std::map<std::string, int> scores;  // every quality, 1..5

  // Throws Error("invalid-rating").
  void validate() const;
};

nlohmann::json rating_to_json(const RatingRecord& r);
// Validates; throws Error("invalid-rating").
RatingRecord rating_from_json(const nlohmann::json& j);

struct QualityStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  int n = 0;
};

struct RatingsReport {
  // source name -> quality -> stats
  std::map<std::string, std::map<std::string, QualityStats>> by_source;
  double discrimination_accuracy = 0.0;
  int n = 0;
};

nlohmann::json ratings_report_to_json(const RatingsReport& r);

// Throws Error("unknown-record") when a rating has no ground truth.
RatingsReport aggregate_ratings(std::span<const RatingRecord> records,
                                const std::map<std::string, Source>& truth);

}  // namespace cogniplay
