#include "cogniplay/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "cogniplay/rng.hpp"

namespace cogniplay {
namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

MoveDataset parse_move_dataset(std::istream& in, const std::string& source,
                               const GameSpec& default_spec) {
  MoveDataset data;
  data.source = source;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const GameSpec spec = j.contains("spec") ? spec_from_json(j["spec"]) : default_spec;
      MoveEntry e{GameState::replay(spec, parse_moves(j.at("moves"))),
                  Action::parse(j.at("played").get<std::string>()), std::nullopt};
      if (j.contains("tag") && j["tag"].is_string()) e.tag = j["tag"].get<std::string>();
      data.entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      data.diagnostics.push_back(source + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return data;
}

MoveDataset load_move_dataset(const std::filesystem::path& path, const GameSpec& default_spec) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot read " + path.string());
  return parse_move_dataset(in, path.string(), default_spec);
}

nlohmann::json move_entry_to_json(const MoveEntry& e) {
  nlohmann::json j{{"spec", spec_to_json(e.state.spec())},
                   {"moves", moves_to_strings(e.state.history())},
                   {"played", e.played.to_string()}};
  if (e.tag) j["tag"] = *e.tag;
  return j;
}

nlohmann::json match_report_to_json(const MatchReport& r) {
  nlohmann::json topk = nlohmann::json::object();
  for (const auto& [k, v] : r.topk) topk[std::to_string(k)] = v;
  return nlohmann::json{{"top1", r.top1},     {"topk", topk},           {"ceiling", r.ceiling},
                        {"n", r.n},           {"rejected", r.rejected}};
}

MatchReport move_match(const MoveDataset& data, const RankFn& rank, std::span<const int> ks) {
  MatchReport report;
  std::map<int, int> hits_k;
  for (int k : ks) {
    if (k < 1) throw Error("invalid-config", "k must be at least 1");
    hits_k[k] = 0;
  }
  int hits = 0;
  MoveDataset accepted;
  for (std::size_t i = 0; i < data.entries.size(); ++i) {
    const auto& e = data.entries[i];
    if (e.state.terminal() || !e.state.is_legal(e.played)) {
      report.rejected.push_back("entry " + std::to_string(i) + ": illegal recorded move " +
                                e.played.to_string());
      continue;
    }
    accepted.entries.push_back(e);
    const auto ranking = rank(e.state);
    if (ranking.empty()) throw Error("invalid-config", "ranker returned no actions");
    hits += ranking.front() == e.played;
    const auto pos = std::find(ranking.begin(), ranking.end(), e.played);
    const auto place = static_cast<int>(pos - ranking.begin());
    for (auto& [k, h] : hits_k) h += pos != ranking.end() && place < k;
    ++report.n;
  }
  if (report.n == 0) throw Error("empty-dataset", "no usable entries");
  const double n = report.n;
  report.top1 = hits / n;
  for (const auto& [k, h] : hits_k) report.topk[k] = h / n;
  report.ceiling = self_consistency_ceiling(accepted);
  return report;
}

RankFn agent_ranker(Agent& agent, std::uint64_t seed) {
  return [&agent, seed](const GameState& s) {
    const auto key = spec_to_json(s.spec()).dump() + nlohmann::json(moves_to_strings(s.history())).dump();
    return agent.decide(s, derive_seed(seed, {fnv1a(key)})).ranking;
  };
}

double self_consistency_ceiling(const MoveDataset& data) {
  // canonical key -> canonical move index -> count
  std::unordered_map<std::string, std::map<int, int>> groups;
  int total = 0;
  for (const auto& e : data.entries) {
    if (e.state.terminal() || !e.state.is_legal(e.played)) continue;
    const auto form = canonical_form(e.state);
    const Action c = canonical_action(e.state, form, e.played);
    ++groups[form.key][c.index(e.state.spec().columns)];
    ++total;
  }
  if (total == 0) throw Error("empty-dataset", "no usable entries");
  int best = 0;
  for (const auto& [key, moves] : groups) {
    int m = 0;
    for (const auto& [a, count] : moves) m = std::max(m, count);
    best += m;
  }
  return static_cast<double>(best) / static_cast<double>(total);
}

nlohmann::json strength_report_to_json(const StrengthReport& r) {
  return nlohmann::json{{"games", r.games},       {"wins_a", r.wins_a},
                        {"draws", r.draws},       {"wins_b", r.wins_b},
                        {"elo_diff", r.elo_diff}, {"searches", r.searches},
                        {"max_depth_reached", r.max_depth_reached}};
}

double elo_difference(int wins_a, int draws, int wins_b) {
  const double a = wins_a + draws / 2.0;
  const double b = wins_b + draws / 2.0;
  if (a == 0.0 && b == 0.0) return 0.0;
  if (b == 0.0) return 1000.0;
  if (a == 0.0) return -1000.0;
  return std::clamp(400.0 * std::log10(a / b), -1000.0, 1000.0);
}

StrengthReport strength_match(Agent& a, Agent& b, const GameSpec& spec, int games,
                              std::uint64_t seed, kernels::Exec exec) {
  if (games < 2 || games % 2 != 0) throw Error("invalid-config", "games must be even and positive");
  spec.validate();
  struct GameTally {
    int a_result = 0;  // +1 A won, 0 draw, -1 B won
    std::int64_t searches = 0;
    int max_depth = 0;
  };
  std::vector<GameTally> tallies(static_cast<std::size_t>(games));
  kernels::for_each_index(tallies.size(), exec, [&](std::size_t g) {
    const bool a_first = g % 2 == 0;
    const std::uint64_t pair_seed = derive_seed(seed, {g / 2});
    GameState s(spec);
    GameTally t;
    int ply = 0;
    while (!s.terminal()) {
      const bool a_moves = (s.to_move() == Player::P1) == a_first;
      Agent& mover = a_moves ? a : b;
      const Decision d = mover.decide(s, derive_seed(pair_seed, {static_cast<std::uint64_t>(ply)}));
      if (d.search) {
        ++t.searches;
        t.max_depth = std::max(t.max_depth, d.search->stats.max_depth_reached);
      }
      s = s.apply(d.action);
      ++ply;
    }
    const int p1_value = s.outcome().value;
    t.a_result = a_first ? p1_value : -p1_value;
    tallies[g] = t;
  });

  StrengthReport r;
  r.games = games;
  for (const auto& t : tallies) {
    if (t.a_result > 0) ++r.wins_a;
    else if (t.a_result < 0) ++r.wins_b;
    else ++r.draws;
    r.searches += t.searches;
    r.max_depth_reached = std::max(r.max_depth_reached, t.max_depth);
  }
  r.elo_diff = elo_difference(r.wins_a, r.draws, r.wins_b);
  return r;
}

std::string source_name(Source s) { return s == Source::Human ? "human" : "agent"; }

Source source_from_name(const std::string& s) {
  if (s == "human") return Source::Human;
  if (s == "agent") return Source::Agent;
  throw Error("invalid-rating", "guess must be \"human\" or \"agent\"");
}

void RatingRecord::validate() const {
  if (record_id.empty()) throw Error("invalid-rating", "missing record id");
  for (const char* q : kQualities) {
    const auto it = scores.find(q);
    if (it == scores.end()) throw Error("invalid-rating", std::string("missing score: ") + q);
    if (it->second < 1 || it->second > 5) {
      throw Error("invalid-rating", std::string("score out of range 1..5: ") + q);
    }
  }
  if (scores.size() != kQualities.size()) throw Error("invalid-rating", "unknown quality");
}

nlohmann::json rating_to_json(const RatingRecord& r) {
  return nlohmann::json{{"record_id", r.record_id},
                        {"rater_id", r.rater_id},
                        {"guess", source_name(r.guess)},
                        {"scores", r.scores}};
}

RatingRecord rating_from_json(const nlohmann::json& j) {
  RatingRecord r;
  try {
    r.record_id = j.value("record_id", std::string());
    r.rater_id = j.value("rater_id", std::string());
    if (!j.contains("guess") || !j["guess"].is_string()) throw Error("invalid-rating", "missing guess");
    r.guess = source_from_name(j["guess"].get<std::string>());
    if (!j.contains("scores") || !j["scores"].is_object()) throw Error("invalid-rating", "missing scores");
    for (const auto& [q, v] : j["scores"].items()) {
      if (!v.is_number_integer()) throw Error("invalid-rating", "scores must be integers: " + q);
      r.scores[q] = v.get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid-rating", e.what());
  }
  r.validate();
  return r;
}

nlohmann::json ratings_report_to_json(const RatingsReport& r) {
  nlohmann::json by_source = nlohmann::json::object();
  for (const auto& [src, qualities] : r.by_source) {
    for (const auto& [q, st] : qualities) {
      by_source[src][q] = {{"mean", st.mean}, {"std", st.stddev}, {"n", st.n}};
    }
  }
  return nlohmann::json{{"by_source", by_source},
                        {"discrimination_accuracy", r.discrimination_accuracy},
                        {"n", r.n}};
}

RatingsReport aggregate_ratings(std::span<const RatingRecord> records,
                                const std::map<std::string, Source>& truth) {
  RatingsReport report;
  std::map<std::string, std::map<std::string, std::vector<int>>> values;
  int correct = 0;
  for (const auto& r : records) {
    const auto it = truth.find(r.record_id);
    if (it == truth.end()) throw Error("unknown-record", r.record_id);
    correct += r.guess == it->second;
    for (const auto& [q, v] : r.scores) values[source_name(it->second)][q].push_back(v);
    ++report.n;
  }
  for (const auto& [src, qualities] : values) {
    for (const auto& [q, vs] : qualities) {
      QualityStats st;
      st.n = static_cast<int>(vs.size());
      double sum = 0.0;
      for (int v : vs) sum += v;
      st.mean = sum / st.n;
      double sq = 0.0;
      for (int v : vs) sq += (v - st.mean) * (v - st.mean);
      st.stddev = std::sqrt(sq / st.n);
      report.by_source[src][q] = st;
    }
  }
  report.discrimination_accuracy = report.n ? static_cast<double>(correct) / report.n : 0.0;
  return report;
}

}  // namespace cogniplay
