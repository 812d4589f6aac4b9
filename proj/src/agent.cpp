#include "cogniplay/agent.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "cogniplay/rng.hpp"

namespace cogniplay {
namespace {

std::vector<Action> rank_actions(const PolicyDist& dist,
                                 const std::vector<std::pair<Action, std::int64_t>>& visits) {
  std::vector<std::int64_t> n(dist.size(), 0);
  for (const auto& [a, count] : visits) {
    const auto pos = std::lower_bound(dist.actions.begin(), dist.actions.end(), a);
    if (pos != dist.actions.end() && *pos == a) n[static_cast<std::size_t>(pos - dist.actions.begin())] = count;
  }
  std::vector<std::size_t> order(dist.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (n[a] != n[b]) return n[a] > n[b];
    return dist.probs[a] > dist.probs[b];
  });
  std::vector<Action> ranking;
  ranking.reserve(order.size());
  for (std::size_t i : order) ranking.push_back(dist.actions[i]);
  return ranking;
}

}  // namespace

AgentConfig AgentConfig::from_preset(std::string_view name) {
  AgentConfig cfg;
  cfg.preset = std::string(name);
  cfg.search = SearchConfig::preset(name);
  return cfg;
}

void AgentConfig::validate() const {
  if (radius < 1 || radius > kMaxRadius) throw Error("invalid-config", "radius out of range");
  if (max_features < 1) throw Error("invalid-config", "max_features must be positive");
  partition().validate();
  search.validate();
}

nlohmann::json agent_config_to_json(const AgentConfig& cfg) {
  return nlohmann::json{{"preset", cfg.preset},
                        {"features",
                         {{"radius", cfg.radius},
                          {"tau", cfg.tau},
                          {"chunk_cap", cfg.chunk_cap},
                          {"max_features", cfg.max_features}}},
                        {"search", search_config_to_json(cfg.search)}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  AgentConfig cfg = AgentConfig::from_preset(j.value("preset", std::string("vanilla")));
  if (j.contains("features")) {
    const auto& f = j["features"];
    cfg.radius = f.value("radius", cfg.radius);
    cfg.tau = f.value("tau", cfg.tau);
    cfg.chunk_cap = f.value("chunk_cap", cfg.chunk_cap);
    cfg.max_features = f.value("max_features", cfg.max_features);
  }
  if (j.contains("search")) cfg.search = search_config_from_json(j["search"], cfg.search);
  cfg.validate();
  return cfg;
}

AgentConfig load_agent_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot read " + path.string());
  return agent_config_from_json(nlohmann::json::parse(in));
}

Decision decide(const GameState& state, const FeatureSet& fs, const AgentConfig& cfg,
                std::uint64_t seed, const DecideOptions& options, std::int64_t* search_calls) {
  if (state.terminal()) throw Error("terminal-state");
  const PolicyDist dist = policy(fs, state);
  const Partition part = partition(dist, cfg.partition());

  Decision d;
  d.good = part.good;
  d.certain = part.certain;
  if (part.certain) {
    d.action = part.good.front();
    d.ranking = rank_actions(dist, {});
    return d;
  }

  SearchConfig sc = cfg.search;
  sc.seed = derive_seed(cfg.search.seed, {seed});
  if (search_calls) ++*search_calls;
  SearchResult result = search(state, fs, sc, cfg.partition());
  d.action = result.chosen;
  d.visits = result.visits;
  d.ranking = rank_actions(dist, result.visits);
  if (options.sample_from_visits) {
    std::int64_t total = 0;
    for (const auto& [a, n] : result.visits) total += n;
    if (total > 0) {
      Rng rng(derive_seed(sc.seed, {0x5eedULL}));
      const auto target = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::size_t>(total)));
      std::int64_t acc = 0;
      for (const auto& [a, n] : result.visits) {
        acc += n;
        if (target < acc) {
          d.action = a;
          break;
        }
      }
    }
  }
  d.search = std::move(result);
  return d;
}

DualProcessAgent::DualProcessAgent(AgentConfig cfg, std::shared_ptr<const FeatureSet> fs)
    : cfg_(std::move(cfg)), fs_(std::move(fs)) {
  cfg_.validate();
  if (!fs_) throw Error("invalid-config", "agent needs a feature set");
}

Decision DualProcessAgent::decide(const GameState& state, std::uint64_t seed) {
  return decide(state, seed, DecideOptions{});
}

Decision DualProcessAgent::decide(const GameState& state, std::uint64_t seed,
                                  const DecideOptions& options) {
  std::int64_t calls = 0;
  Decision d = cogniplay::decide(state, *fs_, cfg_, seed, options, &calls);
  search_calls_ += calls;
  return d;
}

Decision RandomAgent::decide(const GameState& state, std::uint64_t seed) {
  const auto legal = state.legal_actions();
  Rng rng(derive_seed(seed, {0xabcdefULL}));
  Decision d;
  d.ranking = legal;
  // Fisher-Yates with the portable index draw; the first entry is the move.
  for (std::size_t i = d.ranking.size(); i > 1; --i) {
    std::swap(d.ranking[i - 1], d.ranking[uniform_index(rng, i)]);
  }
  d.action = d.ranking.front();
  return d;
}

}  // namespace cogniplay
