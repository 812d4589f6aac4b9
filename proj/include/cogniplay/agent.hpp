#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cogniplay/features.hpp"
#include "cogniplay/game.hpp"
#include "cogniplay/policy.hpp"
#include "cogniplay/search.hpp"

namespace cogniplay {

struct AgentConfig {
  std::string preset = "vanilla";
  int radius = 2;
  double tau = 0.1;
  int chunk_cap = 7;
  int max_features = 2000;
  SearchConfig search = SearchConfig::vanilla();

  // "vanilla" or "human"; throws Error("unknown-preset").
  static AgentConfig from_preset(std::string_view name);

  PartitionParams partition() const { return PartitionParams{tau, chunk_cap}; }
  void validate() const;

  bool operator==(const AgentConfig&) const = default;
};

// {"preset", "features": {"radius", "tau", "chunk_cap", "max_features"}, "search": {...}}.
// Missing fields take the named preset's defaults.
nlohmann::json agent_config_to_json(const AgentConfig& cfg);
AgentConfig agent_config_from_json(const nlohmann::json& j);
AgentConfig load_agent_config(const std::filesystem::path& path);

struct Decision {
  Action action;
  bool certain = false;
  std::vector<Action> good;  // System-1 good set, best first
  // Root visit counts over the good set when System 2 ran; empty otherwise.
  std::vector<std::pair<Action, std::int64_t>> visits;
  std::optional<SearchResult> search;
  // Every legal action, most preferred first: visits, then System-1
  // probability, then row-major order.
  std::vector<Action> ranking;
};

struct DecideOptions {
  // Draw the move from the root visit distribution (temperature 1) instead of
  // taking the most visited action. Certain decisions are unaffected.
  bool sample_from_visits = false;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual Decision decide(const GameState& state, std::uint64_t seed) = 0;
  virtual std::string name() const = 0;
};

// System 1 partitions the legal actions; a certain partition is played
// directly, a doubtful one is handed to the focused search.
class DualProcessAgent final : public Agent {
 public:
  DualProcessAgent(AgentConfig cfg, std::shared_ptr<const FeatureSet> fs);

  Decision decide(const GameState& state, std::uint64_t seed) override;
  Decision decide(const GameState& state, std::uint64_t seed, const DecideOptions& options);
  std::string name() const override { return "cogniplay:" + cfg_.preset; }

  const AgentConfig& config() const noexcept { return cfg_; }
  const FeatureSet& features() const noexcept { return *fs_; }
  // Number of times System 2 was invoked.
  std::int64_t search_calls() const noexcept { return search_calls_.load(); }

 private:
  AgentConfig cfg_;
  std::shared_ptr<const FeatureSet> fs_;
  std::atomic<std::int64_t> search_calls_{0};
};

// Uniform over legal actions; the baseline opponent.
class RandomAgent final : public Agent {
 public:
  Decision decide(const GameState& state, std::uint64_t seed) override;
  std::string name() const override { return "random"; }
};

// Free-function form of DualProcessAgent::decide. `search_calls`, when given,
// is incremented each time System 2 runs.
Decision decide(const GameState& state, const FeatureSet& fs, const AgentConfig& cfg,
                std::uint64_t seed, const DecideOptions& options = {},
                std::int64_t* search_calls = nullptr);

}  // namespace cogniplay
