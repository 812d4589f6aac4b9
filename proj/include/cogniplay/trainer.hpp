#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogniplay/agent.hpp"
#include "cogniplay/features.hpp"
#include "cogniplay/game.hpp"
#include "cogniplay/kernels.hpp"
#include "cogniplay/policy.hpp"

namespace cogniplay {

struct TrainSample {
  GameState state;
  PolicyDist target;  // search visit distribution over the legal actions
  int iteration_born = 0;
};

// Fixed-capacity FIFO of training samples.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(TrainSample sample);
  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::int64_t evicted() const noexcept { return evicted_; }
  const TrainSample& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::int64_t evicted_ = 0;
  std::deque<TrainSample> items_;
};

struct MoveRecord {
  Action action;
  Player mover = Player::P1;
  bool certain = false;
};

struct GameRecord {
  GameSpec spec;
  std::vector<MoveRecord> moves;
  Outcome result;
  int decision_points = 0;
  int doubtful = 0;
};

struct SelfPlayOptions {
  int explore_plies = 4;          // sample from visits for this many opening plies
  bool train_on_certain = false;  // ablation: also search and sample certain states
  int iteration = 0;              // stamped on samples
};

struct SelfPlayResult {
  GameRecord record;
  std::vector<TrainSample> samples;
  std::int64_t search_calls = 0;
};

// Both sides decide with the same feature set. Samples come only from doubtful
// decision points unless train_on_certain is set.
SelfPlayResult self_play_game(const FeatureSet& fs, const AgentConfig& cfg, const GameSpec& spec,
                              std::uint64_t seed, const SelfPlayOptions& options = {});

struct TrainerConfig {
  GameSpec game = GameSpec::tic_tac_toe();
  AgentConfig agent;
  int iterations = 10;      // I
  int games = 100;          // G per iteration
  int buffer_capacity = 10000;
  int batch_size = 64;
  int epochs = 2;           // E passes over the buffer per iteration
  int growth_period = 2;    // grow features every this many iterations
  int growth_count = 32;    // M, conjunctions added per growth
  int growth_samples = 512; // most recent buffer samples scanned for errors
  double learning_rate = 0.05;
  double held_out_fraction = 0.1;
  int explore_plies = 4;
  int probe_states = 200;
  bool train_on_certain = false;
  std::uint64_t seed = 0;
  kernels::Exec exec = kernels::Exec::Parallel;

  void validate() const;
};

// Defaults from `base` for fields absent in `j`:
// {"game", "agent", "iterations", "games", "buffer_capacity", "batch_size",
//  "epochs", "growth_period", "growth_count", "growth_samples", "learning_rate",
//  "held_out_fraction", "explore_plies", "probe_states", "train_on_certain", "seed"}
TrainerConfig trainer_config_from_json(const nlohmann::json& j, TrainerConfig base = {});
nlohmann::json trainer_config_to_json(const TrainerConfig& cfg);

struct IterationReport {
  int iteration = 0;
  int games = 0;
  std::int64_t decision_points = 0;
  std::int64_t samples = 0;          // doubtful decision points harvested
  double doubtful_fraction = 0.0;
  double certain_fraction = 0.0;     // certain-bypass fraction during self-play
  double probe_certain_fraction = 0.0;
  double train_cross_entropy = 0.0;  // mean over the last epoch's steps
  double held_out_cross_entropy = 0.0;
  double held_out_baseline = 0.0;    // ln(mean legal-move count) of the held-out set
  int held_out_size = 0;
  int feature_count = 0;
  int features_added = 0;
  int p1_wins = 0;
  int draws = 0;
  int p2_wins = 0;
  std::size_t buffer_size = 0;
  std::int64_t search_calls = 0;
  double elapsed_ms = 0.0;
};

nlohmann::json iteration_report_to_json(const IterationReport& r);
std::string report_csv_header();
std::string report_csv_row(const IterationReport& r);

struct TrainResult {
  FeatureSet features;
  std::vector<IterationReport> report;
  std::vector<GameState> probe_set;
};

struct TrainHooks {
  // Called once per iteration with the snapshot the games were played with
  // and every sample they produced, before any weight update.
  std::function<void(int iteration, const FeatureSet& snapshot, std::span<const TrainSample>)>
      on_samples;
  std::function<void(const IterationReport&)> on_iteration;
};

// Expert iteration from atomic features. When `out_dir` is set, writes
// weights_NNNN.json per iteration plus report.csv and report.jsonl.
TrainResult expert_iteration(const TrainerConfig& cfg,
                             const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                             const TrainHooks& hooks = {});

// Non-terminal states reached by seeded uniform random play; deterministic.
std::vector<GameState> make_probe_set(const GameSpec& spec, int count, std::uint64_t seed);

// Fraction of `states` on which the System-1 partition is certain.
double certain_fraction(const FeatureSet& fs, const PartitionParams& params,
                        std::span<const GameState> states);

}  // namespace cogniplay
