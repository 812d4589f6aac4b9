#include "cogniplay/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cogniplay/rng.hpp"

namespace cogniplay {
namespace {

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

std::string checkpoint_name(int iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "weights_%04d.json", iteration);
  return buf;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error("invalid-config", "buffer capacity must be positive");
}

void ReplayBuffer::push(TrainSample sample) {
  if (items_.size() == capacity_) {
    items_.pop_front();
    ++evicted_;
  }
  items_.push_back(std::move(sample));
}

SelfPlayResult self_play_game(const FeatureSet& fs, const AgentConfig& cfg, const GameSpec& spec,
                              std::uint64_t seed, const SelfPlayOptions& options) {
  SelfPlayResult out;
  out.record.spec = spec;
  GameState state(spec);
  int ply = 0;
  while (!state.terminal()) {
    const std::uint64_t move_seed = derive_seed(seed, {static_cast<std::uint64_t>(ply)});
    DecideOptions opts;
    opts.sample_from_visits = ply < options.explore_plies;
    const Decision d = decide(state, fs, cfg, move_seed, opts, &out.search_calls);
    ++out.record.decision_points;
    if (!d.certain) {
      ++out.record.doubtful;
      out.samples.push_back(TrainSample{state, d.search->target, options.iteration});
    } else if (options.train_on_certain) {
      SearchConfig sc = cfg.search;
      sc.seed = derive_seed(cfg.search.seed, {move_seed});
      ++out.search_calls;
      out.samples.push_back(
          TrainSample{state, search(state, fs, sc, cfg.partition()).target, options.iteration});
    }
    out.record.moves.push_back(MoveRecord{d.action, state.to_move(), d.certain});
    state = state.apply(d.action);
    ++ply;
  }
  out.record.result = state.outcome();
  return out;
}

void TrainerConfig::validate() const {
  game.validate();
  agent.validate();
  if (iterations < 1 || games < 1) throw Error("invalid-config", "iterations and games must be >= 1");
  if (buffer_capacity < 1 || batch_size < 1 || epochs < 0) {
    throw Error("invalid-config", "buffer, batch and epochs must be positive");
  }
  if (growth_period < 1 || growth_count < 0 || growth_samples < 1) {
    throw Error("invalid-config", "bad growth schedule");
  }
  if (!(learning_rate > 0.0)) throw Error("invalid-config", "learning rate must be positive");
  if (!(held_out_fraction >= 0.0 && held_out_fraction < 1.0)) {
    throw Error("invalid-config", "held_out_fraction must lie in [0, 1)");
  }
  if (explore_plies < 0 || probe_states < 0) throw Error("invalid-config", "negative count");
}

TrainerConfig trainer_config_from_json(const nlohmann::json& j, TrainerConfig base) {
  TrainerConfig cfg = std::move(base);
  if (j.contains("game")) {
    cfg.game = j["game"].is_string() ? GameSpec::by_name(j["game"].get<std::string>())
                                     : spec_from_json(j["game"]);
  }
  if (j.contains("agent")) cfg.agent = agent_config_from_json(j["agent"]);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.games = j.value("games", cfg.games);
  cfg.buffer_capacity = j.value("buffer_capacity", cfg.buffer_capacity);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.growth_period = j.value("growth_period", cfg.growth_period);
  cfg.growth_count = j.value("growth_count", cfg.growth_count);
  cfg.growth_samples = j.value("growth_samples", cfg.growth_samples);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.held_out_fraction = j.value("held_out_fraction", cfg.held_out_fraction);
  cfg.explore_plies = j.value("explore_plies", cfg.explore_plies);
  cfg.probe_states = j.value("probe_states", cfg.probe_states);
  cfg.train_on_certain = j.value("train_on_certain", cfg.train_on_certain);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

nlohmann::json trainer_config_to_json(const TrainerConfig& cfg) {
  return nlohmann::json{{"game", spec_to_json(cfg.game)},
                        {"agent", agent_config_to_json(cfg.agent)},
                        {"iterations", cfg.iterations},
                        {"games", cfg.games},
                        {"buffer_capacity", cfg.buffer_capacity},
                        {"batch_size", cfg.batch_size},
                        {"epochs", cfg.epochs},
                        {"growth_period", cfg.growth_period},
                        {"growth_count", cfg.growth_count},
                        {"growth_samples", cfg.growth_samples},
                        {"learning_rate", cfg.learning_rate},
                        {"held_out_fraction", cfg.held_out_fraction},
                        {"explore_plies", cfg.explore_plies},
                        {"probe_states", cfg.probe_states},
                        {"train_on_certain", cfg.train_on_certain},
                        {"seed", cfg.seed}};
}

nlohmann::json iteration_report_to_json(const IterationReport& r) {
  return nlohmann::json{{"iteration", r.iteration},
                        {"games", r.games},
                        {"decision_points", r.decision_points},
                        {"samples", r.samples},
                        {"doubtful_fraction", r.doubtful_fraction},
                        {"certain_fraction", r.certain_fraction},
                        {"probe_certain_fraction", r.probe_certain_fraction},
                        {"train_cross_entropy", r.train_cross_entropy},
                        {"held_out_cross_entropy", r.held_out_cross_entropy},
                        {"held_out_baseline", r.held_out_baseline},
                        {"held_out_size", r.held_out_size},
                        {"feature_count", r.feature_count},
                        {"features_added", r.features_added},
                        {"p1_wins", r.p1_wins},
                        {"draws", r.draws},
                        {"p2_wins", r.p2_wins},
                        {"buffer_size", r.buffer_size},
                        {"search_calls", r.search_calls},
                        {"elapsed_ms", r.elapsed_ms}};
}

std::string report_csv_header() {
  return "iteration,games,decision_points,samples,doubtful_fraction,certain_fraction,"
         "probe_certain_fraction,train_cross_entropy,held_out_cross_entropy,held_out_baseline,"
         "held_out_size,feature_count,features_added,p1_wins,draws,p2_wins,buffer_size,"
         "search_calls,elapsed_ms";
}

std::string report_csv_row(const IterationReport& r) {
  std::ostringstream out;
  out.precision(10);
  out << r.iteration << ',' << r.games << ',' << r.decision_points << ',' << r.samples << ','
      << r.doubtful_fraction << ',' << r.certain_fraction << ',' << r.probe_certain_fraction << ','
      << r.train_cross_entropy << ',' << r.held_out_cross_entropy << ',' << r.held_out_baseline
      << ',' << r.held_out_size << ',' << r.feature_count << ',' << r.features_added << ','
      << r.p1_wins << ',' << r.draws << ',' << r.p2_wins << ',' << r.buffer_size << ','
      << r.search_calls << ',' << r.elapsed_ms;
  return out.str();
}

std::vector<GameState> make_probe_set(const GameSpec& spec, int count, std::uint64_t seed) {
  std::vector<GameState> out;
  Rng rng(derive_seed(seed, {0x9e0beULL}));
  while (static_cast<int>(out.size()) < count) {
    const auto plies = uniform_index(rng, static_cast<std::size_t>(spec.cells()));
    GameState s(spec);
    for (std::size_t i = 0; i < plies; ++i) {
      const auto legal = s.legal_actions();
      GameState next = s.apply(legal[uniform_index(rng, legal.size())]);
      if (next.terminal()) break;
      s = std::move(next);
    }
    out.push_back(std::move(s));
  }
  return out;
}

double certain_fraction(const FeatureSet& fs, const PartitionParams& params,
                        std::span<const GameState> states) {
  if (states.empty()) return 0.0;
  int certain = 0;
  for (const auto& s : states) certain += partition(policy(fs, s), params).certain;
  return static_cast<double>(certain) / static_cast<double>(states.size());
}

TrainResult expert_iteration(const TrainerConfig& cfg,
                             const std::optional<std::filesystem::path>& out_dir,
                             const TrainHooks& hooks) {
  cfg.validate();
  TrainResult result{FeatureSet::atomic(cfg.agent.radius, cfg.agent.max_features), {}, {}};
  FeatureSet& fs = result.features;
  result.probe_set = make_probe_set(cfg.game, cfg.probe_states, cfg.seed);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));

  std::ofstream csv;
  std::ofstream jsonl;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    csv.open(*out_dir / "report.csv", std::ios::trunc);
    jsonl.open(*out_dir / "report.jsonl", std::ios::trunc);
    if (!csv || !jsonl) throw Error("io-error", "cannot write report in " + out_dir->string());
    csv << report_csv_header() << '\n' << std::flush;
  }

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationReport row;
    row.iteration = iter;
    row.games = cfg.games;

    // Self-play against a frozen snapshot; each game owns its result slot.
    std::vector<SelfPlayResult> games(static_cast<std::size_t>(cfg.games));
    SelfPlayOptions options{cfg.explore_plies, cfg.train_on_certain, iter};
    kernels::for_each_index(games.size(), cfg.exec, [&](std::size_t g) {
      const auto seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(iter), g});
      games[g] = self_play_game(fs, cfg.agent, cfg.game, seed, options);
    });

    std::vector<TrainSample> fresh;
    for (auto& g : games) {
      row.decision_points += g.record.decision_points;
      row.samples += g.record.doubtful;
      row.search_calls += g.search_calls;
      if (g.record.result.value > 0) ++row.p1_wins;
      else if (g.record.result.value < 0) ++row.p2_wins;
      else ++row.draws;
      for (auto& s : g.samples) fresh.push_back(std::move(s));
    }
    row.doubtful_fraction =
        row.decision_points ? static_cast<double>(row.samples) / static_cast<double>(row.decision_points) : 0.0;
    row.certain_fraction = row.decision_points ? 1.0 - row.doubtful_fraction : 0.0;
    if (hooks.on_samples) hooks.on_samples(iter, fs, fresh);

    // Held-out split.
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(iter), 0x5917ULL}));
    shuffle(fresh, rng);
    const auto held = static_cast<std::size_t>(
        std::llround(cfg.held_out_fraction * static_cast<double>(fresh.size())));
    std::vector<TrainingExample> held_out;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      if (i < held) {
        held_out.push_back(TrainingExample{fresh[i].state, fresh[i].target});
      } else {
        buffer.push(std::move(fresh[i]));
      }
    }

    // Epochs over the buffer in shuffled minibatches.
    std::vector<std::size_t> order(buffer.size());
    std::vector<TrainingExample> batch;
    for (int epoch = 0; epoch < cfg.epochs && buffer.size() > 0; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      shuffle(order, rng);
      double ce_sum = 0.0;
      int steps = 0;
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
        batch.clear();
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
        for (std::size_t i = start; i < end; ++i) {
          const auto& s = buffer[order[i]];
          batch.push_back(TrainingExample{s.state, s.target});
        }
        ce_sum += grad_step(fs, batch, cfg.learning_rate);
        ++steps;
      }
      row.train_cross_entropy = ce_sum / steps;
    }

    if (iter % cfg.growth_period == 0 && cfg.growth_count > 0 && buffer.size() > 0) {
      std::vector<ErrorSample> errors;
      const std::size_t from =
          buffer.size() > static_cast<std::size_t>(cfg.growth_samples)
              ? buffer.size() - static_cast<std::size_t>(cfg.growth_samples)
              : 0;
      for (std::size_t i = from; i < buffer.size(); ++i) {
        errors.push_back(ErrorSample{buffer[i].state, buffer[i].target, policy(fs, buffer[i].state)});
      }
      row.features_added = static_cast<int>(grow_features(fs, errors, cfg.growth_count, iter).size());
    }

    if (!held_out.empty()) {
      const auto g = kernels::batch_gradient(fs, held_out, cfg.exec);
      row.held_out_cross_entropy = g.mean_cross_entropy;
      double legal = 0.0;
      for (const auto& ex : held_out) legal += static_cast<double>(ex.target.size());
      row.held_out_baseline = std::log(legal / static_cast<double>(held_out.size()));
    }
    row.held_out_size = static_cast<int>(held_out.size());
    row.feature_count = fs.size();
    row.buffer_size = buffer.size();
    row.probe_certain_fraction = certain_fraction(fs, cfg.agent.partition(), result.probe_set);
    row.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    if (out_dir) {
      save_feature_set(fs, *out_dir / checkpoint_name(iter));
      csv << report_csv_row(row) << '\n' << std::flush;
      jsonl << iteration_report_to_json(row).dump() << '\n' << std::flush;
    }
    if (hooks.on_iteration) hooks.on_iteration(row);
    result.report.push_back(row);
  }
  return result;
}

}  // namespace cogniplay
