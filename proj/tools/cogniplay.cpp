// Command-line entry point: train, play, serve, eval, bench.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cogniplay/agent.hpp"
#include "cogniplay/evaluation.hpp"
#include "cogniplay/service.hpp"
#include "cogniplay/trainer.hpp"

using namespace cogniplay;
namespace fs = std::filesystem;

namespace {

struct AgentOptions {
  std::string preset = "vanilla";
  std::string config;
  std::string weights;
  int iterations = 0;  // 0 keeps the config's budget
  int radius = 2;
};

void add_agent_options(CLI::App* cmd, AgentOptions& o) {
  cmd->add_option("--preset", o.preset, "Agent preset: vanilla or human");
  cmd->add_option("--config", o.config, "Agent config JSON (overrides --preset)");
  cmd->add_option("--weights", o.weights, "Weights checkpoint; untrained atomic features if omitted");
  cmd->add_option("--iterations", o.iterations, "Search budget B per decision");
}

std::shared_ptr<FeatureSet> load_features(const std::string& path, int radius) {
  if (path.empty()) return std::make_shared<FeatureSet>(FeatureSet::atomic(radius));
  return std::make_shared<FeatureSet>(load_feature_set(path));
}

std::unique_ptr<DualProcessAgent> make_agent(const AgentOptions& o) {
  AgentConfig cfg = o.config.empty() ? AgentConfig::from_preset(o.preset) : load_agent_config(o.config);
  if (o.iterations > 0) cfg.search.iterations = o.iterations;
  auto features = load_features(o.weights, cfg.radius);
  cfg.radius = features->radius();
  cfg.validate();
  return std::make_unique<DualProcessAgent>(cfg, features);
}

// "random", or an agent config JSON that may name its weights file with
// "weights" (relative to the config's directory).
std::unique_ptr<Agent> agent_from_file(const std::string& spec, int iterations) {
  if (spec == "random") return std::make_unique<RandomAgent>();
  std::ifstream in(spec);
  if (!in) throw Error("io-error", "cannot read " + spec);
  const auto j = nlohmann::json::parse(in);
  AgentOptions o;
  o.iterations = iterations;
  o.config = spec;
  if (j.contains("weights")) {
    fs::path w = j["weights"].get<std::string>();
    if (w.is_relative()) w = fs::path(spec).parent_path() / w;
    o.weights = w.string();
  }
  return make_agent(o);
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

int run_train(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
              std::optional<int> iterations, std::optional<int> games) {
  TrainerConfig cfg;
  if (!config.empty()) {
    std::ifstream in(config);
    if (!in) throw Error("io-error", "cannot read " + config);
    cfg = trainer_config_from_json(nlohmann::json::parse(in));
  }
  if (seed) cfg.seed = *seed;
  if (iterations) cfg.iterations = *iterations;
  if (games) cfg.games = *games;
  cfg.validate();
  TrainHooks hooks;
  hooks.on_iteration = [](const IterationReport& r) {
    std::cout << iteration_report_to_json(r).dump() << std::endl;
  };
  std::optional<fs::path> dir;
  if (!out.empty()) dir = out;
  expert_iteration(cfg, dir, hooks);
  return 0;
}

int run_play(const std::string& game, const AgentOptions& ao, const std::string& side,
             std::uint64_t seed) {
  const GameSpec spec = GameSpec::by_name(game);
  auto agent = make_agent(ao);
  const Player human = player_from_name(side);
  GameState s(spec);
  int ply = 0;
  while (!s.terminal()) {
    std::cout << render(s) << '\n';
    if (s.to_move() == human) {
      std::cout << "your move: " << std::flush;
      std::string text;
      if (!(std::cin >> text)) throw Error("io-error", "input closed before the game ended");
      try {
        const Action a = Action::parse(text);
        if (!s.is_legal(a)) throw Error("illegal-move", text);
        s = s.apply(a);
      } catch (const Error& e) {
        std::cout << e.what() << '\n';
        continue;
      }
    } else {
      const Decision d = agent->decide(s, derive_seed(seed, {static_cast<std::uint64_t>(ply)}));
      std::cout << "agent plays " << d.action.to_string() << (d.certain ? " (certain)" : "") << '\n';
      s = s.apply(d.action);
    }
    ++ply;
  }
  std::cout << render(s) << '\n';
  const int v = s.outcome().value;
  std::cout << (v == 0 ? "draw" : (v > 0) == (human == Player::P1) ? "you win" : "agent wins") << '\n';
  return 0;
}

HttpServer* g_server = nullptr;

int run_serve(const std::string& host, int port, const std::string& data_dir, const std::string& weights,
              int iterations, double time_limit_ms, std::uint64_t seed, const std::string& cors) {
  ServiceConfig cfg;
  cfg.data_dir = data_dir;
  if (!weights.empty()) {
    cfg.features = std::make_shared<FeatureSet>(load_feature_set(weights));
    cfg.weights_id = fs::path(weights).filename().string();
  }
  cfg.iterations = iterations;
  cfg.time_limit_ms = time_limit_ms;
  cfg.seed = seed;
  cfg.cors_origin = cors;
  GameService service(cfg);
  HttpServer server(service);
  const int bound = server.bind(host, port);
  std::cerr << "listening on " << host << ':' << bound << ", data in " << data_dir << std::endl;
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  server.listen();
  g_server = nullptr;
  return 0;
}

int run_movematch(const std::string& data, const AgentOptions& ao, const std::string& game,
                  const std::vector<int>& ks, std::uint64_t seed) {
  const auto dataset = load_move_dataset(data, GameSpec::by_name(game));
  for (const auto& d : dataset.diagnostics) std::cerr << "warning: " << d << '\n';
  auto agent = make_agent(ao);
  const auto report = move_match(dataset, agent_ranker(*agent, seed), ks);
  for (const auto& r : report.rejected) std::cerr << "warning: " << r << '\n';
  print_json(match_report_to_json(report));
  return 0;
}

int run_strength(const std::string& a, const std::string& b, const std::string& game, int games,
                 int iterations, std::uint64_t seed) {
  auto agent_a = agent_from_file(a, iterations);
  auto agent_b = agent_from_file(b, iterations);
  print_json(strength_report_to_json(strength_match(*agent_a, *agent_b, GameSpec::by_name(game), games, seed)));
  return 0;
}

int run_ratings(const std::string& store_dir) {
  if (!fs::exists(store_dir)) throw Error("io-error", "no store at " + store_dir);
  const SessionStore store(store_dir);
  std::vector<RatingRecord> ratings;
  std::map<std::string, Source> truth;
  for (const auto& r : store.all()) {
    truth[r.id] = r.participant == Participant::Human ? Source::Human : Source::Agent;
    ratings.insert(ratings.end(), r.ratings.begin(), r.ratings.end());
  }
  print_json(ratings_report_to_json(aggregate_ratings(ratings, truth)));
  return 0;
}

// Self-play with the agent on both sides; one JSON line per search.
int run_bench(const std::string& game, const AgentOptions& ao, int games, std::uint64_t seed) {
  const GameSpec spec = GameSpec::by_name(game);
  auto agent = make_agent(ao);
  for (int g = 0; g < games; ++g) {
    GameState s(spec);
    int ply = 0;
    while (!s.terminal()) {
      const Decision d = agent->decide(
          s, derive_seed(seed, {static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(ply)}));
      if (d.search) {
        const auto& st = d.search->stats;
        std::cout << nlohmann::json{{"game", g},
                                    {"ply", ply},
                                    {"iterations", st.iterations},
                                    {"expanded", st.expanded},
                                    {"recycled", st.recycled},
                                    {"max_depth", st.max_depth_reached},
                                    {"peak_live", st.peak_live},
                                    {"elapsed_ms", st.elapsed_ms}}
                         .dump()
                  << '\n';
      }
      s = s.apply(d.action);
      ++ply;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cogniplay: dual-process game agent"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Expert iteration from atomic features");
  std::string train_config, train_out;
  std::optional<std::uint64_t> train_seed;
  std::optional<int> train_iterations, train_games;
  train->add_option("--config", train_config, "Trainer config JSON");
  train->add_option("--out", train_out, "Directory for checkpoints and reports");
  train->add_option("--seed", train_seed, "Seed");
  train->add_option("--iterations", train_iterations, "Override I");
  train->add_option("--games", train_games, "Override G");

  auto* play = app.add_subcommand("play", "Play against the agent in the terminal");
  std::string play_game = "ttt", play_side = "P1";
  std::uint64_t play_seed = 0;
  AgentOptions play_agent;
  play->add_option("--game", play_game, "ttt, gomoku or renju");
  play->add_option("--side", play_side, "Your side: P1 or P2");
  play->add_option("--seed", play_seed, "Seed");
  add_agent_options(play, play_agent);

  auto* serve = app.add_subcommand("serve", "HTTP/JSON game service");
  std::string serve_host = env_or("COGNIPLAY_HOST", "127.0.0.1");
  int serve_port = std::atoi(env_or("COGNIPLAY_PORT", "8080").c_str());
  std::string serve_data = env_or("COGNIPLAY_DATA_DIR", "data");
  std::string serve_weights = env_or("COGNIPLAY_WEIGHTS", "");
  std::string serve_cors = env_or("COGNIPLAY_CORS_ORIGIN", "*");
  int serve_iterations = 2000;
  double serve_time_limit = 1500.0;
  std::uint64_t serve_seed = 0;
  serve->add_option("--host", serve_host, "Bind address (COGNIPLAY_HOST)");
  serve->add_option("--port", serve_port, "Port, 0 for any (COGNIPLAY_PORT)");
  serve->add_option("--data-dir", serve_data, "Session store directory (COGNIPLAY_DATA_DIR)");
  serve->add_option("--weights", serve_weights, "Weights checkpoint (COGNIPLAY_WEIGHTS)");
  serve->add_option("--iterations", serve_iterations, "Agent search budget per reply");
  serve->add_option("--time-limit-ms", serve_time_limit, "Soft time cap per reply, 0 = off");
  serve->add_option("--seed", serve_seed, "Seed");
  serve->add_option("--cors-origin", serve_cors, "Allowed CORS origin (COGNIPLAY_CORS_ORIGIN)");

  auto* eval = app.add_subcommand("eval", "Evaluation reports");
  eval->require_subcommand(1);
  auto* movematch = eval->add_subcommand("movematch", "Move-matching accuracy and ceiling");
  std::string mm_data, mm_game = "ttt";
  std::vector<int> mm_k{1, 3, 5};
  std::uint64_t mm_seed = 0;
  AgentOptions mm_agent;
  movematch->add_option("--data", mm_data, "JSONL dataset")->required();
  movematch->add_option("--game", mm_game, "Game for entries without a spec");
  movematch->add_option("--k", mm_k, "Top-k cut-offs")->delimiter(',');
  movematch->add_option("--seed", mm_seed, "Seed");
  add_agent_options(movematch, mm_agent);

  auto* strength = eval->add_subcommand("strength", "Colour-balanced match between two agents");
  std::string st_a, st_b, st_game = "ttt";
  int st_games = 100, st_iterations = 0;
  std::uint64_t st_seed = 0;
  strength->add_option("--a", st_a, "Agent A config JSON or \"random\"")->required();
  strength->add_option("--b", st_b, "Agent B config JSON or \"random\"")->required();
  strength->add_option("--game", st_game, "ttt, gomoku or renju");
  strength->add_option("--games", st_games, "Number of games, even");
  strength->add_option("--iterations", st_iterations, "Override both search budgets");
  strength->add_option("--seed", st_seed, "Seed");

  auto* ratings = eval->add_subcommand("ratings", "Aggregate blind-review ratings");
  std::string rt_store = "data";
  ratings->add_option("--store", rt_store, "Session store directory");

  auto* bench = app.add_subcommand("bench", "Per-search statistics as JSON lines");
  std::string bench_game = "gomoku";
  int bench_games = 1;
  std::uint64_t bench_seed = 0;
  AgentOptions bench_agent;
  bench->add_option("--game", bench_game, "ttt, gomoku or renju");
  bench->add_option("--games", bench_games, "Self-play games");
  bench->add_option("--seed", bench_seed, "Seed");
  add_agent_options(bench, bench_agent);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // Usage of the deepest subcommand that was reached.
    const CLI::App* at = &app;
    while (!at->get_subcommands().empty()) at = at->get_subcommands().front();
    std::cerr << e.what() << "\n\n" << at->help();
    return 2;
  }

  try {
    if (*train) return run_train(train_config, train_out, train_seed, train_iterations, train_games);
    if (*play) return run_play(play_game, play_agent, play_side, play_seed);
    if (*serve) {
      return run_serve(serve_host, serve_port, serve_data, serve_weights, serve_iterations,
                       serve_time_limit, serve_seed, serve_cors);
    }
    if (*movematch) return run_movematch(mm_data, mm_agent, mm_game, mm_k, mm_seed);
    if (*strength) return run_strength(st_a, st_b, st_game, st_games, st_iterations, st_seed);
    if (*ratings) return run_ratings(rt_store);
    if (*bench) return run_bench(bench_game, bench_agent, bench_games, bench_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
