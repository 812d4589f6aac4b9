// Acceptance suite: one PASS/FAIL line per criterion. Arguments select
// criteria by name; no arguments runs all of them. Exit status is the number
// of failed criteria (capped at 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cogniplay/agent.hpp"
#include "cogniplay/evaluation.hpp"
#include "cogniplay/search.hpp"
#include "cogniplay/trainer.hpp"
#include "support/fixtures.hpp"
#include "support/gradient_oracle.hpp"

using namespace cogniplay;
namespace fs = std::filesystem;

namespace {

// Budgets the criteria leave open, chosen for runtime on one core.
constexpr int kTrainSearchBudget = 1000;   // B during self-play training
constexpr int kTrainGrowthCount = 32;     // M, the library default
constexpr std::uint64_t kTrainSeed = 1;
constexpr int kNeverLoseBudget = 2000;     // B of the trained agent in the match
constexpr int kStrengthBudget = 5000;      // B of both Gomoku agents, well above the 225 root moves
constexpr int kHumanDepthBudget = 2000;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// The TTT training run shared by several criteria: I=10, G=100.
struct Training {
  std::optional<TrainResult> result;
  std::int64_t samples = 0;
  std::int64_t certain_samples = 0;
  double seconds = 0.0;
};

const Training& training() {
  static const Training t = [] {
    Training out;
    TrainerConfig cfg;
    cfg.iterations = 10;
    cfg.games = 100;
    cfg.agent.search.iterations = kTrainSearchBudget;
    cfg.growth_count = kTrainGrowthCount;
    cfg.seed = kTrainSeed;
    TrainHooks hooks;
    hooks.on_samples = [&](int, const FeatureSet& snapshot, std::span<const TrainSample> samples) {
      for (const auto& s : samples) {
        ++out.samples;
        out.certain_samples += partition(policy(snapshot, s.state), cfg.agent.partition()).certain;
      }
    };
    const auto t0 = std::chrono::steady_clock::now();
    out.result = expert_iteration(cfg, std::nullopt, hooks);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }();
  return t;
}

std::shared_ptr<FeatureSet> trained_features() {
  return std::make_shared<FeatureSet>(training().result->features);
}

Verdict oracle_tactics() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto positions = fixtures::oracle::one_move_to_win_positions();
  AgentConfig cfg = AgentConfig::from_preset("vanilla");
  cfg.search.iterations = 20000;
  cfg.search.node_cap = std::max(cfg.search.node_cap, 6000);
  const auto features = std::make_shared<FeatureSet>(FeatureSet::atomic(cfg.radius));
  DualProcessAgent agent(cfg, features);
  int solved = 0;
  std::string missed;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const GameState s = fixtures::oracle::to_state(positions[i].board);
    const Action want = Action::from_index(positions[i].winning_cell, 3);
    const Decision d = agent.decide(s, derive_seed(7, {i}));
    if (d.action == want) ++solved;
    else missed += " " + want.to_string();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = positions.size() == 24 && solved == 24 && secs < 60.0;
  return {pass, fmt("%d/%zu winning moves, %.1fs (B=20000, C=%d)%s", solved, positions.size(), secs,
                    cfg.search.node_cap, missed.empty() ? "" : (" missed:" + missed).c_str())};
}

Verdict never_lose() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto features = trained_features();
  AgentConfig cfg = AgentConfig::from_preset("vanilla");
  cfg.search.iterations = kNeverLoseBudget;
  DualProcessAgent agent(cfg, features);
  RandomAgent random;
  const auto r = strength_match(agent, random, GameSpec::tic_tac_toe(), 200, 42);
  const double secs = training().seconds +
                      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {r.wins_b == 0 && secs < 600.0,
          fmt("W/D/L %d/%d/%d vs uniform random over 200 games, %.0fs incl. training (train B=%d, play B=%d)",
              r.wins_a, r.draws, r.wins_b, secs, kTrainSearchBudget, kNeverLoseBudget)};
}

Verdict memory_bound() {
  // Hard bound: live nodes observed after every allocation.
  SearchConfig cfg = SearchConfig::vanilla();
  cfg.node_cap = 2000;
  cfg.iterations = 50000;
  cfg.time_limit_ms = 0;
  const FeatureSet features = FeatureSet::atomic(2);
  Rng rng(5);
  const GameState root = fixtures::random_state(GameSpec::gomoku(), 12, rng);
  Searcher searcher(cfg);
  int worst = 0;
  searcher.set_allocation_observer([&](const NodePool& pool) { worst = std::max(worst, pool.live()); });
  const auto res = searcher.run(root, features);
  const bool bound_ok = worst <= 2000 && res.stats.peak_live <= 2000 && res.stats.iterations == 50000;

  // Strength cost of the bound: ample memory must not lose to a tight one.
  const auto fs = std::make_shared<FeatureSet>(FeatureSet::atomic(2));
  AgentConfig big = AgentConfig::from_preset("vanilla");
  big.search.iterations = kStrengthBudget;
  big.search.time_limit_ms = 0;
  big.search.node_cap = 100000;
  AgentConfig small = big;
  small.search.node_cap = 200;
  DualProcessAgent a(big, fs);
  DualProcessAgent b(small, fs);
  const auto r = strength_match(a, b, GameSpec::gomoku(), 200, 11);
  const double score = (r.wins_a + 0.5 * r.draws) / r.games;
  return {bound_ok && score >= 0.5,
          fmt("peak live %d of 2000 over %d iterations (%lld recycled); C=100000 vs C=200 at B=%d scored "
              "%.3f (W/D/L %d/%d/%d)",
              worst, res.stats.iterations, static_cast<long long>(res.stats.recycled), kStrengthBudget,
              score, r.wins_a, r.draws, r.wins_b)};
}

Verdict bypass() {
  const auto features = trained_features();
  AgentConfig cfg = AgentConfig::from_preset("vanilla");
  cfg.search.iterations = 200;
  DualProcessAgent agent(cfg, features);
  Rng rng(2024);
  int certain = 0;
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    GameState s(GameSpec::tic_tac_toe());
    do {
      s = fixtures::random_state(GameSpec::tic_tac_toe(), static_cast<int>(rng() % 8), rng);
    } while (s.terminal());
    const bool sure = partition(policy(*features, s), cfg.partition()).certain;
    const auto before = agent.search_calls();
    const Decision d = agent.decide(s, rng());
    const auto calls = agent.search_calls() - before;
    certain += sure;
    if (sure && (calls != 0 || d.search || !d.certain)) ++violations;
    if (!sure && calls != 1) ++violations;
  }
  const auto& t = training();
  return {violations == 0 && certain > 0 && t.certain_samples == 0 && t.samples > 0,
          fmt("%d certain of 1000 decision points, %d with a search call; %lld of %lld training samples "
              "from certain states",
              certain, violations, static_cast<long long>(t.certain_samples),
              static_cast<long long>(t.samples))};
}

Verdict learning_signal() {
  const auto& report = training().result->report;
  const auto& last = report.back();
  const double ratio = last.held_out_cross_entropy / last.held_out_baseline;
  const bool pass = ratio <= 0.8 && last.probe_certain_fraction > report.front().probe_certain_fraction;
  return {pass, fmt("held-out CE %.4f vs baseline %.4f (ratio %.3f, need <= 0.8); probe certain %.3f -> %.3f",
                    last.held_out_cross_entropy, last.held_out_baseline, ratio,
                    report.front().probe_certain_fraction, last.probe_certain_fraction)};
}

Verdict gradient() {
  Rng rng(4242);
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    FeatureSet fs = fixtures::random_weights(trial % 2 ? 1 : 2, rng, 1.0);
    const GameSpec spec = trial % 4 == 0 ? GameSpec::gomoku() : GameSpec::tic_tac_toe();
    const auto s = fixtures::random_state(spec, static_cast<int>(rng() % 6), rng);
    const TrainingExample ex{s, fixtures::random_target(s, rng)};
    const auto analytic = kernels::batch_gradient(fs, std::span(&ex, 1), kernels::Exec::Parallel);
    for (int id = 0; id < fs.size(); ++id) {
      const double w = fs[id].weight;
      fs.set_weight(id, w + h);
      const double up = fixtures::loss_of(fs, ex);
      fs.set_weight(id, w - h);
      const double down = fixtures::loss_of(fs, ex);
      fs.set_weight(id, w);
      const double numeric = (up - down) / ((w + h) - (w - h));
      const double a = analytic.gradient[static_cast<std::size_t>(id)];
      worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4}));
    }
  }
  return {worst < 1e-6, fmt("worst relative error %.2e over 100 cases (h=1e-5)", worst)};
}

Verdict ceiling() {
  auto entry = [](const std::string& moves, const std::string& played) {
    return MoveEntry{fixtures::ttt(moves), Action::parse(played), std::nullopt};
  };
  MoveDataset fixture;
  fixture.entries = {entry("b2", "a1"), entry("b2", "a1"), entry("b2", "a2"), entry("a1", "b2")};
  MoveDataset unique;
  unique.entries = {entry("", "b2"), entry("b2", "a1"), entry("b2 a1", "c3"), entry("a1", "b2")};
  const double c = self_consistency_ceiling(fixture);
  const double u = self_consistency_ceiling(unique);
  return {c == 0.75 && u == 1.0, fmt("fixture %.17g, all-unique %.17g", c, u)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  std::vector<std::string> broken;

  // Search: two fresh searchers and one reused searcher.
  FeatureSet weighted = FeatureSet::atomic(2);
  Rng wr(8);
  for (int id = 0; id < weighted.size(); ++id) weighted.set_weight(id, uniform01(wr) - 0.5);
  Rng sr(3);
  const GameState root = fixtures::random_state(GameSpec::gomoku(), 9, sr);
  SearchConfig sc = SearchConfig::human();
  sc.iterations = 300;
  sc.time_limit_ms = 0;
  sc.seed = 77;
  Searcher s1(sc);
  Searcher s2(sc);
  const auto r1 = s1.run(root, weighted);
  const auto r2 = s2.run(root, weighted);
  const auto r3 = s1.run(root, weighted);
  if (!r1.same_outcome(r2) || !r1.same_outcome(r3)) broken.push_back("search");

  // Training checkpoints, byte for byte.
  TrainerConfig tc;
  tc.iterations = 3;
  tc.games = 12;
  tc.agent.search.iterations = 200;
  tc.growth_period = 1;
  tc.seed = 5;
  const fs::path base = fs::temp_directory_path() / "cogniplay_acceptance_determinism";
  fs::remove_all(base);
  expert_iteration(tc, base / "a");
  expert_iteration(tc, base / "b");
  for (int i = 1; i <= tc.iterations; ++i) {
    const std::string name = fmt("weights_%04d.json", i);
    const auto a = read_file(base / "a" / name);
    if (a.empty() || a != read_file(base / "b" / name)) broken.push_back(name);
  }
  fs::remove_all(base);

  // Strength tallies.
  const auto features = std::make_shared<FeatureSet>(weighted);
  AgentConfig ac = AgentConfig::from_preset("vanilla");
  ac.search.iterations = 100;
  DualProcessAgent x(ac, features);
  RandomAgent y;
  const auto m1 = strength_match(x, y, GameSpec::tic_tac_toe(), 40, 9);
  const auto m2 = strength_match(x, y, GameSpec::tic_tac_toe(), 40, 9);
  if (strength_report_to_json(m1) != strength_report_to_json(m2)) broken.push_back("strength");

  std::string which;
  for (const auto& b : broken) which += " " + b;
  return {broken.empty(), broken.empty() ? "search results, 3 checkpoints and match tallies reproduced"
                                         : "differs:" + which};
}

Verdict human_depth() {
  AgentConfig cfg = AgentConfig::from_preset("human");
  cfg.search.iterations = kHumanDepthBudget;
  const auto features = std::make_shared<FeatureSet>(FeatureSet::atomic(cfg.radius));
  DualProcessAgent agent(cfg, features);
  RandomAgent random;
  const auto r = strength_match(agent, random, GameSpec::gomoku(), 100, 31);
  const int d = *cfg.search.depth_cap;
  return {d == 5 && r.max_depth_reached <= 5 && r.searches > 0,
          fmt("max depth %d over %lld searches in 100 Gomoku games (D=%d, B=%d)", r.max_depth_reached,
              static_cast<long long>(r.searches), d, kHumanDepthBudget)};
}

struct Criterion {
  const char* name;
  Verdict (*run)();
};

constexpr Criterion kCriteria[] = {
    {"oracle-tactics", oracle_tactics}, {"never-lose", never_lose},
    {"memory-bound", memory_bound},     {"bypass", bypass},
    {"learning-signal", learning_signal}, {"gradient", gradient},
    {"ceiling", ceiling},               {"determinism", determinism},
    {"human-depth", human_depth},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : kCriteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) continue;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
