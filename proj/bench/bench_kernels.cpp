// Serial vs OpenMP timings for the parallel kernels. Each row also checks that
// both modes produced identical results.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "cogniplay/evaluation.hpp"
#include "cogniplay/kernels.hpp"
#include "cogniplay/trainer.hpp"

using namespace cogniplay;

namespace {

double millis(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial_ms, double parallel_ms, bool same) {
  std::printf("%-22s %10.1f %10.1f %8.2fx  %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, same ? "identical" : "MISMATCH");
}

std::vector<TrainingExample> random_batch(const FeatureSet& fs, const GameSpec& spec, int n,
                                          std::uint64_t seed) {
  std::vector<TrainingExample> batch;
  const auto states = make_probe_set(spec, n, seed);
  Rng rng(seed);
  for (const auto& s : states) {
    PolicyDist t = policy(fs, s);
    double sum = 0.0;
    for (auto& p : t.probs) sum += p = uniform01(rng);
    for (auto& p : t.probs) p /= sum;
    batch.push_back({s, t});
  }
  return batch;
}

}  // namespace

int main(int argc, char** argv) {
  const int scale = argc > 1 ? std::atoi(argv[1]) : 1;
  std::printf("threads: %d\n", kernels::max_threads());
  std::printf("%-22s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  {
    FeatureSet fs = FeatureSet::atomic(2);
    Rng rng(3);
    for (int id = 0; id < fs.size(); ++id) fs.set_weight(id, uniform01(rng) - 0.5);
    const auto batch = random_batch(fs, GameSpec::gomoku(), 256 * scale, 5);
    BatchGradient ref, s, p;
    const double ref_ms = millis([&] { ref = batch_gradient_serial(fs, batch); });
    const double s_ms = millis([&] { s = kernels::batch_gradient(fs, batch, kernels::Exec::Serial); });
    const double p_ms = millis([&] { p = kernels::batch_gradient(fs, batch, kernels::Exec::Parallel); });
    row("batch_gradient", s_ms, p_ms, s.gradient == p.gradient);
    std::printf("%-22s %10.1f\n", "  textbook reference", ref_ms);
  }
  {
    const FeatureSet fs = FeatureSet::atomic(2);
    AgentConfig cfg;
    cfg.search.iterations = 200;
    const int games = 16 * scale;
    std::vector<SelfPlayResult> serial(games), parallel(games);
    auto run = [&](std::vector<SelfPlayResult>& out, kernels::Exec exec) {
      kernels::for_each_index(out.size(), exec, [&](std::size_t g) {
        out[g] = self_play_game(fs, cfg, GameSpec::tic_tac_toe(), derive_seed(9, {g}));
      });
    };
    const double s_ms = millis([&] { run(serial, kernels::Exec::Serial); });
    const double p_ms = millis([&] { run(parallel, kernels::Exec::Parallel); });
    bool same = true;
    for (int g = 0; g < games; ++g) {
      const auto& a = serial[g].record.moves;
      const auto& b = parallel[g].record.moves;
      same = same && a.size() == b.size();
      for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].action == b[i].action;
    }
    row("self-play games", s_ms, p_ms, same);
  }
  {
    auto fs = std::make_shared<FeatureSet>(FeatureSet::atomic(2));
    AgentConfig cfg = AgentConfig::from_preset("vanilla");
    cfg.search.iterations = 200;
    DualProcessAgent a(cfg, fs);
    RandomAgent b;
    StrengthReport s, p;
    const int games = 8 * scale;
    const double s_ms = millis([&] { s = strength_match(a, b, GameSpec::gomoku(), games, 7, kernels::Exec::Serial); });
    const double p_ms = millis([&] { p = strength_match(a, b, GameSpec::gomoku(), games, 7, kernels::Exec::Parallel); });
    row("strength games", s_ms, p_ms,
        s.wins_a == p.wins_a && s.draws == p.draws && s.wins_b == p.wins_b && s.searches == p.searches);
  }
  return 0;
}
