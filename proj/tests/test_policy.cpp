#include <doctest.h>

#include <cmath>

#include "cogniplay/kernels.hpp"
#include "cogniplay/policy.hpp"
#include "support/fixtures.hpp"
#include "support/gradient_oracle.hpp"

using namespace cogniplay;
using fixtures::loss_of;
using fixtures::random_target;
using fixtures::random_weights;

namespace {

PolicyDist make_dist(std::vector<Action> actions, std::vector<double> probs) {
  return PolicyDist{std::move(actions), std::move(probs)};
}

std::vector<Action> first_actions(int n) {
  std::vector<Action> out;
  for (int i = 0; i < n; ++i) out.push_back(Action::from_index(i, 3));
  return out;
}

}  // namespace

TEST_CASE("policy is uniform with zero weights and rejects terminal states") {
  const auto fs = FeatureSet::atomic(2);
  const auto p = policy(fs, GameState(GameSpec::tic_tac_toe()));
  REQUIRE(p.size() == 9);
  for (double q : p.probs) CHECK(q == 1.0 / 9.0);
  CHECK_THROWS_AS(policy(fs, fixtures::ttt("a1 a2 b1 b2 c1")), Error);
}

TEST_CASE("softmax of two scores") {
  const auto probs = softmax(std::vector<double>{10.0, 0.0});
  // e^10 / (e^10 + 1) and 1 / (e^10 + 1).
  CHECK(probs[0] == doctest::Approx(0.9999546021312976).epsilon(1e-12));
  CHECK(probs[1] == doctest::Approx(4.5397868702434395e-05).epsilon(1e-9));
  const auto big = softmax(std::vector<double>{1000.0, 999.0, -1000.0});
  CHECK(std::isfinite(big[0]));
  CHECK(big[0] + big[1] + big[2] == doctest::Approx(1.0));
}

TEST_CASE("bias shift leaves the policy unchanged") {
  Rng rng(4);
  FeatureSet fs = random_weights(2, rng, 2.0);
  const auto s = fixtures::random_state(GameSpec::gomoku(), 12, rng);
  const auto before = policy(fs, s);
  fs.add_to_weight(0, 3.75);
  const auto after = policy(fs, s);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(after.probs[i] == doctest::Approx(before.probs[i]).epsilon(1e-12));
  }
}

TEST_CASE("policy normalizes and stays positive") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    FeatureSet fs = random_weights(2, rng, 20.0);
    const auto s = fixtures::random_state(GameSpec::gomoku(), static_cast<int>(rng() % 40), rng);
    const auto p = policy(fs, s);
    double total = 0.0;
    for (double q : p.probs) {
      CHECK(q > 0.0);
      total += q;
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);
    CHECK(p.actions == s.legal_actions());
  }
}

TEST_CASE("partition examples") {
  const auto uniform = make_dist(first_actions(9), std::vector<double>(9, 1.0 / 9.0));
  const auto u = partition(uniform, 0.1, 7);
  CHECK(u.good.size() == 7);
  CHECK_FALSE(u.certain);
  // Ties resolve to the lowest row-major index.
  CHECK(u.good == std::vector<Action>(first_actions(7)));

  const auto sharp = make_dist(first_actions(2), {0.9999546021312976, 4.5397868702434395e-05});
  const auto s = partition(sharp, 0.1, 7);
  CHECK(s.certain);
  CHECK(s.good == std::vector<Action>{Action::from_index(0, 3)});

  const auto single = make_dist({Action::parse("b2")}, {1.0});
  const auto one = partition(single, 0.1, 7);
  CHECK(one.certain);
  CHECK(one.good.front() == Action::parse("b2"));

  // Ranked best first, threshold applied relative to the best.
  const auto mixed = make_dist(first_actions(4), {0.1, 0.5, 0.04, 0.36});
  const auto m = partition(mixed, 0.1, 7);
  CHECK(m.good == std::vector<Action>{Action::from_index(1, 3), Action::from_index(3, 3),
                                      Action::from_index(0, 3)});
  CHECK_THROWS_AS(partition(mixed, 0.0, 7), Error);
  CHECK_THROWS_AS(partition(mixed, 0.5, 0), Error);
}

TEST_CASE("partition invariants on random distributions") {
  Rng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    std::vector<double> scores;
    for (int i = 0; i < n; ++i) scores.push_back(8.0 * (uniform01(rng) - 0.5));
    PolicyDist p;
    for (int i = 0; i < n; ++i) p.actions.push_back(Action::from_index(i, 5));
    p.probs = softmax(scores);
    const double tau = 0.01 + 0.99 * uniform01(rng);
    const int k = 1 + static_cast<int>(rng() % 8);
    const auto part = partition(p, tau, k);
    CHECK_FALSE(part.good.empty());
    CHECK(static_cast<int>(part.good.size()) <= k);
    CHECK(part.good.front() == p.actions[p.argmax()]);
    CHECK(part.certain == (part.good.size() == 1));
    for (const auto& a : part.good) CHECK(p.prob(a) >= tau * p.probs[p.argmax()]);
  }
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(99);
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    FeatureSet fs = random_weights(trial % 2 ? 1 : 2, rng, 1.0);
    const auto& spec = trial % 4 == 0 ? GameSpec::gomoku() : GameSpec::tic_tac_toe();
    const auto s = fixtures::random_state(spec, static_cast<int>(rng() % 6), rng);
    const TrainingExample ex{s, random_target(s, rng)};
    const auto analytic = batch_gradient_serial(fs, std::span(&ex, 1));
    CHECK(analytic.mean_cross_entropy == doctest::Approx(loss_of(fs, ex)).epsilon(1e-12));
    for (int id = 0; id < fs.size(); ++id) {
      const double w = fs[id].weight;
      fs.set_weight(id, w + h);
      const double up = loss_of(fs, ex);
      fs.set_weight(id, w - h);
      const double down = loss_of(fs, ex);
      fs.set_weight(id, w);
      const double numeric = (up - down) / ((w + h) - (w - h));
      const double a = analytic.gradient[static_cast<std::size_t>(id)];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4});
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("parallel gradient kernel equals the serial reference") {
  Rng rng(5);
  FeatureSet fs = random_weights(2, rng, 1.0);
  std::vector<TrainingExample> batch;
  for (int i = 0; i < 40; ++i) {
    const auto s = fixtures::random_state(GameSpec::tic_tac_toe(), static_cast<int>(rng() % 7), rng);
    batch.push_back({s, random_target(s, rng)});
  }
  const auto serial = batch_gradient_serial(fs, batch);
  const auto kernel_serial = kernels::batch_gradient(fs, batch, kernels::Exec::Serial);
  const auto kernel_parallel = kernels::batch_gradient(fs, batch, kernels::Exec::Parallel);
  CHECK(kernel_serial.gradient == kernel_parallel.gradient);
  CHECK(kernel_serial.mean_cross_entropy == kernel_parallel.mean_cross_entropy);
  for (std::size_t i = 0; i < serial.gradient.size(); ++i) {
    CHECK(kernel_parallel.gradient[i] == doctest::Approx(serial.gradient[i]).epsilon(1e-12));
  }
  CHECK(kernel_parallel.mean_cross_entropy == doctest::Approx(serial.mean_cross_entropy));
}

TEST_CASE("grad_step behaviour") {
  Rng rng(17);
  SUBCASE("target equal to the policy is a fixed point") {
    FeatureSet fs = random_weights(2, rng, 1.0);
    const auto s = fixtures::random_state(GameSpec::tic_tac_toe(), 3, rng);
    const TrainingExample ex{s, policy(fs, s)};
    const auto g = batch_gradient_serial(fs, std::span(&ex, 1));
    for (double v : g.gradient) CHECK(std::abs(v) < 1e-15);
  }
  SUBCASE("one-hot target raises that action's probability") {
    FeatureSet fs = FeatureSet::atomic(2);
    const auto s = fixtures::ttt("b2 a1");
    PolicyDist target;
    target.actions = s.legal_actions();
    target.probs.assign(target.actions.size(), 0.0);
    const Action wanted = Action::parse("c3");
    target.probs[static_cast<std::size_t>(
        std::find(target.actions.begin(), target.actions.end(), wanted) - target.actions.begin())] = 1.0;
    const double before = policy(fs, s).prob(wanted);
    const TrainingExample ex{s, target};
    grad_step(fs, std::span(&ex, 1), 0.05);
    CHECK(policy(fs, s).prob(wanted) > before);
  }
  SUBCASE("cross-entropy never increases over 100 steps on a fixed batch") {
    FeatureSet fs = FeatureSet::atomic(2);
    std::vector<TrainingExample> batch;
    for (int i = 0; i < 32; ++i) {
      const auto s = fixtures::random_state(GameSpec::tic_tac_toe(), static_cast<int>(rng() % 7), rng);
      batch.push_back({s, random_target(s, rng)});
    }
    double previous = grad_step(fs, batch, 0.05);
    for (int step = 1; step < 100; ++step) {
      const double now = grad_step(fs, batch, 0.05);
      CHECK(now <= previous + 1e-12);
      previous = now;
    }
  }
  SUBCASE("mismatched action sets are rejected") {
    FeatureSet fs = FeatureSet::atomic(2);
    const auto s = fixtures::ttt("b2");
    const TrainingExample ex{s, policy(fs, GameState(GameSpec::tic_tac_toe()))};
    try {
      grad_step(fs, std::span(&ex, 1), 0.05);
      FAIL("expected target-mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == "target-mismatch");
    }
  }
}

TEST_CASE("feature growth") {
  Rng rng(31);
  FeatureSet fs = FeatureSet::atomic(2, 2000);
  std::vector<ErrorSample> samples;
  std::vector<GameState> probes;
  for (int i = 0; i < 40; ++i) {
    const auto s = fixtures::random_state(GameSpec::gomoku(), 4 + static_cast<int>(rng() % 20), rng);
    samples.push_back({s, random_target(s, rng), policy(fs, s)});
    probes.push_back(s);
  }
  for (int id = 0; id < fs.size(); ++id) fs.set_weight(id, uniform01(rng) - 0.5);
  std::vector<PolicyDist> before;
  for (const auto& s : probes) before.push_back(policy(fs, s));

  const int size_before = fs.size();
  const auto added = grow_features(fs, samples, 32, 1);
  CHECK(added.size() == 32);
  CHECK(fs.size() == size_before + 32);
  for (int id : added) {
    CHECK(fs[id].weight == 0.0);
    CHECK(fs[id].generation == 1);
    CHECK(fs[id].constraints.size() >= 2);
    REQUIRE(fs[id].parents);
  }
  for (std::size_t i = 0; i < probes.size(); ++i) CHECK(policy(fs, probes[i]) == before[i]);

  // A second round never duplicates an existing conjunction.
  const auto again = grow_features(fs, samples, 32, 2);
  for (int id : again) {
    for (int other = 0; other < id; ++other) {
      CHECK(orbit_key(fs[other].constraints) != orbit_key(fs[id].constraints));
    }
  }

  // Capacity is respected.
  FeatureSet small = FeatureSet::atomic(2, 80);
  const auto few = grow_features(small, samples, 32, 1);
  CHECK(few.size() == 7);
  CHECK(small.size() == 80);
}

TEST_CASE("grown conjunctions are active where their parents co-occurred") {
  // Friend and Foe at the same offset both match at a1 through different
  // symmetry variants; the child combines the images as they matched.
  FeatureSet fs(2, 100);
  const auto f = *fs.insert({Constraint{1, 0, Relation::Friend}}, 0);
  const auto g = *fs.insert({Constraint{1, 0, Relation::Foe}}, 0);
  const auto s = fixtures::ttt("b1 a2");  // X to move: friend right of a1, foe above
  const Pattern p = fs.pattern(s, Action::parse("a1"));
  REQUIRE(fs.active(f, p));
  REQUIRE(fs.active(g, p));
  PolicyDist target;
  target.actions = s.legal_actions();
  target.probs.assign(target.actions.size(), 0.0);
  target.probs[0] = 1.0;  // a1
  const std::vector<ErrorSample> samples{{s, target, policy(fs, s)}};
  const auto added = grow_features(fs, samples, 4, 1);
  REQUIRE(added.size() == 1);
  CHECK(fs[added[0]].constraints.size() == 2);
  CHECK(fs.active(added[0], p));
  CHECK(fs[added[0]].parents == std::pair<int, int>{f, g});
}
