#include <doctest.h>

#include <set>

#include "cogniplay/agent.hpp"
#include "support/fixtures.hpp"

using namespace cogniplay;

namespace {

// Weights that make System 1 sure of "own stone next to the anchor".
std::shared_ptr<FeatureSet> confident_features() {
  auto fs = std::make_shared<FeatureSet>(FeatureSet::atomic(1));
  for (int id = 0; id < fs->size(); ++id) {
    const auto& f = (*fs)[id];
    if (!f.is_bias() && f.constraints.front().req == Relation::Friend) fs->set_weight(id, 6.0);
  }
  return fs;
}

AgentConfig quick(std::string_view preset, int iterations) {
  AgentConfig cfg = AgentConfig::from_preset(preset);
  cfg.search.iterations = iterations;
  return cfg;
}

}  // namespace

TEST_CASE("certain partitions bypass search") {
  auto fs = std::make_shared<FeatureSet>(FeatureSet::atomic(1));
  // A single legal move is always certain.
  DualProcessAgent agent(quick("vanilla", 50), fs);
  const auto one_left = fixtures::ttt("a1 b1 c1 a2 b3 c2 a3 c3");
  const auto d = agent.decide(one_left, 1);
  CHECK(d.certain);
  CHECK(d.action == Action::parse("b2"));
  CHECK_FALSE(d.search);
  CHECK(agent.search_calls() == 0);

  const auto open = fixtures::ttt("b2");
  const auto e = agent.decide(open, 1);
  CHECK_FALSE(e.certain);
  REQUIRE(e.search);
  CHECK(agent.search_calls() == 1);
  CHECK(e.good.size() == 7);
  CHECK(e.ranking.size() == 8);
  CHECK(e.ranking.front() == e.action);
}

TEST_CASE("a sharp policy is played directly") {
  const auto fs = confident_features();
  std::int64_t calls = 0;
  const auto s = fixtures::ttt("a1 b1 a3 b2 c2 a2");  // X to move; c1, b3, c3 empty
  const auto p = policy(*fs, s);
  const auto part = partition(p, 0.1, 7);
  const auto d = decide(s, *fs, quick("human", 50), 3, {}, &calls);
  CHECK(d.certain == part.certain);
  CHECK(calls == (part.certain ? 0 : 1));
  CHECK(d.good == part.good);
}

TEST_CASE("decisions are reproducible and respect the seed") {
  Rng rng(2);
  auto fs = std::make_shared<FeatureSet>(FeatureSet::atomic(2));
  for (int id = 1; id < fs->size(); ++id) fs->set_weight(id, uniform01(rng) - 0.5);
  const auto s = fixtures::play(GameSpec::gomoku(), "h8 h9");
  for (const auto* preset : {"vanilla", "human"}) {
    DualProcessAgent a(quick(preset, 200), fs);
    DualProcessAgent b(quick(preset, 200), fs);
    const auto x = a.decide(s, 11);
    const auto y = b.decide(s, 11);
    CHECK(x.action == y.action);
    CHECK(x.visits == y.visits);
    CHECK(x.ranking == y.ranking);
    const auto sampled1 = a.decide(s, 11, DecideOptions{true});
    const auto sampled2 = b.decide(s, 11, DecideOptions{true});
    CHECK(sampled1.action == sampled2.action);
  }
}

TEST_CASE("random agent") {
  RandomAgent agent;
  const auto s = fixtures::ttt("b2");
  std::set<Action> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto d = agent.decide(s, seed);
    CHECK(s.is_legal(d.action));
    CHECK(d.ranking.size() == 8);
    seen.insert(d.action);
  }
  CHECK(seen.size() == 8);
  CHECK(agent.decide(s, 5).action == agent.decide(s, 5).action);
}

TEST_CASE("agent config presets and json") {
  const auto human = AgentConfig::from_preset("human");
  CHECK(human.search.node_cap == 2000);
  CHECK(human.search.depth_cap == 5);
  CHECK(human.search.focus);
  const auto vanilla = AgentConfig::from_preset("vanilla");
  CHECK(vanilla.search.node_cap == 1'000'000);
  CHECK_FALSE(vanilla.search.depth_cap);
  CHECK_FALSE(vanilla.search.focus);
  CHECK_THROWS_AS(AgentConfig::from_preset("expert"), Error);

  AgentConfig cfg = human;
  cfg.tau = 0.2;
  cfg.chunk_cap = 4;
  cfg.search.iterations = 77;
  CHECK(agent_config_from_json(agent_config_to_json(cfg)) == cfg);

  const auto partial = agent_config_from_json(
      nlohmann::json{{"preset", "human"}, {"search", {{"iterations", 10}}}});
  CHECK(partial.search.iterations == 10);
  CHECK(partial.search.node_cap == 2000);
  CHECK(partial.tau == 0.1);

  try {
    agent_config_from_json(nlohmann::json{{"features", {{"tau", 0.0}}}});
    FAIL("expected invalid-config");
  } catch (const Error& e) {
    CHECK(e.code() == "invalid-config");
  }
}
