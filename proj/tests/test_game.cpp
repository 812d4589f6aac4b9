#include <doctest.h>

#include <set>

#include "cogniplay/game.hpp"
#include "cogniplay/renju.hpp"
#include "support/fixtures.hpp"

using namespace cogniplay;

namespace {

std::string error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("notation round trip and row-major order") {
  CHECK(Action::parse("h8") == Action{7, 7});
  CHECK(Action{0, 0}.to_string() == "a1");
  CHECK(Action{2, 14}.to_string() == "c15");
  CHECK(Action::parse("c15") == Action{2, 14});
  CHECK(error_code([] { Action::parse("8h"); }) == "bad-notation");
  CHECK(error_code([] { Action::parse("a0"); }) == "bad-notation");
  CHECK(Action{2, 0} < Action{0, 1});
}

TEST_CASE("legal actions") {
  const GameState empty(GameSpec::tic_tac_toe());
  const auto all = empty.legal_actions();
  REQUIRE(all.size() == 9);
  CHECK(all.front().to_string() == "a1");
  CHECK(all[1].to_string() == "b1");
  CHECK(all.back().to_string() == "c3");

  // Eight stones, centre empty, no line for either side.
  const auto nearly_full = fixtures::ttt("a1 b1 c1 a2 b3 c2 a3 c3");
  REQUIRE_FALSE(nearly_full.terminal());
  const auto one = nearly_full.legal_actions();
  REQUIRE(one.size() == 1);
  CHECK(one.front().to_string() == "b2");

  CHECK(GameState(GameSpec::gomoku()).legal_actions().size() == 225);

  const auto won = fixtures::ttt("a1 a2 b1 b2 c1");
  CHECK(error_code([&] { won.legal_actions(); }) == "terminal-state");
}

TEST_CASE("apply") {
  const GameState empty(GameSpec::tic_tac_toe());
  const auto s = empty.apply(Action::parse("b2"));
  CHECK(s.at(Action::parse("b2")) == Cell::P1);
  CHECK(s.to_move() == Player::P2);
  CHECK(s.history().size() == 1);
  CHECK(empty.at(Action::parse("b2")) == Cell::Empty);  // value semantics

  CHECK(error_code([&] { s.apply(Action::parse("b2")); }) == "illegal-move");
  CHECK(error_code([&] { s.apply(Action{3, 0}); }) == "illegal-move");
  CHECK(error_code([&] { s.apply(Action{-1, 0}); }) == "illegal-move");

  const auto replayed = fixtures::ttt("b2 a1 c3");
  auto manual = GameState(GameSpec::tic_tac_toe())
                    .apply(Action::parse("b2"))
                    .apply(Action::parse("a1"))
                    .apply(Action::parse("c3"));
  CHECK(replayed == manual);
  CHECK(std::equal(replayed.cells().begin(), replayed.cells().end(), manual.cells().begin()));
}

TEST_CASE("outcome") {
  const auto x_row = fixtures::ttt("a1 a2 b1 b2 c1");
  CHECK(x_row.outcome() == Outcome{1, true});

  // X: a1 b2 c1 a2? construct a full board with no line.
  const auto draw = fixtures::ttt("a1 b2 c1 b1 b3 a2 c2 c3 a3");
  CHECK(draw.outcome() == Outcome{0, true});
  CHECK(scan_outcome(draw.spec(), draw.cells()) == Outcome{0, true});

  // Gomoku: P2 builds the a1-e5 diagonal while P1 scatters harmlessly.
  std::string moves;
  const char* p1[] = {"h8", "o15", "o1", "h15", "a15"};
  const char* p2[] = {"a1", "b2", "c3", "d4", "e5"};
  for (int i = 0; i < 5; ++i) moves += std::string(p1[i]) + " " + p2[i] + " ";
  const auto gomoku = fixtures::play(GameSpec::gomoku(), moves);
  CHECK(gomoku.outcome() == Outcome{-1, true});
  // Hand scan: exactly the five diagonal cells hold P2 stones.
  int diagonal = 0;
  for (int i = 0; i < 5; ++i) diagonal += gomoku.at(Action{i, i}) == Cell::P2;
  CHECK(diagonal == 5);
  CHECK(scan_outcome(gomoku.spec(), gomoku.cells()) == gomoku.outcome());
}

TEST_CASE("freestyle overline wins, renju overline is forbidden for black") {
  // Black stones at a1 b1 c1 e1 f1; playing d1 makes six.
  const std::string moves = "a1 a3 b1 b3 c1 c3 e1 d3 f1 a5";
  const auto free = fixtures::play(GameSpec::gomoku(), moves);
  REQUIRE_FALSE(free.terminal());
  CHECK(free.apply(Action::parse("d1")).outcome() == Outcome{1, true});

  const auto strict = fixtures::play(GameSpec::renju(), moves);
  REQUIRE_FALSE(strict.terminal());
  CHECK_FALSE(strict.is_legal(Action::parse("d1")));
  const auto legal = strict.legal_actions();
  CHECK(std::find(legal.begin(), legal.end(), Action::parse("d1")) == legal.end());
}

TEST_CASE("renju double-three and double-four are forbidden, five is not") {
  const GameSpec spec = GameSpec::renju();
  // Black h8 i8 / h9 h10: playing h? no. Build open twos crossing at j8 ... use
  // explicit cells instead of a game record.
  std::vector<Cell> cells(static_cast<std::size_t>(spec.cells()), Cell::Empty);
  auto put = [&](const char* m, Cell c) {
    cells[static_cast<std::size_t>(Action::parse(m).index(spec.columns))] = c;
  };
  // Horizontal f8 g8 and vertical h6 h7: h8 makes two open threes.
  put("f8", Cell::P1);
  put("g8", Cell::P1);
  put("h6", Cell::P1);
  put("h7", Cell::P1);
  const int h8 = Action::parse("h8").index(spec.columns);
  CHECK(renju::forbidden_for_black(spec, cells, h8));

  // A single open three is fine.
  put("h6", Cell::Empty);
  CHECK_FALSE(renju::forbidden_for_black(spec, cells, h8));

  // Two fours: e8 f8 g8 (+h8) and h5 h6 h7 (+h8).
  put("e8", Cell::P1);
  put("h5", Cell::P1);
  put("h6", Cell::P1);
  CHECK(renju::forbidden_for_black(spec, cells, h8));

  // Completing five overrides everything.
  put("d8", Cell::P1);
  CHECK_FALSE(renju::forbidden_for_black(spec, cells, h8));
}

TEST_CASE("cell_relative") {
  const auto s = fixtures::ttt("b2 c3");  // P1 to move, P1 at b2, P2 at c3
  const Action a1 = Action::parse("a1");
  CHECK(cell_relative(s, a1, -1, 0) == Relation::OffBoard);
  CHECK(cell_relative(s, a1, 1, 1) == Relation::Friend);
  CHECK(cell_relative(s, a1, 2, 2) == Relation::Foe);
  CHECK(cell_relative(s, a1, 1, 0) == Relation::Empty);

  const auto after = s.apply(Action::parse("a3"));  // P2 to move now
  CHECK(cell_relative(after, a1, 1, 1) == Relation::Foe);
  CHECK(cell_relative(after, a1, 2, 2) == Relation::Friend);
}

TEST_CASE("canonical key") {
  const auto e1 = GameState(GameSpec::tic_tac_toe());
  const auto e2 = fixtures::ttt("");
  CHECK(canonical_key(e1) == canonical_key(e2));

  const auto s = fixtures::ttt("a1 b3 c2");
  const auto& rot90 = dihedral_group()[1];
  const auto rotated = transform_state(s, rot90);
  CHECK_FALSE(rotated == s);
  CHECK(canonical_key(rotated) == canonical_key(s));

  // All 9 one-stone states fall into 3 classes: corner, edge, centre.
  std::set<std::string> keys;
  for (const auto& a : e1.legal_actions()) keys.insert(canonical_key(e1.apply(a)));
  CHECK(keys.size() == 3);
  CHECK(canonical_key(fixtures::ttt("a1")) != canonical_key(fixtures::ttt("b1")));
}

TEST_CASE("canonical key is invariant under every board symmetry") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto& spec = trial % 2 ? GameSpec::gomoku() : GameSpec::tic_tac_toe();
    const auto s = fixtures::random_state(spec, 1 + static_cast<int>(rng() % 12), rng);
    const auto key = canonical_key(s);
    for (const auto& sym : board_symmetries(spec)) {
      CHECK(canonical_key(transform_state(s, sym)) == key);
    }
  }
  // Rectangular boards only admit the four axis-preserving symmetries.
  const GameSpec rect{5, 4, 4, "rect", RuleSet::Freestyle};
  CHECK(board_symmetries(rect).size() == 4);
  const auto r = fixtures::play(rect, "a1 e4 b2");
  for (const auto& sym : board_symmetries(rect)) {
    CHECK(canonical_key(transform_state(r, sym)) == canonical_key(r));
  }
}

TEST_CASE("canonical action agrees across symmetric images") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = fixtures::random_state(GameSpec::tic_tac_toe(), static_cast<int>(rng() % 6), rng);
    const auto legal = s.legal_actions();
    const Action a = legal[uniform_index(rng, legal.size())];
    const auto form = canonical_form(s);
    const Action c = canonical_action(s, form, a);
    for (const auto& sym : dihedral_group()) {
      const auto image = transform_state(s, sym);
      const auto image_form = canonical_form(image);
      CHECK(canonical_action(image, image_form, transform_action(s.spec(), sym, a)) == c);
    }
  }
}

TEST_CASE("invariants hold along random games") {
  Rng rng(3);
  for (int game = 0; game < 50; ++game) {
    GameState s(game % 2 ? GameSpec::gomoku() : GameSpec::tic_tac_toe());
    while (!s.terminal()) {
      const auto legal = s.legal_actions();
      int p1 = 0;
      int p2 = 0;
      for (Cell c : s.cells()) {
        p1 += c == Cell::P1;
        p2 += c == Cell::P2;
      }
      CHECK((p1 - p2 == 0 || p1 - p2 == 1));
      CHECK((s.to_move() == Player::P1) == (p1 == p2));
      for (const auto& a : legal) CHECK(s.at(a) == Cell::Empty);
      const auto next = s.apply(legal[uniform_index(rng, legal.size())]);
      if (!next.terminal()) CHECK(next.legal_actions().size() + 1 == legal.size());
      CHECK(next.outcome() == scan_outcome(next.spec(), next.cells()));
      s = next;
    }
    CHECK(GameState::replay(s.spec(), s.history()) == s);
  }
}

TEST_CASE("exhaustive Tic-Tac-Toe position count") {
  const auto oracle = fixtures::oracle::reachable_positions();
  CHECK(oracle.size() == 5478);

  std::set<std::vector<Cell>> seen;
  std::vector<GameState> stack{GameState(GameSpec::tic_tac_toe())};
  while (!stack.empty()) {
    GameState s = std::move(stack.back());
    stack.pop_back();
    std::vector<Cell> cells(s.cells().begin(), s.cells().end());
    if (!seen.insert(cells).second) continue;
    if (s.terminal()) continue;
    for (const auto& a : s.legal_actions()) stack.push_back(s.apply(a));
  }
  CHECK(seen.size() == 5478);
}

TEST_CASE("json state serialization replays") {
  const auto s = fixtures::play(GameSpec::gomoku(), "h8 i9 h9");
  const auto j = state_to_json(s);
  CHECK(j["spec"]["cols"] == 15);
  CHECK(j["spec"]["rows"] == 15);
  CHECK(j["spec"]["k"] == 5);
  CHECK(j["moves"] == nlohmann::json::array({"h8", "i9", "h9"}));
  CHECK(state_from_json(j) == s);

  const auto r = fixtures::play(GameSpec::renju(), "h8");
  CHECK(state_from_json(state_to_json(r)).spec().rules == RuleSet::Renju);

  nlohmann::json bad = j;
  bad["moves"].push_back("h8");
  CHECK(error_code([&] { state_from_json(bad); }) == "illegal-move");
}
