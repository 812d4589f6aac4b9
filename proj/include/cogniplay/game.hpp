#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cogniplay/error.hpp"

namespace cogniplay {

enum class Player : std::uint8_t { P1 = 1, P2 = 2 };

constexpr Player opponent(Player p) noexcept {
  return p == Player::P1 ? Player::P2 : Player::P1;
}

enum class Cell : std::uint8_t { Empty = 0, P1 = 1, P2 = 2 };

constexpr Cell stone_of(Player p) noexcept { return static_cast<Cell>(p); }

// "P1" / "P2"; player_from_name throws Error("bad-notation").
std::string player_name(Player p);
Player player_from_name(const std::string& s);

// Cell contents seen from the side to move. The numeric values are the 2-bit
// codes used by packed feature patterns.
enum class Relation : std::uint8_t { Empty = 0, Friend = 1, Foe = 2, OffBoard = 3 };

// Freestyle: any run of k or more wins for both sides.
// Renju: Black (P1) wins only with exactly five and may not play overlines,
// double-fours or double-threes.
enum class RuleSet : std::uint8_t { Freestyle, Renju };

struct GameSpec {
  int columns = 3;
  int rows = 3;
  int k = 3;
  std::string name = "ttt";
  RuleSet rules = RuleSet::Freestyle;

  static GameSpec tic_tac_toe();
  static GameSpec gomoku();
  static GameSpec renju();
  // Accepts "ttt", "tictactoe", "gomoku" and "renju".
  static GameSpec by_name(std::string_view name);

  int cells() const noexcept { return columns * rows; }
  bool square() const noexcept { return columns == rows; }

  // Throws Error("invalid-spec") when dimensions or k are out of range.
  void validate() const;

  bool operator==(const GameSpec& other) const noexcept {
    return columns == other.columns && rows == other.rows && k == other.k &&
           rules == other.rules;
  }
};

struct Action {
  int col = 0;
  int row = 0;

  int index(int columns) const noexcept { return row * columns + col; }
  static Action from_index(int index, int columns) noexcept {
    return Action{index % columns, index / columns};
  }

  // "h8": column letter, 1-based row counted from the bottom edge.
  std::string to_string() const;
  // Throws Error("bad-notation").
  static Action parse(std::string_view text);

  bool operator==(const Action&) const noexcept = default;
  // Row-major order; this is the tie-break order used everywhere.
  std::strong_ordering operator<=>(const Action& other) const noexcept {
    if (auto c = row <=> other.row; c != 0) return c;
    return col <=> other.col;
  }
};

struct Outcome {
  int value = 0;  // for P1: +1 win, 0 draw, -1 loss
  bool terminal = false;

  bool operator==(const Outcome&) const noexcept = default;

  // Value from `p`'s point of view.
  int value_for(Player p) const noexcept { return p == Player::P1 ? value : -value; }
};

// Linear part of one of the 8 symmetries of the square:
// (dx, dy) -> (xx*dx + xy*dy, yx*dx + yy*dy).
struct Symmetry {
  int xx, xy, yx, yy;

  std::array<int, 2> map(int dx, int dy) const noexcept {
    return {xx * dx + xy * dy, yx * dx + yy * dy};
  }
  bool swaps_axes() const noexcept { return xx == 0; }
};

// Identity first.
const std::array<Symmetry, 8>& dihedral_group();

// Symmetries that map a board of this shape onto itself: all 8 for square
// boards, the 4 axis-preserving ones otherwise.
std::vector<Symmetry> board_symmetries(const GameSpec& spec);

Action transform_action(const GameSpec& spec, const Symmetry& sym, Action a);

// Immutable position of an m,n,k-game. apply() returns a new value.
class GameState {
 public:
  explicit GameState(GameSpec spec);

  // Throws Error("illegal-move") if any action in `moves` is illegal.
  static GameState replay(GameSpec spec, std::span<const Action> moves);

  const GameSpec& spec() const noexcept { return *spec_; }
  std::span<const Cell> cells() const noexcept { return cells_; }
  Cell at(Action a) const noexcept { return cells_[a.index(spec_->columns)]; }
  Cell at(int index) const noexcept { return cells_[index]; }
  Player to_move() const noexcept { return to_move_; }
  const std::vector<Action>& history() const noexcept { return history_; }
  int ply() const noexcept { return static_cast<int>(history_.size()); }
  const Outcome& outcome() const noexcept { return outcome_; }
  bool terminal() const noexcept { return outcome_.terminal; }

  bool on_board(Action a) const noexcept {
    return a.col >= 0 && a.row >= 0 && a.col < spec_->columns && a.row < spec_->rows;
  }
  bool is_legal(Action a) const;

  // Empty cells in row-major order (minus forbidden points under Renju rules).
  // Throws Error("terminal-state").
  std::vector<Action> legal_actions() const;

  // Throws Error("terminal-state") or Error("illegal-move").
  GameState apply(Action a) const;

  bool operator==(const GameState& other) const noexcept {
    return spec() == other.spec() && cells_ == other.cells_ && to_move_ == other.to_move_;
  }

 private:
  std::shared_ptr<const GameSpec> spec_;
  std::vector<Cell> cells_;
  Player to_move_ = Player::P1;
  std::vector<Action> history_;
  Outcome outcome_;
};

std::vector<Action> legal_actions(const GameState& state);
GameState apply(const GameState& state, Action a);
Outcome outcome(const GameState& state);

// Full-board scan; a pure function of the cells.
Outcome scan_outcome(const GameSpec& spec, std::span<const Cell> cells);

// True if the stone of `color` at `index` is part of a winning run under the
// spec's rules. Used for incremental terminal detection.
bool completes_line(const GameSpec& spec, std::span<const Cell> cells, int index, Cell color);

// Cell at anchor + (dx, dy) relative to the side to move.
Relation cell_relative(const GameState& state, Action anchor, int dx, int dy);

GameState transform_state(const GameState& state, const Symmetry& sym);

struct CanonicalForm {
  std::string key;
  // Every board symmetry whose image attains the minimal serialization.
  std::vector<Symmetry> minimizers;
};

CanonicalForm canonical_form(const GameState& state);

// Minimum over the board symmetries of the cell serialization plus side to
// move. Equal for states that are images of each other.
std::string canonical_key(const GameState& state);

// Representative of `a` in the canonical frame of `state`. Two (state, action)
// pairs that are symmetric images of each other map to the same result.
Action canonical_action(const GameState& state, const CanonicalForm& form, Action a);

// {"cols","rows","k"} plus "rules" when not freestyle.
nlohmann::json spec_to_json(const GameSpec& spec);
GameSpec spec_from_json(const nlohmann::json& j);

// {"spec": {...}, "moves": ["h8", ...]}; the state is rebuilt by replay.
nlohmann::json state_to_json(const GameState& state);
GameState state_from_json(const nlohmann::json& j);

std::vector<std::string> moves_to_strings(std::span<const Action> moves);
std::vector<Action> parse_moves(const nlohmann::json& moves);

// ASCII board for terminals and logs; row 1 at the bottom.
std::string render(const GameState& state);

}  // namespace cogniplay
