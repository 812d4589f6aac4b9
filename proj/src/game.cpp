#include "cogniplay/game.hpp"

#include <algorithm>
#include <sstream>

#include "cogniplay/renju.hpp"

namespace cogniplay {

std::string player_name(Player p) { return p == Player::P1 ? "P1" : "P2"; }

Player player_from_name(const std::string& s) {
  if (s == "P1") return Player::P1;
  if (s == "P2") return Player::P2;
  throw Error("bad-notation", "player must be \"P1\" or \"P2\": " + s);
}

namespace {

constexpr std::array<std::array<int, 2>, 4> kLineDirections{{{1, 0}, {0, 1}, {1, 1}, {1, -1}}};

char cell_char(Cell c) {
  switch (c) {
    case Cell::P1:
      return 'x';
    case Cell::P2:
      return 'o';
    default:
      return '.';
  }
}

}  // namespace

GameSpec GameSpec::tic_tac_toe() { return GameSpec{3, 3, 3, "ttt", RuleSet::Freestyle}; }

GameSpec GameSpec::gomoku() { return GameSpec{15, 15, 5, "gomoku", RuleSet::Freestyle}; }

GameSpec GameSpec::renju() { return GameSpec{15, 15, 5, "renju", RuleSet::Renju}; }

GameSpec GameSpec::by_name(std::string_view name) {
  if (name == "ttt" || name == "tictactoe" || name == "tic_tac_toe") return tic_tac_toe();
  if (name == "gomoku") return gomoku();
  if (name == "renju") return renju();
  throw Error("unknown-game", std::string(name));
}

void GameSpec::validate() const {
  if (columns < 3 || rows < 3) throw Error("invalid-spec", "board must be at least 3x3");
  if (columns > 26) throw Error("invalid-spec", "at most 26 columns are addressable");
  if (k < 2 || k > std::max(columns, rows)) throw Error("invalid-spec", "k out of range");
  if (rules == RuleSet::Renju && k != 5) throw Error("invalid-spec", "renju rules need k = 5");
}

std::string Action::to_string() const {
  return std::string(1, static_cast<char>('a' + col)) + std::to_string(row + 1);
}

Action Action::parse(std::string_view text) {
  if (text.size() < 2 || text.size() > 4) throw Error("bad-notation", std::string(text));
  const char letter = text.front();
  if (letter < 'a' || letter > 'z') throw Error("bad-notation", std::string(text));
  int row = 0;
  for (char ch : text.substr(1)) {
    if (ch < '0' || ch > '9') throw Error("bad-notation", std::string(text));
    row = row * 10 + (ch - '0');
  }
  if (row < 1) throw Error("bad-notation", std::string(text));
  return Action{letter - 'a', row - 1};
}

const std::array<Symmetry, 8>& dihedral_group() {
  static const std::array<Symmetry, 8> group{{
      {1, 0, 0, 1},    // identity
      {0, -1, 1, 0},   // rotate 90
      {-1, 0, 0, -1},  // rotate 180
      {0, 1, -1, 0},   // rotate 270
      {-1, 0, 0, 1},   // mirror left-right
      {1, 0, 0, -1},   // mirror top-bottom
      {0, 1, 1, 0},    // transpose
      {0, -1, -1, 0},  // anti-transpose
  }};
  return group;
}

std::vector<Symmetry> board_symmetries(const GameSpec& spec) {
  std::vector<Symmetry> out;
  for (const auto& s : dihedral_group()) {
    if (spec.square() || !s.swaps_axes()) out.push_back(s);
  }
  return out;
}

Action transform_action(const GameSpec& spec, const Symmetry& sym, Action a) {
  // Work in doubled coordinates centred on the board so the map is linear.
  const int x = 2 * a.col - (spec.columns - 1);
  const int y = 2 * a.row - (spec.rows - 1);
  const auto [tx, ty] = sym.map(x, y);
  const int out_cols = sym.swaps_axes() ? spec.rows : spec.columns;
  const int out_rows = sym.swaps_axes() ? spec.columns : spec.rows;
  return Action{(tx + out_cols - 1) / 2, (ty + out_rows - 1) / 2};
}

GameState::GameState(GameSpec spec)
    : spec_(std::make_shared<const GameSpec>(std::move(spec))),
      cells_(static_cast<std::size_t>(spec_->cells()), Cell::Empty) {
  spec_->validate();
}

GameState GameState::replay(GameSpec spec, std::span<const Action> moves) {
  GameState state(std::move(spec));
  for (const auto& a : moves) {
    if (state.terminal()) throw Error("illegal-move", "move after end of game: " + a.to_string());
    state = state.apply(a);
  }
  return state;
}

bool GameState::is_legal(Action a) const {
  if (terminal() || !on_board(a)) return false;
  const int idx = a.index(spec_->columns);
  if (cells_[idx] != Cell::Empty) return false;
  if (spec_->rules == RuleSet::Renju && to_move_ == Player::P1) {
    return !renju::forbidden_for_black(*spec_, cells_, idx);
  }
  return true;
}

std::vector<Action> GameState::legal_actions() const {
  if (terminal()) throw Error("terminal-state");
  std::vector<Action> out;
  out.reserve(cells_.size() - history_.size());
  const bool renju_black = spec_->rules == RuleSet::Renju && to_move_ == Player::P1;
  for (int idx = 0; idx < static_cast<int>(cells_.size()); ++idx) {
    if (cells_[idx] != Cell::Empty) continue;
    if (renju_black && renju::forbidden_for_black(*spec_, cells_, idx)) continue;
    out.push_back(Action::from_index(idx, spec_->columns));
  }
  return out;
}

GameState GameState::apply(Action a) const {
  if (terminal()) throw Error("terminal-state");
  if (!is_legal(a)) throw Error("illegal-move", a.to_string());
  GameState next(*this);
  const int idx = a.index(spec_->columns);
  const Cell stone = stone_of(to_move_);
  next.cells_[idx] = stone;
  next.history_.push_back(a);
  next.to_move_ = opponent(to_move_);
  if (completes_line(*spec_, next.cells_, idx, stone)) {
    next.outcome_ = Outcome{to_move_ == Player::P1 ? 1 : -1, true};
  } else if (next.history_.size() == next.cells_.size()) {
    next.outcome_ = Outcome{0, true};
  }
  return next;
}

std::vector<Action> legal_actions(const GameState& state) { return state.legal_actions(); }

GameState apply(const GameState& state, Action a) { return state.apply(a); }

Outcome outcome(const GameState& state) { return state.outcome(); }

bool completes_line(const GameSpec& spec, std::span<const Cell> cells, int index, Cell color) {
  for (const auto& [dx, dy] : kLineDirections) {
    const int run = renju::run_length(spec, cells, index, color, dx, dy);
    if (spec.rules == RuleSet::Renju && color == Cell::P1) {
      if (run == spec.k) return true;
    } else if (run >= spec.k) {
      return true;
    }
  }
  return false;
}

Outcome scan_outcome(const GameSpec& spec, std::span<const Cell> cells) {
  bool full = true;
  for (int idx = 0; idx < static_cast<int>(cells.size()); ++idx) {
    const Cell c = cells[idx];
    if (c == Cell::Empty) {
      full = false;
      continue;
    }
    if (completes_line(spec, cells, idx, c)) return Outcome{c == Cell::P1 ? 1 : -1, true};
  }
  return Outcome{0, full};
}

Relation cell_relative(const GameState& state, Action anchor, int dx, int dy) {
  const Action target{anchor.col + dx, anchor.row + dy};
  if (!state.on_board(target)) return Relation::OffBoard;
  const Cell c = state.at(target);
  if (c == Cell::Empty) return Relation::Empty;
  return c == stone_of(state.to_move()) ? Relation::Friend : Relation::Foe;
}

GameState transform_state(const GameState& state, const Symmetry& sym) {
  GameSpec spec = state.spec();
  if (sym.swaps_axes()) std::swap(spec.columns, spec.rows);
  std::vector<Action> moves;
  moves.reserve(state.history().size());
  for (const auto& a : state.history()) moves.push_back(transform_action(state.spec(), sym, a));
  return GameState::replay(std::move(spec), moves);
}

CanonicalForm canonical_form(const GameState& state) {
  const GameSpec& spec = state.spec();
  const int n = spec.cells();
  CanonicalForm form;
  std::string candidate;
  for (const auto& sym : board_symmetries(spec)) {
    candidate.assign(static_cast<std::size_t>(n), '.');
    for (int idx = 0; idx < n; ++idx) {
      const Cell c = state.at(idx);
      if (c == Cell::Empty) continue;
      const Action t = transform_action(spec, sym, Action::from_index(idx, spec.columns));
      candidate[static_cast<std::size_t>(t.index(spec.columns))] = cell_char(c);
    }
    if (form.minimizers.empty() || candidate < form.key) {
      form.key = candidate;
      form.minimizers.assign(1, sym);
    } else if (candidate == form.key) {
      form.minimizers.push_back(sym);
    }
  }
  form.key = std::to_string(spec.columns) + "x" + std::to_string(spec.rows) + "k" +
             std::to_string(spec.k) + ":" + form.key + ":" +
             (state.to_move() == Player::P1 ? "x" : "o");
  return form;
}

std::string canonical_key(const GameState& state) { return canonical_form(state).key; }

Action canonical_action(const GameState& state, const CanonicalForm& form, Action a) {
  Action best = transform_action(state.spec(), form.minimizers.front(), a);
  for (const auto& sym : form.minimizers) best = std::min(best, transform_action(state.spec(), sym, a));
  return best;
}

nlohmann::json spec_to_json(const GameSpec& spec) {
  nlohmann::json j{{"cols", spec.columns}, {"rows", spec.rows}, {"k", spec.k}};
  if (spec.rules == RuleSet::Renju) j["rules"] = "renju";
  return j;
}

GameSpec spec_from_json(const nlohmann::json& j) {
  GameSpec spec;
  spec.columns = j.at("cols").get<int>();
  spec.rows = j.at("rows").get<int>();
  spec.k = j.at("k").get<int>();
  spec.rules = j.value("rules", std::string("freestyle")) == "renju" ? RuleSet::Renju
                                                                      : RuleSet::Freestyle;
  if (spec == GameSpec::tic_tac_toe()) {
    spec.name = "ttt";
  } else if (spec == GameSpec::gomoku()) {
    spec.name = "gomoku";
  } else if (spec == GameSpec::renju()) {
    spec.name = "renju";
  } else {
    spec.name = "mnk";
  }
  spec.validate();
  return spec;
}

std::vector<std::string> moves_to_strings(std::span<const Action> moves) {
  std::vector<std::string> out;
  out.reserve(moves.size());
  for (const auto& a : moves) out.push_back(a.to_string());
  return out;
}

std::vector<Action> parse_moves(const nlohmann::json& moves) {
  std::vector<Action> out;
  out.reserve(moves.size());
  for (const auto& m : moves) out.push_back(Action::parse(m.get<std::string>()));
  return out;
}

nlohmann::json state_to_json(const GameState& state) {
  return nlohmann::json{{"spec", spec_to_json(state.spec())},
                        {"moves", moves_to_strings(state.history())}};
}

GameState state_from_json(const nlohmann::json& j) {
  return GameState::replay(spec_from_json(j.at("spec")), parse_moves(j.at("moves")));
}

std::string render(const GameState& state) {
  const GameSpec& spec = state.spec();
  std::ostringstream os;
  const Action last = state.history().empty() ? Action{-1, -1} : state.history().back();
  for (int row = spec.rows - 1; row >= 0; --row) {
    os << (row + 1 < 10 ? " " : "") << row + 1 << ' ';
    for (int col = 0; col < spec.columns; ++col) {
      const Action a{col, row};
      char ch = cell_char(state.at(a));
      if (a == last) ch = static_cast<char>(ch - 'a' + 'A');
      os << ' ' << ch;
    }
    os << '\n';
  }
  os << "   ";
  for (int col = 0; col < spec.columns; ++col) os << ' ' << static_cast<char>('a' + col);
  os << '\n';
  return os.str();
}

}  // namespace cogniplay
