#pragma once

// Helpers shared by the unit and acceptance suites. The Tic-Tac-Toe oracle
// below works on raw arrays and never touches the library's rules code.

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cogniplay/game.hpp"
#include "cogniplay/rng.hpp"

namespace fixtures {

inline cogniplay::GameState play(const cogniplay::GameSpec& spec, const std::string& moves) {
  std::istringstream in(moves);
  std::vector<cogniplay::Action> actions;
  std::string m;
  while (in >> m) actions.push_back(cogniplay::Action::parse(m));
  return cogniplay::GameState::replay(spec, actions);
}

inline cogniplay::GameState ttt(const std::string& moves) {
  return play(cogniplay::GameSpec::tic_tac_toe(), moves);
}

// Uniformly random legal continuation of `plies` moves from the empty board,
// stopping early at a terminal position.
inline cogniplay::GameState random_state(const cogniplay::GameSpec& spec, int plies,
                                         cogniplay::Rng& rng) {
  cogniplay::GameState s(spec);
  for (int i = 0; i < plies && !s.terminal(); ++i) {
    const auto legal = s.legal_actions();
    const auto next = s.apply(legal[cogniplay::uniform_index(rng, legal.size())]);
    if (next.terminal()) break;
    s = next;
  }
  return s;
}

namespace oracle {

using Board = std::array<int, 9>;  // 0 empty, 1 X (P1), 2 O (P2); index = row * 3 + col

inline constexpr int kLines[8][3] = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6},
                                     {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6}};

inline bool has_line(const Board& b, int p) {
  for (const auto& l : kLines) {
    if (b[l[0]] == p && b[l[1]] == p && b[l[2]] == p) return true;
  }
  return false;
}

inline bool full(const Board& b) {
  for (int c : b) {
    if (c == 0) return false;
  }
  return true;
}

inline bool terminal(const Board& b) { return has_line(b, 1) || has_line(b, 2) || full(b); }

// Cells where `p` completes a line immediately.
inline std::vector<int> immediate_wins(const Board& b, int p) {
  std::vector<int> out;
  for (int i = 0; i < 9; ++i) {
    if (b[i] != 0) continue;
    Board n = b;
    n[i] = p;
    if (has_line(n, p)) out.push_back(i);
  }
  return out;
}

// Negamax value for the side to move: +1 win, 0 draw, -1 loss.
inline int negamax(Board& b, int p) {
  if (has_line(b, 3 - p)) return -1;
  if (full(b)) return 0;
  int best = -2;
  for (int i = 0; i < 9; ++i) {
    if (b[i] != 0) continue;
    b[i] = p;
    best = std::max(best, -negamax(b, 3 - p));
    b[i] = 0;
  }
  return best;
}

inline Board rotate(const Board& b) {
  return Board{b[6], b[3], b[0], b[7], b[4], b[1], b[8], b[5], b[2]};
}
inline Board mirror(const Board& b) {
  return Board{b[2], b[1], b[0], b[5], b[4], b[3], b[8], b[7], b[6]};
}
inline Board canonical(const Board& b) {
  Board best = b;
  Board x = b;
  for (int r = 0; r < 4; ++r) {
    best = std::min(best, x);
    best = std::min(best, mirror(x));
    x = rotate(x);
  }
  return best;
}

// Every position reachable by legal play from the empty board (side to move
// implied by the stone counts).
inline std::set<Board> reachable_positions() {
  std::set<Board> seen;
  std::vector<std::pair<Board, int>> stack{{Board{}, 1}};
  while (!stack.empty()) {
    auto [b, p] = stack.back();
    stack.pop_back();
    if (!seen.insert(b).second) continue;
    if (terminal(b)) continue;
    for (int i = 0; i < 9; ++i) {
      if (b[i] != 0) continue;
      Board n = b;
      n[i] = p;
      stack.push_back({n, 3 - p});
    }
  }
  return seen;
}

struct OneMoveWin {
  Board board;
  int winning_cell;
};

// Symmetry-distinct 4-stone positions (X to move) where X has exactly one
// immediate win and O threatens one of its own: X must take the win now.
inline std::vector<OneMoveWin> one_move_to_win_positions() {
  std::map<Board, OneMoveWin> classes;
  for (const auto& b : reachable_positions()) {
    int stones = 0;
    for (int c : b) stones += c != 0;
    if (stones != 4 || terminal(b)) continue;
    const auto wins = immediate_wins(b, 1);
    if (wins.size() != 1 || immediate_wins(b, 2).empty()) continue;
    const Board key = canonical(b);
    if (!classes.contains(key)) classes.emplace(key, OneMoveWin{b, wins.front()});
  }
  std::vector<OneMoveWin> out;
  for (auto& [k, v] : classes) out.push_back(v);
  return out;
}

inline cogniplay::GameState to_state(const Board& b) {
  // Interleave X and O stones so replay is legal; fine for non-terminal boards.
  std::vector<cogniplay::Action> xs;
  std::vector<cogniplay::Action> os;
  for (int i = 0; i < 9; ++i) {
    if (b[i] == 1) xs.push_back(cogniplay::Action::from_index(i, 3));
    if (b[i] == 2) os.push_back(cogniplay::Action::from_index(i, 3));
  }
  std::vector<cogniplay::Action> moves;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    moves.push_back(xs[i]);
    if (i < os.size()) moves.push_back(os[i]);
  }
  return cogniplay::GameState::replay(cogniplay::GameSpec::tic_tac_toe(), moves);
}

// Probability that P1 wins when both sides play uniformly at random.
inline double uniform_random_p1_win(Board& b, int p) {
  if (has_line(b, 1)) return 1.0;
  if (has_line(b, 2) || full(b)) return 0.0;
  int n = 0;
  double total = 0.0;
  for (int i = 0; i < 9; ++i) {
    if (b[i] != 0) continue;
    ++n;
    b[i] = p;
    total += uniform_random_p1_win(b, 3 - p);
    b[i] = 0;
  }
  return total / n;
}

}  // namespace oracle
}  // namespace fixtures
