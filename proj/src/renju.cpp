#include "cogniplay/renju.hpp"

#include <array>
#include <vector>

namespace cogniplay::renju {
namespace {

constexpr std::array<std::array<int, 2>, 4> kDirections{{{1, 0}, {0, 1}, {1, 1}, {1, -1}}};

bool in_bounds(const GameSpec& spec, int col, int row) {
  return col >= 0 && row >= 0 && col < spec.columns && row < spec.rows;
}

// Scratch copy of the board with one extra stone, restored on destruction.
class Placement {
 public:
  Placement(std::vector<Cell>& cells, int index, Cell color)
      : cells_(cells), index_(index), saved_(cells[index]) {
    cells_[index_] = color;
  }
  ~Placement() { cells_[index_] = saved_; }
  Placement(const Placement&) = delete;
  Placement& operator=(const Placement&) = delete;

 private:
  std::vector<Cell>& cells_;
  int index_;
  Cell saved_;
};

bool exact_five_at(const GameSpec& spec, std::span<const Cell> cells, int index, int dx, int dy) {
  return run_length(spec, cells, index, Cell::P1, dx, dy) == 5;
}

// Empty points on the line through `index` that would give Black exactly five
// in this direction, with `index` part of that five.
std::vector<int> five_completions(const GameSpec& spec, std::vector<Cell>& cells, int index, int dx,
                                  int dy) {
  std::vector<int> out;
  const int col = index % spec.columns;
  const int row = index / spec.columns;
  for (int step = -4; step <= 4; ++step) {
    if (step == 0) continue;
    const int c = col + step * dx;
    const int r = row + step * dy;
    if (!in_bounds(spec, c, r)) continue;
    const int e = r * spec.columns + c;
    if (cells[e] != Cell::Empty) continue;
    Placement p(cells, e, Cell::P1);
    if (exact_five_at(spec, cells, e, dx, dy) &&
        run_length(spec, cells, index, Cell::P1, dx, dy) == 5) {
      out.push_back(e);
    }
  }
  return out;
}

int fours_in_direction(const GameSpec& spec, std::vector<Cell>& cells, int index, int dx, int dy) {
  const auto completions = five_completions(spec, cells, index, dx, dy);
  if (completions.empty()) return 0;
  if (completions.size() == 1) return 1;
  // Two completions around one contiguous four is a single (straight) four;
  // otherwise the line holds two separate fours, e.g. X.XXX.X.
  return run_length(spec, cells, index, Cell::P1, dx, dy) == 4 ? 1 : 2;
}

bool straight_four_at(const GameSpec& spec, std::vector<Cell>& cells, int index, int dx, int dy) {
  if (run_length(spec, cells, index, Cell::P1, dx, dy) != 4) return false;
  return five_completions(spec, cells, index, dx, dy).size() >= 2;
}

bool open_three_in_direction(const GameSpec& spec, std::vector<Cell>& cells, int index, int dx,
                             int dy) {
  const int col = index % spec.columns;
  const int row = index / spec.columns;
  for (int step = -4; step <= 4; ++step) {
    if (step == 0) continue;
    const int c = col + step * dx;
    const int r = row + step * dy;
    if (!in_bounds(spec, c, r)) continue;
    const int e = r * spec.columns + c;
    if (cells[e] != Cell::Empty) continue;
    Placement p(cells, e, Cell::P1);
    if (straight_four_at(spec, cells, index, dx, dy)) return true;
  }
  return false;
}

}  // namespace

int run_length(const GameSpec& spec, std::span<const Cell> cells, int index, Cell color, int dx,
               int dy) {
  const int col = index % spec.columns;
  const int row = index / spec.columns;
  int length = 1;
  for (int sign : {1, -1}) {
    int c = col + sign * dx;
    int r = row + sign * dy;
    while (in_bounds(spec, c, r) && cells[r * spec.columns + c] == color) {
      ++length;
      c += sign * dx;
      r += sign * dy;
    }
  }
  return length;
}

bool forbidden_for_black(const GameSpec& spec, std::span<const Cell> cells, int index) {
  if (cells[index] != Cell::Empty) return false;
  std::vector<Cell> scratch(cells.begin(), cells.end());
  Placement p(scratch, index, Cell::P1);

  for (const auto& [dx, dy] : kDirections) {
    if (exact_five_at(spec, scratch, index, dx, dy)) return false;
  }
  int fours = 0;
  int threes = 0;
  for (const auto& [dx, dy] : kDirections) {
    if (run_length(spec, scratch, index, Cell::P1, dx, dy) > 5) return true;
    const int f = fours_in_direction(spec, scratch, index, dx, dy);
    fours += f;
    if (f == 0 && open_three_in_direction(spec, scratch, index, dx, dy)) ++threes;
  }
  return fours >= 2 || threes >= 2;
}

}  // namespace cogniplay::renju
