#pragma once

#include <span>

#include "cogniplay/game.hpp"

namespace cogniplay::renju {

// Length of the run of `color` through `index` along (dx, dy), counting the
// stone at `index` as `color` whatever the cell holds.
int run_length(const GameSpec& spec, std::span<const Cell> cells, int index, Cell color, int dx,
               int dy);

// Whether Black playing the empty point `index` is forbidden: overline,
// double-four or double-three. A move that makes exactly five is never
// forbidden. Threes are judged without recursing into whether the move that
// would complete the straight four is itself forbidden.
bool forbidden_for_black(const GameSpec& spec, std::span<const Cell> cells, int index);

}  // namespace cogniplay::renju
