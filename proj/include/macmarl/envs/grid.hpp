#pragma once

#include <compare>

namespace macmarl::envs {

/// Grid cell; row 0 is the northern edge.
struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class Heading : int { North = 0, East = 1, South = 2, West = 3 };

inline Heading turn_left(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 3) % 4); }
inline Heading turn_right(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 1) % 4); }

inline Cell ahead(Cell c, Heading h) {
  switch (h) {
    case Heading::North: return {c.row - 1, c.col};
    case Heading::East: return {c.row, c.col + 1};
    case Heading::South: return {c.row + 1, c.col};
    case Heading::West: return {c.row, c.col - 1};
  }
  return c;
}

inline bool inside(Cell c, int rows, int cols) {
  return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols;
}

}  // namespace macmarl::envs
