#pragma once

// Grid search on an agent's believed-safe graph.

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "mip/domain.hpp"

namespace mip {

// Passability of a grid as one agent believes it.
struct BelievedGrid {
  int size = 0;
  Cell goal{};
  CellSet blocked;

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.col >= 0 && c.row < size && c.col < size;
  }
  int index(Cell c) const { return c.row * size + c.col; }
  bool passable(Cell c) const { return in_bounds(c) && !blocked.contains(index(c)); }
};

inline int goal_dist(Cell cell, Cell goal) { return manhattan(cell, goal); }

// Length of a shortest path from `from` to the grid goal (A*, Manhattan
// heuristic), or nullopt when unreachable.
inline std::optional<int> astar_distance(const BelievedGrid& grid, Cell from) {
  if (!grid.passable(from)) return std::nullopt;
  if (from == grid.goal) return 0;
  struct Entry {
    int f;
    int g;
    int index;
    bool operator>(const Entry& o) const { return f != o.f ? f > o.f : g < o.g; }
  };
  constexpr int kUnseen = 1 << 20;
  std::vector<int> best(static_cast<std::size_t>(grid.size * grid.size), kUnseen);
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const int start = grid.index(from);
  best[start] = 0;
  open.push({goal_dist(from, grid.goal), 0, start});
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (e.g > best[e.index]) continue;
    const Cell c{e.index / grid.size, e.index % grid.size};
    if (c == grid.goal) return e.g;
    for (Direction d : kDirections) {
      const Cell n = shifted(c, d);
      if (!grid.passable(n)) continue;
      const int ni = grid.index(n);
      const int g = e.g + 1;
      if (g < best[ni]) {
        best[ni] = g;
        open.push({g + goal_dist(n, grid.goal), g, ni});
      }
    }
  }
  return std::nullopt;
}

// Bitmask over kDirections.
using DirectionMask = std::uint8_t;

constexpr DirectionMask direction_bit(Direction d) {
  return static_cast<DirectionMask>(1U << static_cast<unsigned>(d));
}

// First step of a shortest believed-safe path to the goal, skipping
// `excluded` directions. Ties go to the canonical direction order.
inline std::optional<Direction> astar_next(const BelievedGrid& grid, Cell pos,
                                           DirectionMask excluded = 0) {
  std::optional<Direction> best_dir;
  int best = 0;
  for (Direction d : kDirections) {
    if (excluded & direction_bit(d)) continue;
    const Cell n = shifted(pos, d);
    if (!grid.passable(n)) continue;
    const auto dist = astar_distance(grid, n);
    if (!dist) continue;
    if (!best_dir || *dist < best) {
      best_dir = d;
      best = *dist;
    }
  }
  return best_dir;
}

// Directions whose target cell is inside the grid.
inline std::vector<Direction> in_grid_moves(int size, Cell pos) {
  std::vector<Direction> out;
  for (Direction d : kDirections) {
    const Cell n = shifted(pos, d);
    if (n.row >= 0 && n.col >= 0 && n.row < size && n.col < size) out.push_back(d);
  }
  return out;
}

inline BelievedGrid believed_grid(const GridMap& map, const WorldState& state, Agent agent) {
  return {map.size(), map.goal(), believed_hazards(map, state, agent)};
}

}  // namespace mip

namespace mip {

// Move the robot substitutes under take-control: the A* step on its own
// belief, else the most goal-ward believed-safe neighbour, else the most
// goal-ward non-hole neighbour, else a wall bump. Never enters a hole.
inline Direction robot_replacement_move(const BelievedGrid& robot, CellSet holes, Cell pos) {
  if (auto d = astar_next(robot, pos)) return *d;
  auto best_by = [&](auto accept) -> std::optional<Direction> {
    std::optional<Direction> best;
    int best_dist = 0;
    for (Direction d : kDirections) {
      const Cell n = shifted(pos, d);
      if (!robot.in_bounds(n) || !accept(n)) continue;
      const int dist = goal_dist(n, robot.goal);
      if (!best || dist < best_dist) {
        best = d;
        best_dist = dist;
      }
    }
    return best;
  };
  if (auto d = best_by([&](Cell n) { return robot.passable(n); })) return *d;
  if (auto d = best_by([&](Cell n) { return !holes.contains(robot.index(n)); })) return *d;
  for (Direction d : kDirections)
    if (!robot.in_bounds(shifted(pos, d))) return d;
  return Direction::Up;
}

}  // namespace mip
