#pragma once

#include "hazsim/world.hpp"

#include <span>
#include <vector>

namespace hazsim {

/// Minimum-cost 4-connected path from `start` to `goal`, inclusive of both.
///
/// Entering a tile costs that tile's traversal cost; the start tile is free.
/// Blocked tiles are never entered (the start tile may itself be blocked, e.g.
/// when an object is revealed underneath a robot). Returns an empty vector iff
/// the goal is unreachable. Ties are broken deterministically.
std::vector<Tile> plan_path(const GridWorld& world, Tile start, Tile goal);

/// Sum of costs of every tile entered along `path` (start excluded).
double path_cost(const GridWorld& world, std::span<const Tile> path);

}  // namespace hazsim
