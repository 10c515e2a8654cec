#include "hazsim/planner.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

namespace hazsim {

namespace {
constexpr int kDc[4] = {1, 0, -1, 0};
constexpr int kDr[4] = {0, 1, 0, -1};
}  // namespace

std::vector<Tile> plan_path(const GridWorld& world, Tile start, Tile goal) {
  if (!world.contains(start) || !world.contains(goal))
    throw std::out_of_range("plan_path: start or goal outside grid");
  if (world.blocked(goal) && !(start == goal)) return {};
  if (start == goal) return {start};

  const GridSpec& g = world.spec();
  const int n = g.tile_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, kInf);
  std::vector<int> parent(n, -1);
  std::vector<char> done(n, 0);

  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  const int s = g.index(start.col, start.row);
  const int t = g.index(goal.col, goal.row);
  dist[s] = 0.0;
  frontier.emplace(0.0, s);

  while (!frontier.empty()) {
    const auto [d, u] = frontier.top();
    frontier.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == t) break;
    const int uc = u % g.cols;
    const int ur = u / g.cols;
    for (int k = 0; k < 4; ++k) {
      const Tile v{uc + kDc[k], ur + kDr[k]};
      if (!world.contains(v) || world.blocked(v)) continue;
      const int vi = g.index(v.col, v.row);
      const double nd = d + world.cost(v);
      if (nd < dist[vi]) {
        dist[vi] = nd;
        parent[vi] = u;
        frontier.emplace(nd, vi);
      }
    }
  }

  if (!done[t]) return {};
  std::vector<Tile> path;
  for (int v = t; v != -1; v = parent[v]) path.push_back({v % g.cols, v / g.cols});
  std::reverse(path.begin(), path.end());
  return path;
}

double path_cost(const GridWorld& world, std::span<const Tile> path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += world.cost(path[i]);
  return total;
}

}  // namespace hazsim
