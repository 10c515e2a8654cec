#include "hazsim/world.hpp"

#include <algorithm>
#include <cmath>

namespace hazsim {

std::string_view to_string(RobotMode m) {
  switch (m) {
    case RobotMode::Autonomous: return "autonomous";
    case RobotMode::Rtl: return "rtl";
    case RobotMode::WaypointControl: return "waypoint";
  }
  return "unknown";
}

Rgb tag_color(const TagSet& tags) {
  if (tags.empty()) return kUntaggedColor;
  Rgb c;
  for (HazardType h : kAllHazards) {
    if (!tags.contains(h)) continue;
    const Rgb add = display_color(h);
    c.r = std::min(1.0, c.r + add.r);
    c.g = std::min(1.0, c.g + add.g);
    c.b = std::min(1.0, c.b + add.b);
  }
  return c;
}

GridWorld::GridWorld(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  blocked_.setConstant(spec_.rows, spec_.cols, false);
  cost_.setOnes(spec_.rows, spec_.cols);
  coverage_.setConstant(spec_.rows, spec_.cols, false);
}

std::optional<Tile> GridWorld::tile_of(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d local = (p - spec_.origin) / spec_.tile_size;
  const int col = static_cast<int>(std::floor(local.x()));
  const int row = static_cast<int>(std::floor(local.y()));
  if (!spec_.contains(col, row)) return std::nullopt;
  return Tile{col, row};
}

void GridWorld::set_blocked(Tile t) {
  if (!blocked_(t.row, t.col)) {
    blocked_(t.row, t.col) = true;
    ++version_;
  }
}

bool GridWorld::raise_cost(Tile t, double cost) {
  if (cost > cost_(t.row, t.col)) {
    cost_(t.row, t.col) = cost;
    ++version_;
    return true;
  }
  return false;
}

Robot* WorldState::find_robot(std::string_view id) {
  for (auto& r : robots)
    if (r.id == id) return &r;
  return nullptr;
}

const Robot* WorldState::find_robot(std::string_view id) const {
  for (const auto& r : robots)
    if (r.id == id) return &r;
  return nullptr;
}

TaggableObject* WorldState::find_object(std::string_view id) {
  for (auto& o : grid.objects)
    if (o.id == id) return &o;
  return nullptr;
}

const Robot* WorldState::selected_robot() const {
  for (const auto& r : robots)
    if (r.mode != RobotMode::Autonomous) return &r;
  return nullptr;
}

}  // namespace hazsim
