#pragma once

#include "hazsim/hazard_field.hpp"
#include "hazsim/sound/alerts.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hazsim {

struct Tile {
  int col = 0;
  int row = 0;
  friend bool operator==(const Tile&, const Tile&) = default;
};

/// Tunables for the simulation. Defaults are the shipped values.
struct SimConstants {
  double cost_gain = 9.0;               // max-hazard tile costs 1 + gain
  double decay_rate = 0.02;             // health per second at level 1
  double marker_exclusion_radius = 3.0; // metres
  double marker_threshold = 0.5;
  double encounter_threshold = 0.05;    // level that counts as "encountering" a hazard
  double priority_external_weight = 0.6;
  double priority_internal_weight = 0.4;
  double robot_speed = 1.0;             // m/s
  double sensor_radius = 3.0;           // m
  double sensor_height = 0.5;           // m, sampling plane for hazards
  double avatar_jump = 1.5;             // m per forward/back jump
};

enum class RobotMode { Autonomous, Rtl, WaypointControl };

std::string_view to_string(RobotMode m);

struct Robot {
  std::string id;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double heading = 0.0;  // radians, CCW from +x
  double speed = 1.0;
  double sensor_radius = 3.0;

  std::vector<Eigen::Vector2d> route;  // cyclic checkpoint route
  std::size_t next_checkpoint = 0;
  std::vector<Eigen::Vector2d> waypoints;
  bool waypoints_go = false;

  RobotMode mode = RobotMode::Autonomous;
  double health = 1.0;
  PerHazard<double> levels{};    // last sensed
  PerHazard<double> priority{};
  PerHazard<bool> encountered{};
  bool inoperative = false;
  double distance_travelled = 0.0;

  // Current plan: tiles entered after the start tile, plus the exact goal point.
  std::vector<Tile> path;
  std::vector<Eigen::Vector2d> path_points;
  std::size_t path_cursor = 0;
  std::optional<Eigen::Vector2d> planned_goal;
  bool needs_replan = true;
  bool blocked = false;
  std::uint64_t blocked_at_version = 0;
};

/// Tag set as a bitmask over HazardType.
class TagSet {
 public:
  void add(HazardType h) { bits_ |= bit(h); }
  void clear() { bits_ = 0; }
  bool contains(HazardType h) const { return (bits_ & bit(h)) != 0; }
  bool empty() const { return bits_ == 0; }
  unsigned bits() const { return bits_; }
  friend bool operator==(const TagSet&, const TagSet&) = default;

 private:
  static unsigned bit(HazardType h) { return 1u << index_of(h); }
  unsigned bits_ = 0;
};

inline constexpr Rgb kUntaggedColor{0.55, 0.55, 0.55};

/// Additive light mix of tag colors; untagged objects keep the voxel grey.
Rgb tag_color(const TagSet& tags);

struct TaggableObject {
  std::string id;
  std::vector<Tile> footprint;
  bool revealed = false;
  TagSet tags;

  Rgb display_color() const { return tag_color(tags); }
};

struct HazardMarker {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  HazardType hazard = HazardType::Radiation;
  std::int64_t created_tick = 0;
};

struct Avatar {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double heading = 0.0;
};

/// Tile occupancy, traversal costs and coverage over a GridSpec.
class GridWorld {
 public:
  GridWorld() = default;
  explicit GridWorld(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int cols() const { return spec_.cols; }
  int rows() const { return spec_.rows; }

  bool contains(Tile t) const { return spec_.contains(t.col, t.row); }
  std::optional<Tile> tile_of(const Eigen::Vector2d& p) const;
  Eigen::Vector2d center(Tile t) const { return spec_.tile_center(t.col, t.row); }

  bool blocked(Tile t) const { return blocked_(t.row, t.col); }
  void set_blocked(Tile t);
  double cost(Tile t) const { return cost_(t.row, t.col); }
  /// Raises the cost of a tile; never lowers it. Returns true if it changed.
  bool raise_cost(Tile t, double cost);
  bool covered(Tile t) const { return coverage_(t.row, t.col); }
  void mark_covered(Tile t) { coverage_(t.row, t.col) = true; }

  const Eigen::ArrayXXd& costs() const { return cost_; }
  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& blocked_mask() const { return blocked_; }
  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& coverage() const { return coverage_; }

  /// Bumped whenever costs or occupancy change.
  std::uint64_t version() const { return version_; }

  std::vector<TaggableObject> objects;
  std::vector<HazardMarker> markers;

 private:
  GridSpec spec_;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> blocked_;
  Eigen::ArrayXXd cost_;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> coverage_;
  std::uint64_t version_ = 0;
};

struct WorldState {
  GridWorld grid;
  std::vector<Robot> robots;
  Avatar avatar;
  bool self_rtl = false;
  std::int64_t tick = 0;
  double time = 0.0;
  SimConstants constants;
  sound::AlertState alerts;

  Robot* find_robot(std::string_view id);
  const Robot* find_robot(std::string_view id) const;
  TaggableObject* find_object(std::string_view id);
  /// Robot in Rtl or WaypointControl mode, if any.
  const Robot* selected_robot() const;
};

}  // namespace hazsim
