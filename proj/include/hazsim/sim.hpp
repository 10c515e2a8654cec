#pragma once

#include "hazsim/world.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hazsim {

enum class SimEventKind {
  HazardFirstEncounter,
  MediumAlertRising,
  MediumAlertFalling,
  Grunt,
  HighAlertEnter,
  HighAlertExit,
  FlangerEnter,
  FlangerExit,
  WaypointReached,
  WaypointRemoved,
  CheckpointReached,
  ObjectRevealed,
  MarkerPlaced,
  PathBlocked,
  RobotDisabled,
};

std::string_view to_string(SimEventKind k);
std::optional<SimEventKind> parse_event_kind(std::string_view s);

struct SimEvent {
  std::int64_t tick = 0;
  SimEventKind kind = SimEventKind::ObjectRevealed;
  std::string robot;
  std::optional<HazardType> hazard;
  std::string object;
  double value = 0.0;
  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

// ---------------------------------------------------------------------------
// Commands

struct SelectRobot {
  std::string robot;
};
struct ToggleSelfRtl {};
struct SetWaypoints {
  std::string robot;
  std::vector<Eigen::Vector2d> positions;
};
/// `number` is the 1-based label shown next to the waypoint.
struct ClearWaypoint {
  std::string robot;
  int number = 1;
};
struct Go {
  std::string robot;
};
/// An empty `tag` clears all tags.
struct TagObject {
  std::string object;
  std::optional<HazardType> tag;
};
struct MoveAvatar {
  enum class Kind { Teleport, JumpForward, JumpBackward };
  Kind kind = Kind::Teleport;
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
};
/// Rotates the avatar by `steps` x 45 degrees, positive is counter-clockwise (left).
struct RotateAvatar {
  int steps = 1;
};

using Command = std::variant<SelectRobot, ToggleSelfRtl, SetWaypoints, ClearWaypoint, Go,
                             TagObject, MoveAvatar, RotateAvatar>;

struct CommandResult {
  bool accepted = false;
  std::string reason;
  static CommandResult ok() { return {true, {}}; }
  static CommandResult reject(std::string why) { return {false, std::move(why)}; }
};

/// Validates, then applies. A rejected command leaves the world untouched.
CommandResult apply_command(WorldState& world, const Command& cmd);

// ---------------------------------------------------------------------------
// Individual operations (also used by step)

/// 1 + cost_gain x max level. Costs never decrease; on a change the robot replans.
/// Returns true if the tile cost changed.
bool on_hazard_detected(WorldState& world, Robot& robot, Tile tile, const PerHazard<double>& levels);

/// Reveals hidden objects with a footprint tile centre within the robot's sensor
/// radius. Revealed tiles become blocked; affected plans and waypoints are updated.
std::vector<std::string> reveal(WorldState& world, const Robot& robot,
                                 std::vector<SimEvent>* events = nullptr);

/// clamp(w_ext x level + w_int x (1 - health), 0, 1) per hazard.
PerHazard<double> compute_priority(const PerHazard<double>& levels, double health,
                                   const SimConstants& c = {});

/// Places a marker iff no marker of any type lies within the exclusion radius.
bool place_marker(WorldState& world, const Eigen::Vector2d& position, HazardType hazard);

/// Adds a tag (idempotent) or clears all tags. Hidden objects reject tagging.
CommandResult apply_tag(TaggableObject& object, std::optional<HazardType> tag);

CommandResult set_waypoints(WorldState& world, Robot& robot, const std::vector<Eigen::Vector2d>& positions);
CommandResult clear_waypoint(Robot& robot, int number);
CommandResult go(Robot& robot);

/// Click-cycle selection: none -> RTL -> waypoint control -> none. Selecting a
/// different robot (or Self-RTL) deselects the previous one.
CommandResult select_robot(WorldState& world, std::string_view id);
CommandResult toggle_self_rtl(WorldState& world);

/// Advances the world by dt seconds.
std::vector<SimEvent> step(WorldState& world, const HazardField& field, double dt);

/// Count of robots in RTL/waypoint mode plus one if Self-RTL is on.
int selection_count(const WorldState& world);

}  // namespace hazsim
