#include "hazsim/sim.hpp"

#include "hazsim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hazsim {

namespace {

constexpr std::pair<SimEventKind, std::string_view> kEventNames[] = {
    {SimEventKind::HazardFirstEncounter, "HazardFirstEncounter"},
    {SimEventKind::MediumAlertRising, "MediumAlertRising"},
    {SimEventKind::MediumAlertFalling, "MediumAlertFalling"},
    {SimEventKind::Grunt, "Grunt"},
    {SimEventKind::HighAlertEnter, "HighAlertEnter"},
    {SimEventKind::HighAlertExit, "HighAlertExit"},
    {SimEventKind::FlangerEnter, "FlangerEnter"},
    {SimEventKind::FlangerExit, "FlangerExit"},
    {SimEventKind::WaypointReached, "WaypointReached"},
    {SimEventKind::WaypointRemoved, "WaypointRemoved"},
    {SimEventKind::CheckpointReached, "CheckpointReached"},
    {SimEventKind::ObjectRevealed, "ObjectRevealed"},
    {SimEventKind::MarkerPlaced, "MarkerPlaced"},
    {SimEventKind::PathBlocked, "PathBlocked"},
    {SimEventKind::RobotDisabled, "RobotDisabled"},
};

SimEventKind from_alert(sound::AlertEventKind k) {
  using A = sound::AlertEventKind;
  switch (k) {
    case A::MediumRising: return SimEventKind::MediumAlertRising;
    case A::MediumFalling: return SimEventKind::MediumAlertFalling;
    case A::Grunt: return SimEventKind::Grunt;
    case A::HighAlertEnter: return SimEventKind::HighAlertEnter;
    case A::HighAlertExit: return SimEventKind::HighAlertExit;
    case A::FlangerEnter: return SimEventKind::FlangerEnter;
    case A::FlangerExit: return SimEventKind::FlangerExit;
  }
  return SimEventKind::Grunt;
}

double max_level(const PerHazard<double>& levels) {
  return *std::max_element(levels.begin(), levels.end());
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

void halt(Robot& r) {
  r.path.clear();
  r.path_points.clear();
  r.path_cursor = 0;
  r.planned_goal.reset();
  r.needs_replan = true;
}

void deselect(Robot& r) {
  if (r.mode == RobotMode::WaypointControl) r.waypoints_go = true;
  r.mode = RobotMode::Autonomous;
  r.needs_replan = true;
}

std::optional<Eigen::Vector2d> current_goal(const Robot& r) {
  if (r.inoperative) return std::nullopt;
  if (r.mode == RobotMode::WaypointControl) {
    if (r.waypoints_go && !r.waypoints.empty()) return r.waypoints.front();
    return std::nullopt;
  }
  if (!r.waypoints.empty()) return r.waypoints.front();
  if (!r.route.empty()) return r.route[r.next_checkpoint];
  return std::nullopt;
}

bool goal_is_waypoint(const Robot& r) {
  return !r.waypoints.empty() && r.planned_goal && *r.planned_goal == r.waypoints.front();
}

void replan(WorldState& w, Robot& r, std::vector<SimEvent>& events) {
  halt(r);
  r.needs_replan = false;
  auto goal = current_goal(r);
  r.planned_goal = goal;
  if (!goal) {
    r.blocked = false;
    return;
  }
  const auto start = w.grid.tile_of(r.position);
  if (!start) return;  // off-grid robots cannot plan

  auto try_plan = [&](const Eigen::Vector2d& g) -> std::vector<Tile> {
    const auto gt = w.grid.tile_of(g);
    if (!gt) return {};
    return plan_path(w.grid, *start, *gt);
  };

  std::vector<Tile> tiles = try_plan(*goal);
  if (tiles.empty() && !goal_is_waypoint(r) && r.mode != RobotMode::WaypointControl &&
      r.route.size() > 1) {
    // Skip unreachable checkpoints, keeping route order.
    for (std::size_t k = 1; k < r.route.size() && tiles.empty(); ++k) {
      const std::size_t idx = (r.next_checkpoint + k) % r.route.size();
      tiles = try_plan(r.route[idx]);
      if (!tiles.empty()) {
        r.next_checkpoint = idx;
        r.planned_goal = r.route[idx];
      }
    }
  }
  if (tiles.empty()) {
    if (!r.blocked) events.push_back({w.tick, SimEventKind::PathBlocked, r.id, {}, {}, 0.0});
    r.blocked = true;
    r.blocked_at_version = w.grid.version();
    return;
  }
  r.blocked = false;
  r.path.assign(tiles.begin() + 1, tiles.end());
  for (const Tile& t : r.path) r.path_points.push_back(w.grid.center(t));
  if (r.path_points.empty())
    r.path_points.push_back(*r.planned_goal);
  else
    r.path_points.back() = *r.planned_goal;
}

void handle_arrival(WorldState& w, Robot& r, std::vector<SimEvent>& events) {
  if (goal_is_waypoint(r)) {
    r.waypoints.erase(r.waypoints.begin());
    events.push_back({w.tick, SimEventKind::WaypointReached, r.id, {}, {},
                      static_cast<double>(r.waypoints.size())});
    if (r.waypoints.empty() && r.mode != RobotMode::WaypointControl) r.waypoints_go = false;
  } else if (!r.route.empty()) {
    events.push_back({w.tick, SimEventKind::CheckpointReached, r.id, {}, {},
                      static_cast<double>(r.next_checkpoint)});
    r.next_checkpoint = (r.next_checkpoint + 1) % r.route.size();
  }
  halt(r);
}

void advance(WorldState& w, Robot& r, double dt, std::vector<SimEvent>& events) {
  double budget = r.speed * dt;
  while (budget > 0.0 && r.path_cursor < r.path_points.size()) {
    const Eigen::Vector2d target = r.path_points[r.path_cursor];
    const Eigen::Vector2d delta = target - r.position;
    const double d = delta.norm();
    if (d > 1e-12) r.heading = std::atan2(delta.y(), delta.x());
    if (d <= budget) {
      r.position = target;
      r.distance_travelled += d;
      budget -= d;
      if (auto t = w.grid.tile_of(r.position)) w.grid.mark_covered(*t);
      if (++r.path_cursor == r.path_points.size()) {
        handle_arrival(w, r, events);
        break;
      }
    } else {
      r.position += delta * (budget / d);
      r.distance_travelled += budget;
      budget = 0.0;
    }
  }
  if (auto t = w.grid.tile_of(r.position)) w.grid.mark_covered(*t);
}

}  // namespace

std::string_view to_string(SimEventKind k) {
  for (const auto& [kind, name] : kEventNames)
    if (kind == k) return name;
  return "Unknown";
}

std::optional<SimEventKind> parse_event_kind(std::string_view s) {
  for (const auto& [kind, name] : kEventNames)
    if (name == s) return kind;
  return std::nullopt;
}

int selection_count(const WorldState& world) {
  int n = world.self_rtl ? 1 : 0;
  for (const auto& r : world.robots) n += r.mode != RobotMode::Autonomous ? 1 : 0;
  return n;
}

bool on_hazard_detected(WorldState& world, Robot& robot, Tile tile, const PerHazard<double>& levels) {
  const double cost = 1.0 + world.constants.cost_gain * max_level(levels);
  if (world.grid.raise_cost(tile, cost)) {
    robot.needs_replan = true;
    return true;
  }
  return false;
}

std::vector<std::string> reveal(WorldState& world, const Robot& robot, std::vector<SimEvent>* events) {
  const Eigen::Vector2d pos = robot.position;
  const double radius = robot.sensor_radius;
  const std::string robot_id = robot.id;

  std::vector<std::string> revealed;
  for (auto& obj : world.grid.objects) {
    if (obj.revealed) continue;
    const bool seen = std::any_of(obj.footprint.begin(), obj.footprint.end(), [&](Tile t) {
      return (world.grid.center(t) - pos).norm() <= radius;
    });
    if (!seen) continue;
    obj.revealed = true;
    for (Tile t : obj.footprint) world.grid.set_blocked(t);
    revealed.push_back(obj.id);
    if (events) events->push_back({world.tick, SimEventKind::ObjectRevealed, robot_id, {}, obj.id, 0.0});
  }
  if (revealed.empty()) return revealed;

  for (auto& r : world.robots) {
    for (std::size_t i = r.path_cursor; i < r.path.size(); ++i) {
      if (world.grid.blocked(r.path[i])) {
        r.needs_replan = true;
        break;
      }
    }
    for (std::size_t i = r.waypoints.size(); i-- > 0;) {
      const auto t = world.grid.tile_of(r.waypoints[i]);
      if (t && world.grid.blocked(*t)) {
        r.waypoints.erase(r.waypoints.begin() + static_cast<std::ptrdiff_t>(i));
        r.needs_replan = true;
        if (events)
          events->push_back({world.tick, SimEventKind::WaypointRemoved, r.id, {}, {},
                             static_cast<double>(i + 1)});
      }
    }
  }
  return revealed;
}

PerHazard<double> compute_priority(const PerHazard<double>& levels, double health, const SimConstants& c) {
  PerHazard<double> p{};
  for (std::size_t h = 0; h < kHazardCount; ++h)
    p[h] = std::clamp(c.priority_external_weight * levels[h] +
                          c.priority_internal_weight * (1.0 - health),
                      0.0, 1.0);
  return p;
}

bool place_marker(WorldState& world, const Eigen::Vector2d& position, HazardType hazard) {
  const double r = world.constants.marker_exclusion_radius;
  for (const auto& m : world.grid.markers)
    if ((m.position - position).norm() <= r) return false;
  world.grid.markers.push_back({position, hazard, world.tick});
  return true;
}

CommandResult apply_tag(TaggableObject& object, std::optional<HazardType> tag) {
  if (!object.revealed) return CommandResult::reject("object not revealed");
  if (tag)
    object.tags.add(*tag);
  else
    object.tags.clear();
  return CommandResult::ok();
}

CommandResult set_waypoints(WorldState& world, Robot& robot, const std::vector<Eigen::Vector2d>& positions) {
  if (robot.mode != RobotMode::WaypointControl) return CommandResult::reject("robot not in waypoint mode");
  for (const auto& p : positions) {
    const auto t = world.grid.tile_of(p);
    if (!t) return CommandResult::reject("waypoint outside grid");
    if (world.grid.blocked(*t)) return CommandResult::reject("waypoint on blocked tile");
  }
  robot.waypoints = positions;
  robot.waypoints_go = false;
  halt(robot);
  return CommandResult::ok();
}

CommandResult clear_waypoint(Robot& robot, int number) {
  if (number < 1 || number > static_cast<int>(robot.waypoints.size()))
    return CommandResult::reject("no such waypoint");
  robot.waypoints.erase(robot.waypoints.begin() + (number - 1));
  robot.needs_replan = true;
  return CommandResult::ok();
}

CommandResult go(Robot& robot) {
  if (robot.mode != RobotMode::WaypointControl) return CommandResult::reject("robot not in waypoint mode");
  if (robot.waypoints.empty()) return CommandResult::reject("no waypoints set");
  robot.waypoints_go = true;
  robot.needs_replan = true;
  return CommandResult::ok();
}

CommandResult select_robot(WorldState& world, std::string_view id) {
  Robot* r = world.find_robot(id);
  if (!r) return CommandResult::reject("unknown robot");
  world.self_rtl = false;
  switch (r->mode) {
    case RobotMode::Autonomous:
      for (auto& other : world.robots)
        if (other.mode != RobotMode::Autonomous) deselect(other);
      r->mode = RobotMode::Rtl;
      break;
    case RobotMode::Rtl:
      r->mode = RobotMode::WaypointControl;
      r->waypoints_go = false;
      halt(*r);
      break;
    case RobotMode::WaypointControl:
      deselect(*r);
      break;
  }
  return CommandResult::ok();
}

CommandResult toggle_self_rtl(WorldState& world) {
  if (world.self_rtl) {
    world.self_rtl = false;
    return CommandResult::ok();
  }
  for (auto& r : world.robots)
    if (r.mode != RobotMode::Autonomous) deselect(r);
  world.self_rtl = true;
  return CommandResult::ok();
}

CommandResult apply_command(WorldState& world, const Command& cmd) {
  struct Visitor {
    WorldState& w;
    CommandResult operator()(const SelectRobot& c) const { return select_robot(w, c.robot); }
    CommandResult operator()(const ToggleSelfRtl&) const { return toggle_self_rtl(w); }
    CommandResult operator()(const SetWaypoints& c) const {
      Robot* r = w.find_robot(c.robot);
      if (!r) return CommandResult::reject("unknown robot");
      return set_waypoints(w, *r, c.positions);
    }
    CommandResult operator()(const ClearWaypoint& c) const {
      Robot* r = w.find_robot(c.robot);
      if (!r) return CommandResult::reject("unknown robot");
      return clear_waypoint(*r, c.number);
    }
    CommandResult operator()(const Go& c) const {
      Robot* r = w.find_robot(c.robot);
      if (!r) return CommandResult::reject("unknown robot");
      return go(*r);
    }
    CommandResult operator()(const TagObject& c) const {
      TaggableObject* o = w.find_object(c.object);
      if (!o) return CommandResult::reject("unknown object");
      return apply_tag(*o, c.tag);
    }
    CommandResult operator()(const MoveAvatar& c) const {
      Eigen::Vector2d target = c.target;
      if (c.kind != MoveAvatar::Kind::Teleport) {
        const double sign = c.kind == MoveAvatar::Kind::JumpForward ? 1.0 : -1.0;
        const double h = w.avatar.heading;
        target = w.avatar.position + sign * w.constants.avatar_jump * Eigen::Vector2d(std::cos(h), std::sin(h));
      }
      const auto t = w.grid.tile_of(target);
      if (!t) return CommandResult::reject("target outside grid");
      // Teleport arcs are stopped by visible objects; jumps pass through them.
      if (c.kind == MoveAvatar::Kind::Teleport && w.grid.blocked(*t))
        return CommandResult::reject("teleport target occupied");
      w.avatar.position = target;
      return CommandResult::ok();
    }
    CommandResult operator()(const RotateAvatar& c) const {
      w.avatar.heading = wrap_angle(w.avatar.heading + c.steps * std::numbers::pi / 4.0);
      return CommandResult::ok();
    }
  };
  return std::visit(Visitor{world}, cmd);
}

std::vector<SimEvent> step(WorldState& world, const HazardField& field, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  ++world.tick;
  world.time += dt;
  std::vector<SimEvent> events;
  const SimConstants& c = world.constants;

  for (auto& r : world.robots) {
    const bool goal_changed = current_goal(r) != r.planned_goal;
    const bool retry = r.blocked && r.blocked_at_version != world.grid.version();
    if (!r.inoperative && (r.needs_replan || goal_changed || retry)) replan(world, r, events);
    if (!r.inoperative && !r.blocked) advance(world, r, dt, events);

    const Eigen::Vector3d sample(r.position.x(), r.position.y(), c.sensor_height);
    r.levels = field.levels_at(sample);

    for (HazardType h : kAllHazards) {
      const std::size_t i = index_of(h);
      if (!r.encountered[i] && r.levels[i] > c.encounter_threshold) {
        r.encountered[i] = true;
        events.push_back({world.tick, SimEventKind::HazardFirstEncounter, r.id, h, {}, r.levels[i]});
      }
    }

    if (const auto tile = world.grid.tile_of(r.position))
      on_hazard_detected(world, r, *tile, r.levels);

    reveal(world, r, &events);

    for (HazardType h : kAllHazards) {
      if (r.levels[index_of(h)] > c.marker_threshold && place_marker(world, r.position, h))
        events.push_back({world.tick, SimEventKind::MarkerPlaced, r.id, h, {}, r.levels[index_of(h)]});
    }

    if (!r.inoperative) {
      r.health = std::max(0.0, r.health - c.decay_rate * dt * max_level(r.levels));
      if (r.health <= 0.0) {
        r.inoperative = true;
        halt(r);
        r.needs_replan = false;
        events.push_back({world.tick, SimEventKind::RobotDisabled, r.id, {}, {}, 0.0});
      }
    }

    r.priority = compute_priority(r.levels, r.health, c);
    for (HazardType h : kAllHazards) {
      for (const auto& ev : world.alerts.update({r.id, h}, r.priority[index_of(h)]))
        events.push_back({world.tick, from_alert(ev.kind), r.id, h, {}, r.priority[index_of(h)]});
    }
  }
  world.alerts.advance_clock(dt);
  return events;
}

}  // namespace hazsim
