#pragma once

#include "hazsim/sim.hpp"
#include "hazsim/sound/engine.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hazsim::service {

/// Every message carries `"v": kProtocolVersion` and a `"type"` tag.
///
/// Client to server:
///
///     {"type": "command", "v": 1, "id": 7, "command": {"op": "select_robot", "robot": "R1"}}
///     {"type": "control", "v": 1, "action": "request" | "release"}
///
/// Command ops: select_robot{robot}, toggle_self_rtl{}, set_waypoints{robot, positions},
/// clear_waypoint{robot, number}, go{robot}, tag{object, tag: hazard | null},
/// move_avatar{kind: teleport | jump_forward | jump_backward, target}, rotate_avatar{steps}.
///
/// Server to client: ack, snapshot, events, params, alerts, control, error.
inline constexpr int kProtocolVersion = 1;

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json command_to_json(const Command& c);
Command command_from_json(const nlohmann::json& j);
bool commands_equal(const Command& a, const Command& b);

nlohmann::json event_to_json(const SimEvent& e);
SimEvent event_from_json(const nlohmann::json& j);

using Vec2 = std::array<double, 2>;

struct RobotView {
  std::string id;
  Vec2 position{};
  double heading = 0.0;
  RobotMode mode = RobotMode::Autonomous;
  double health = 1.0;
  PerHazard<double> levels{};
  PerHazard<double> priority{};
  std::vector<Vec2> waypoints;
  bool waypoints_go = false;
  bool inoperative = false;
  bool blocked = false;
  bool high_alert = false;
  double distance_travelled = 0.0;
  friend bool operator==(const RobotView&, const RobotView&) = default;
};

struct ObjectView {
  std::string id;
  std::vector<std::array<int, 2>> footprint;  // (col, row)
  std::vector<HazardType> tags;
  std::array<double, 3> color{};
  friend bool operator==(const ObjectView&, const ObjectView&) = default;
};

struct MarkerView {
  Vec2 position{};
  HazardType hazard = HazardType::Radiation;
  std::int64_t tick = 0;
  friend bool operator==(const MarkerView&, const MarkerView&) = default;
};

/// Operator-visible world state. Hidden objects and hazard spheres are never sent.
struct Snapshot {
  std::int64_t tick = 0;
  double time = 0.0;
  int cols = 0, rows = 0;
  double tile_size = 1.0;
  Vec2 origin{};
  Vec2 avatar{};
  double avatar_heading = 0.0;
  bool self_rtl = false;
  std::vector<RobotView> robots;
  std::vector<ObjectView> objects;  // revealed only
  std::vector<MarkerView> markers;
  std::vector<std::string> coverage;  // one string per row, '1' = traversed
  std::vector<std::string> blocked;   // one string per row, '1' = blocked
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

Snapshot snapshot_of(const WorldState& world);
nlohmann::json to_json(const Snapshot& s);
Snapshot snapshot_from_json(const nlohmann::json& j);

struct AlertView {
  std::string robot;
  HazardType hazard = HazardType::Radiation;
  double priority = 0.0;
  bool medium = false, high = false, flanger = false;
  friend bool operator==(const AlertView&, const AlertView&) = default;
};

// ---------------------------------------------------------------------------
// Messages

struct CommandMsg {
  std::int64_t id = 0;
  Command command;
};
struct ControlMsg {
  enum class Action { Request, Release };
  Action action = Action::Request;
};
using ClientMessage = std::variant<CommandMsg, ControlMsg>;

struct AckMsg {
  std::int64_t id = 0;
  bool accepted = false;
  std::string reason;
  std::int64_t tick = 0;
  friend bool operator==(const AckMsg&, const AckMsg&) = default;
};
struct SnapshotMsg {
  Snapshot snapshot;
  friend bool operator==(const SnapshotMsg&, const SnapshotMsg&) = default;
};
struct EventsMsg {
  std::int64_t tick = 0;
  std::vector<SimEvent> events;
  friend bool operator==(const EventsMsg&, const EventsMsg&) = default;
};
struct ParamsMsg {
  std::int64_t tick = 0;
  std::string sound_set;
  std::string mode;  // listening mode
  std::vector<sound::VoiceFrame> voices;
};
struct AlertsMsg {
  std::int64_t tick = 0;
  double loop_phase = 0.0;  // s, shared by all high-alert loops
  std::vector<AlertView> alerts;
  friend bool operator==(const AlertsMsg&, const AlertsMsg&) = default;
};
struct ControlStateMsg {
  bool you_have_control = false;
  bool held = false;  // by anyone
  friend bool operator==(const ControlStateMsg&, const ControlStateMsg&) = default;
};
struct ErrorMsg {
  std::string message;
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};
using ServerMessage = std::variant<AckMsg, SnapshotMsg, EventsMsg, ParamsMsg, AlertsMsg, ControlStateMsg, ErrorMsg>;

bool operator==(const CommandMsg& a, const CommandMsg& b);
bool operator==(const ControlMsg& a, const ControlMsg& b);
bool operator==(const ParamsMsg& a, const ParamsMsg& b);

nlohmann::json to_json(const ClientMessage& m);
nlohmann::json to_json(const ServerMessage& m);
/// Throws ProtocolError on a missing or unknown type, wrong version or bad fields.
ClientMessage parse_client_message(const nlohmann::json& j);
ServerMessage parse_server_message(const nlohmann::json& j);

}  // namespace hazsim::service
