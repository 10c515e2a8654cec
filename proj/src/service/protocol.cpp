#include "hazsim/service/protocol.hpp"

#include <algorithm>

namespace hazsim::service {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void fail(const std::string& what) { throw ProtocolError(what); }

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) fail(std::string("missing field '") + name + "'");
  return j.at(name);
}

template <class T>
T get(const json& j, const char* name) {
  try {
    return field(j, name).get<T>();
  } catch (const json::exception&) {
    fail(std::string("bad field '") + name + "'");
  }
}

Vec2 vec2(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) fail("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

HazardType hazard_of(const json& j) {
  if (!j.is_string()) fail("hazard must be a string");
  const auto h = parse_hazard(j.get<std::string>());
  if (!h) fail("unknown hazard '" + j.get<std::string>() + "'");
  return *h;
}

json hazard_json(HazardType h) { return std::string(to_string(h)); }

RobotMode mode_of(const std::string& s) {
  for (RobotMode m : {RobotMode::Autonomous, RobotMode::Rtl, RobotMode::WaypointControl})
    if (to_string(m) == s) return m;
  fail("unknown robot mode '" + s + "'");
}

sound::SourceCategory category_of(const std::string& s) {
  using sound::SourceCategory;
  for (SourceCategory c : {SourceCategory::Rtl, SourceCategory::Notification, SourceCategory::Alert,
                           SourceCategory::UiFeedback})
    if (sound::to_string(c) == s) return c;
  fail("unknown source category '" + s + "'");
}

std::string mask_row(const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& m, Eigen::Index r) {
  std::string s(static_cast<std::size_t>(m.cols()), '0');
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    if (m(r, c)) s[static_cast<std::size_t>(c)] = '1';
  return s;
}

json per_hazard(const PerHazard<double>& v) {
  json j = json::object();
  for (HazardType h : kAllHazards) j[std::string(to_string(h))] = v[index_of(h)];
  return j;
}

PerHazard<double> per_hazard_of(const json& j) {
  PerHazard<double> v{};
  for (HazardType h : kAllHazards) v[index_of(h)] = get<double>(j, std::string(to_string(h)).c_str());
  return v;
}

json with_header(const char* type, json body) {
  body["type"] = type;
  body["v"] = kProtocolVersion;
  return body;
}

std::string header(const json& j) {
  if (!j.is_object()) fail("message must be a JSON object");
  const auto v = get<int>(j, "v");
  if (v != kProtocolVersion) fail("unsupported protocol version " + std::to_string(v));
  return get<std::string>(j, "type");
}

}  // namespace

// ---------------------------------------------------------------------------
// Commands

json command_to_json(const Command& c) {
  return std::visit(
      overloaded{
          [](const SelectRobot& x) { return json{{"op", "select_robot"}, {"robot", x.robot}}; },
          [](const ToggleSelfRtl&) { return json{{"op", "toggle_self_rtl"}}; },
          [](const SetWaypoints& x) {
            json p = json::array();
            for (const auto& q : x.positions) p.push_back({q.x(), q.y()});
            return json{{"op", "set_waypoints"}, {"robot", x.robot}, {"positions", p}};
          },
          [](const ClearWaypoint& x) { return json{{"op", "clear_waypoint"}, {"robot", x.robot}, {"number", x.number}}; },
          [](const Go& x) { return json{{"op", "go"}, {"robot", x.robot}}; },
          [](const TagObject& x) {
            return json{{"op", "tag"}, {"object", x.object}, {"tag", x.tag ? hazard_json(*x.tag) : json(nullptr)}};
          },
          [](const MoveAvatar& x) {
            const char* kind = x.kind == MoveAvatar::Kind::Teleport      ? "teleport"
                               : x.kind == MoveAvatar::Kind::JumpForward ? "jump_forward"
                                                                         : "jump_backward";
            return json{{"op", "move_avatar"}, {"kind", kind}, {"target", {x.target.x(), x.target.y()}}};
          },
          [](const RotateAvatar& x) { return json{{"op", "rotate_avatar"}, {"steps", x.steps}}; },
      },
      c);
}

Command command_from_json(const json& j) {
  const auto op = get<std::string>(j, "op");
  if (op == "select_robot") return SelectRobot{get<std::string>(j, "robot")};
  if (op == "toggle_self_rtl") return ToggleSelfRtl{};
  if (op == "set_waypoints") {
    SetWaypoints s{get<std::string>(j, "robot"), {}};
    const auto& p = field(j, "positions");
    if (!p.is_array()) fail("positions must be an array");
    for (const auto& q : p) {
      const Vec2 v = vec2(q);
      s.positions.emplace_back(v[0], v[1]);
    }
    return s;
  }
  if (op == "clear_waypoint") return ClearWaypoint{get<std::string>(j, "robot"), get<int>(j, "number")};
  if (op == "go") return Go{get<std::string>(j, "robot")};
  if (op == "tag") {
    TagObject t{get<std::string>(j, "object"), std::nullopt};
    const auto& tag = field(j, "tag");
    if (!tag.is_null()) t.tag = hazard_of(tag);
    return t;
  }
  if (op == "move_avatar") {
    MoveAvatar m;
    const auto kind = get<std::string>(j, "kind");
    if (kind == "teleport") {
      m.kind = MoveAvatar::Kind::Teleport;
      const Vec2 v = vec2(field(j, "target"));
      m.target = {v[0], v[1]};
    } else if (kind == "jump_forward" || kind == "jump_backward") {
      m.kind = kind == "jump_forward" ? MoveAvatar::Kind::JumpForward : MoveAvatar::Kind::JumpBackward;
      if (j.contains("target")) {
        const Vec2 v = vec2(j.at("target"));
        m.target = {v[0], v[1]};
      }
    } else {
      fail("unknown move_avatar kind '" + kind + "'");
    }
    return m;
  }
  if (op == "rotate_avatar") return RotateAvatar{get<int>(j, "steps")};
  fail("unknown command op '" + op + "'");
}

bool commands_equal(const Command& a, const Command& b) { return command_to_json(a) == command_to_json(b); }

json event_to_json(const SimEvent& e) {
  json j{{"tick", e.tick}, {"kind", std::string(to_string(e.kind))}, {"robot", e.robot}, {"value", e.value}};
  j["hazard"] = e.hazard ? hazard_json(*e.hazard) : json(nullptr);
  j["object"] = e.object;
  return j;
}

SimEvent event_from_json(const json& j) {
  SimEvent e;
  e.tick = get<std::int64_t>(j, "tick");
  const auto kind = parse_event_kind(get<std::string>(j, "kind"));
  if (!kind) fail("unknown event kind");
  e.kind = *kind;
  e.robot = get<std::string>(j, "robot");
  e.value = get<double>(j, "value");
  if (j.contains("hazard") && !j.at("hazard").is_null()) e.hazard = hazard_of(j.at("hazard"));
  if (j.contains("object")) e.object = get<std::string>(j, "object");
  return e;
}

// ---------------------------------------------------------------------------
// Snapshot

Snapshot snapshot_of(const WorldState& world) {
  Snapshot s;
  s.tick = world.tick;
  s.time = world.time;
  const auto& spec = world.grid.spec();
  s.cols = spec.cols;
  s.rows = spec.rows;
  s.tile_size = spec.tile_size;
  s.origin = {spec.origin.x(), spec.origin.y()};
  s.avatar = {world.avatar.position.x(), world.avatar.position.y()};
  s.avatar_heading = world.avatar.heading;
  s.self_rtl = world.self_rtl;
  for (const Robot& r : world.robots) {
    RobotView v;
    v.id = r.id;
    v.position = {r.position.x(), r.position.y()};
    v.heading = r.heading;
    v.mode = r.mode;
    v.health = r.health;
    v.levels = r.levels;
    v.priority = r.priority;
    for (const auto& w : r.waypoints) v.waypoints.push_back({w.x(), w.y()});
    v.waypoints_go = r.waypoints_go;
    v.inoperative = r.inoperative;
    v.blocked = r.blocked;
    for (HazardType h : kAllHazards)
      if (const auto* ch = world.alerts.channel({r.id, h}); ch && ch->high_active) v.high_alert = true;
    v.distance_travelled = r.distance_travelled;
    s.robots.push_back(std::move(v));
  }
  for (const auto& o : world.grid.objects) {
    if (!o.revealed) continue;
    ObjectView v;
    v.id = o.id;
    for (const Tile& t : o.footprint) v.footprint.push_back({t.col, t.row});
    for (HazardType h : kAllHazards)
      if (o.tags.contains(h)) v.tags.push_back(h);
    const Rgb c = o.display_color();
    v.color = {c.r, c.g, c.b};
    s.objects.push_back(std::move(v));
  }
  for (const auto& m : world.grid.markers)
    s.markers.push_back({{m.position.x(), m.position.y()}, m.hazard, m.created_tick});
  for (Eigen::Index r = 0; r < world.grid.coverage().rows(); ++r) {
    s.coverage.push_back(mask_row(world.grid.coverage(), r));
    s.blocked.push_back(mask_row(world.grid.blocked_mask(), r));
  }
  return s;
}

json to_json(const Snapshot& s) {
  json robots = json::array();
  for (const auto& r : s.robots) {
    json wp = json::array();
    for (const auto& w : r.waypoints) wp.push_back(w);
    robots.push_back({{"id", r.id},
                      {"position", r.position},
                      {"heading", r.heading},
                      {"mode", std::string(to_string(r.mode))},
                      {"health", r.health},
                      {"levels", per_hazard(r.levels)},
                      {"priority", per_hazard(r.priority)},
                      {"waypoints", wp},
                      {"waypoints_go", r.waypoints_go},
                      {"inoperative", r.inoperative},
                      {"blocked", r.blocked},
                      {"high_alert", r.high_alert},
                      {"distance_travelled", r.distance_travelled}});
  }
  json objects = json::array();
  for (const auto& o : s.objects) {
    json tags = json::array();
    for (HazardType h : o.tags) tags.push_back(hazard_json(h));
    objects.push_back({{"id", o.id}, {"footprint", o.footprint}, {"tags", tags}, {"color", o.color}});
  }
  json markers = json::array();
  for (const auto& m : s.markers)
    markers.push_back({{"position", m.position}, {"hazard", hazard_json(m.hazard)}, {"tick", m.tick}});
  return json{{"tick", s.tick},
              {"time", s.time},
              {"grid", {{"cols", s.cols}, {"rows", s.rows}, {"tile_size", s.tile_size}, {"origin", s.origin}}},
              {"avatar", {{"position", s.avatar}, {"heading", s.avatar_heading}}},
              {"self_rtl", s.self_rtl},
              {"robots", robots},
              {"objects", objects},
              {"markers", markers},
              {"coverage", s.coverage},
              {"blocked", s.blocked}};
}

Snapshot snapshot_from_json(const json& j) {
  Snapshot s;
  try {
    s.tick = get<std::int64_t>(j, "tick");
    s.time = get<double>(j, "time");
    const auto& g = field(j, "grid");
    s.cols = get<int>(g, "cols");
    s.rows = get<int>(g, "rows");
    s.tile_size = get<double>(g, "tile_size");
    s.origin = vec2(field(g, "origin"));
    const auto& a = field(j, "avatar");
    s.avatar = vec2(field(a, "position"));
    s.avatar_heading = get<double>(a, "heading");
    s.self_rtl = get<bool>(j, "self_rtl");
    for (const auto& r : field(j, "robots")) {
      RobotView v;
      v.id = get<std::string>(r, "id");
      v.position = vec2(field(r, "position"));
      v.heading = get<double>(r, "heading");
      v.mode = mode_of(get<std::string>(r, "mode"));
      v.health = get<double>(r, "health");
      v.levels = per_hazard_of(field(r, "levels"));
      v.priority = per_hazard_of(field(r, "priority"));
      for (const auto& w : field(r, "waypoints")) v.waypoints.push_back(vec2(w));
      v.waypoints_go = get<bool>(r, "waypoints_go");
      v.inoperative = get<bool>(r, "inoperative");
      v.blocked = get<bool>(r, "blocked");
      v.high_alert = get<bool>(r, "high_alert");
      v.distance_travelled = get<double>(r, "distance_travelled");
      s.robots.push_back(std::move(v));
    }
    for (const auto& o : field(j, "objects")) {
      ObjectView v;
      v.id = get<std::string>(o, "id");
      v.footprint = field(o, "footprint").get<std::vector<std::array<int, 2>>>();
      for (const auto& t : field(o, "tags")) v.tags.push_back(hazard_of(t));
      v.color = field(o, "color").get<std::array<double, 3>>();
      s.objects.push_back(std::move(v));
    }
    for (const auto& m : field(j, "markers"))
      s.markers.push_back({vec2(field(m, "position")), hazard_of(field(m, "hazard")), get<std::int64_t>(m, "tick")});
    s.coverage = get<std::vector<std::string>>(j, "coverage");
    s.blocked = get<std::vector<std::string>>(j, "blocked");
  } catch (const json::exception& e) {
    fail(std::string("bad snapshot: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Messages

bool operator==(const CommandMsg& a, const CommandMsg& b) { return a.id == b.id && commands_equal(a.command, b.command); }
bool operator==(const ControlMsg& a, const ControlMsg& b) { return a.action == b.action; }
bool operator==(const ParamsMsg& a, const ParamsMsg& b) {
  return to_json(ServerMessage{a}) == to_json(ServerMessage{b});
}

json to_json(const ClientMessage& m) {
  return std::visit(
      overloaded{
          [](const CommandMsg& c) { return with_header("command", {{"id", c.id}, {"command", command_to_json(c.command)}}); },
          [](const ControlMsg& c) {
            return with_header("control", {{"action", c.action == ControlMsg::Action::Request ? "request" : "release"}});
          },
      },
      m);
}

json to_json(const ServerMessage& m) {
  return std::visit(
      overloaded{
          [](const AckMsg& a) {
            return with_header("ack", {{"id", a.id}, {"accepted", a.accepted}, {"reason", a.reason}, {"tick", a.tick}});
          },
          [](const SnapshotMsg& s) { return with_header("snapshot", {{"snapshot", to_json(s.snapshot)}}); },
          [](const EventsMsg& e) {
            json ev = json::array();
            for (const auto& x : e.events) ev.push_back(event_to_json(x));
            return with_header("events", {{"tick", e.tick}, {"events", ev}});
          },
          [](const ParamsMsg& p) {
            json v = json::array();
            for (const auto& f : p.voices) v.push_back(sound::to_json(f));
            return with_header("params", {{"tick", p.tick}, {"sound_set", p.sound_set}, {"mode", p.mode}, {"voices", v}});
          },
          [](const AlertsMsg& a) {
            json v = json::array();
            for (const auto& x : a.alerts)
              v.push_back({{"robot", x.robot},
                           {"hazard", hazard_json(x.hazard)},
                           {"priority", x.priority},
                           {"medium", x.medium},
                           {"high", x.high},
                           {"flanger", x.flanger}});
            return with_header("alerts", {{"tick", a.tick}, {"loop_phase", a.loop_phase}, {"alerts", v}});
          },
          [](const ControlStateMsg& c) {
            return with_header("control", {{"you_have_control", c.you_have_control}, {"held", c.held}});
          },
          [](const ErrorMsg& e) { return with_header("error", {{"message", e.message}}); },
      },
      m);
}

ClientMessage parse_client_message(const json& j) {
  const auto type = header(j);
  if (type == "command") {
    CommandMsg c;
    c.id = get<std::int64_t>(j, "id");
    c.command = command_from_json(field(j, "command"));
    return c;
  }
  if (type == "control") {
    const auto action = get<std::string>(j, "action");
    if (action == "request") return ControlMsg{ControlMsg::Action::Request};
    if (action == "release") return ControlMsg{ControlMsg::Action::Release};
    fail("unknown control action '" + action + "'");
  }
  fail("unknown client message type '" + type + "'");
}

ServerMessage parse_server_message(const json& j) {
  const auto type = header(j);
  if (type == "ack")
    return AckMsg{get<std::int64_t>(j, "id"), get<bool>(j, "accepted"), get<std::string>(j, "reason"),
                  get<std::int64_t>(j, "tick")};
  if (type == "snapshot") return SnapshotMsg{snapshot_from_json(field(j, "snapshot"))};
  if (type == "events") {
    EventsMsg e;
    e.tick = get<std::int64_t>(j, "tick");
    for (const auto& x : field(j, "events")) e.events.push_back(event_from_json(x));
    return e;
  }
  if (type == "params") {
    ParamsMsg p;
    p.tick = get<std::int64_t>(j, "tick");
    p.sound_set = get<std::string>(j, "sound_set");
    p.mode = get<std::string>(j, "mode");
    for (const auto& v : field(j, "voices")) {
      sound::VoiceFrame f;
      f.id = get<std::string>(v, "id");
      f.category = category_of(get<std::string>(v, "category"));
      const Vec2 pos = vec2(field(v, "position"));
      f.position = {pos[0], pos[1]};
      try {
        f.params = sound::synth_params_from_json(field(v, "params"));
      } catch (const std::exception& e) {
        fail(std::string("bad voice params: ") + e.what());
      }
      p.voices.push_back(std::move(f));
    }
    return p;
  }
  if (type == "alerts") {
    AlertsMsg a;
    a.tick = get<std::int64_t>(j, "tick");
    a.loop_phase = get<double>(j, "loop_phase");
    for (const auto& x : field(j, "alerts"))
      a.alerts.push_back({get<std::string>(x, "robot"), hazard_of(field(x, "hazard")), get<double>(x, "priority"),
                          get<bool>(x, "medium"), get<bool>(x, "high"), get<bool>(x, "flanger")});
    return a;
  }
  if (type == "control") return ControlStateMsg{get<bool>(j, "you_have_control"), get<bool>(j, "held")};
  if (type == "error") return ErrorMsg{get<std::string>(j, "message")};
  fail("unknown server message type '" + type + "'");
}

}  // namespace hazsim::service
