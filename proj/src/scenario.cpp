#include "hazsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hazsim {

using nlohmann::json;

namespace {

class Linter {
 public:
  std::vector<ValidationIssue> issues;

  void error(std::string where, std::string msg) {
    issues.push_back({ValidationIssue::Severity::Error, std::move(where), std::move(msg)});
  }
  void warn(std::string where, std::string msg) {
    issues.push_back({ValidationIssue::Severity::Warning, std::move(where), std::move(msg)});
  }

  bool number(const json& j, const std::string& where) {
    if (!j.is_number()) {
      error(where, "expected a number");
      return false;
    }
    if (!std::isfinite(j.get<double>())) {
      error(where, "must be finite");
      return false;
    }
    return true;
  }

  bool vec(const json& j, std::size_t n, const std::string& where) {
    if (!j.is_array() || j.size() != n) {
      error(where, "expected an array of " + std::to_string(n) + " numbers");
      return false;
    }
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) ok &= number(j[i], where + "[" + std::to_string(i) + "]");
    return ok;
  }
};

Eigen::Vector2d vec2(const json& j) { return {j[0].get<double>(), j[1].get<double>()}; }
Eigen::Vector3d vec3(const json& j) { return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}; }

std::vector<Tile> footprint_of(const json& o) {
  std::vector<Tile> tiles;
  if (o.contains("rect")) {
    const auto& r = o["rect"];
    const int c0 = r[0].get<int>(), r0 = r[1].get<int>(), c1 = r[2].get<int>(), r1 = r[3].get<int>();
    for (int row = std::min(r0, r1); row <= std::max(r0, r1); ++row)
      for (int col = std::min(c0, c1); col <= std::max(c0, c1); ++col) tiles.push_back({col, row});
  }
  if (o.contains("tiles"))
    for (const auto& t : o["tiles"]) tiles.push_back({t[0].get<int>(), t[1].get<int>()});
  return tiles;
}

const std::set<std::string> kConstantKeys = {
    "cost_gain",      "decay_rate",       "marker_exclusion_radius", "marker_threshold",
    "encounter_threshold", "priority_external_weight", "priority_internal_weight",
    "robot_speed",    "sensor_radius",    "sensor_height",           "avatar_jump"};

SimConstants constants_from(const json& j) {
  SimConstants c;
  auto get = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = j[key].get<double>();
  };
  get("cost_gain", c.cost_gain);
  get("decay_rate", c.decay_rate);
  get("marker_exclusion_radius", c.marker_exclusion_radius);
  get("marker_threshold", c.marker_threshold);
  get("encounter_threshold", c.encounter_threshold);
  get("priority_external_weight", c.priority_external_weight);
  get("priority_internal_weight", c.priority_internal_weight);
  get("robot_speed", c.robot_speed);
  get("sensor_radius", c.sensor_radius);
  get("sensor_height", c.sensor_height);
  get("avatar_jump", c.avatar_jump);
  return c;
}

json constants_to_json(const SimConstants& c) {
  return {{"cost_gain", c.cost_gain},
          {"decay_rate", c.decay_rate},
          {"marker_exclusion_radius", c.marker_exclusion_radius},
          {"marker_threshold", c.marker_threshold},
          {"encounter_threshold", c.encounter_threshold},
          {"priority_external_weight", c.priority_external_weight},
          {"priority_internal_weight", c.priority_internal_weight},
          {"robot_speed", c.robot_speed},
          {"sensor_radius", c.sensor_radius},
          {"sensor_height", c.sensor_height},
          {"avatar_jump", c.avatar_jump}};
}

}  // namespace

std::vector<ValidationIssue> validate_scenario(const json& j) {
  Linter L;
  if (!j.is_object()) {
    L.error("$", "scenario must be a JSON object");
    return L.issues;
  }

  GridSpec grid;
  bool grid_ok = false;
  if (!j.contains("grid") || !j["grid"].is_object()) {
    L.error("grid", "missing grid block");
  } else {
    const auto& g = j["grid"];
    grid_ok = true;
    for (const char* key : {"cols", "rows"}) {
      if (!g.contains(key) || !g[key].is_number_integer() || g[key].get<int>() <= 0) {
        L.error(std::string("grid.") + key, "must be a positive integer");
        grid_ok = false;
      }
    }
    if (!g.contains("tile_size") || !L.number(g["tile_size"], "grid.tile_size")) {
      if (!g.contains("tile_size")) L.error("grid.tile_size", "missing");
      grid_ok = false;
    } else if (g["tile_size"].get<double>() <= 0.0) {
      L.error("grid.tile_size", "must be positive");
      grid_ok = false;
    }
    if (g.contains("origin") && !L.vec(g["origin"], 2, "grid.origin")) grid_ok = false;
    if (grid_ok) {
      grid.cols = g["cols"].get<int>();
      grid.rows = g["rows"].get<int>();
      grid.tile_size = g["tile_size"].get<double>();
      if (g.contains("origin")) grid.origin = vec2(g["origin"]);
    }
  }

  auto inside = [&](const Eigen::Vector2d& p) {
    const Eigen::Vector2d local = (p - grid.origin) / grid.tile_size;
    return grid.contains(static_cast<int>(std::floor(local.x())), static_cast<int>(std::floor(local.y())));
  };

  if (j.contains("constants")) {
    const auto& c = j["constants"];
    if (!c.is_object()) {
      L.error("constants", "must be an object");
    } else {
      for (const auto& [key, value] : c.items()) {
        const std::string where = "constants." + key;
        if (!kConstantKeys.count(key)) {
          L.warn(where, "unknown constant ignored");
          continue;
        }
        if (L.number(value, where) && value.get<double>() < 0.0) L.error(where, "must be non-negative");
      }
      for (const char* key : {"robot_speed", "sensor_radius", "marker_exclusion_radius"})
        if (c.contains(key) && c[key].is_number() && c[key].get<double>() <= 0.0)
          L.error(std::string("constants.") + key, "must be positive");
    }
  }

  if (j.contains("hazards")) {
    if (!j["hazards"].is_array()) {
      L.error("hazards", "must be an array");
    } else {
      for (std::size_t i = 0; i < j["hazards"].size(); ++i) {
        const auto& h = j["hazards"][i];
        const std::string where = "hazards[" + std::to_string(i) + "]";
        if (!h.is_object()) {
          L.error(where, "must be an object");
          continue;
        }
        if (!h.contains("hazard") || !h["hazard"].is_string() || !parse_hazard(h["hazard"].get<std::string>()))
          L.error(where + ".hazard", "must be one of radiation, temperature, gas");
        if (!h.contains("center")) L.error(where + ".center", "missing");
        else L.vec(h["center"], 3, where + ".center");
        if (!h.contains("radius")) L.error(where + ".radius", "missing");
        else if (L.number(h["radius"], where + ".radius") && h["radius"].get<double>() <= 0.0)
          L.error(where + ".radius", "must be positive");
        if (h.contains("peak") && L.number(h["peak"], where + ".peak")) {
          const double p = h["peak"].get<double>();
          if (!(p > 0.0 && p <= 1.0)) L.error(where + ".peak", "must lie in (0, 1]");
        }
      }
    }
  }

  std::set<std::string> blocked_tiles;
  if (j.contains("objects")) {
    if (!j["objects"].is_array()) {
      L.error("objects", "must be an array");
    } else {
      std::set<std::string> ids;
      for (std::size_t i = 0; i < j["objects"].size(); ++i) {
        const auto& o = j["objects"][i];
        const std::string where = "objects[" + std::to_string(i) + "]";
        if (!o.is_object() || !o.contains("id") || !o["id"].is_string()) {
          L.error(where + ".id", "missing string id");
          continue;
        }
        if (!ids.insert(o["id"].get<std::string>()).second) L.error(where + ".id", "duplicate object id");
        bool shape_ok = true;
        if (o.contains("rect")) {
          const auto& r = o["rect"];
          if (!r.is_array() || r.size() != 4 ||
              !std::all_of(r.begin(), r.end(), [](const json& v) { return v.is_number_integer(); })) {
            L.error(where + ".rect", "expected [c0, r0, c1, r1] integers");
            shape_ok = false;
          }
        }
        if (o.contains("tiles")) {
          const auto& ts = o["tiles"];
          if (!ts.is_array() || !std::all_of(ts.begin(), ts.end(), [](const json& t) {
                return t.is_array() && t.size() == 2 && t[0].is_number_integer() && t[1].is_number_integer();
              })) {
            L.error(where + ".tiles", "expected [[c, r], ...] integers");
            shape_ok = false;
          }
        }
        if (!o.contains("rect") && !o.contains("tiles")) {
          L.error(where, "object needs `rect` or `tiles`");
          shape_ok = false;
        }
        if (shape_ok && grid_ok) {
          const auto tiles = footprint_of(o);
          if (tiles.empty()) L.error(where, "empty footprint");
          for (const Tile& t : tiles) {
            if (!grid.contains(t.col, t.row))
              L.error(where, "footprint tile outside grid");
            else
              blocked_tiles.insert(std::to_string(t.col) + "," + std::to_string(t.row));
          }
        }
      }
    }
  }

  auto tile_key = [&](const Eigen::Vector2d& p) {
    const Eigen::Vector2d local = (p - grid.origin) / grid.tile_size;
    return std::to_string(static_cast<int>(std::floor(local.x()))) + "," +
           std::to_string(static_cast<int>(std::floor(local.y())));
  };

  if (!j.contains("robots") || !j["robots"].is_array() || j["robots"].empty()) {
    L.error("robots", "at least one robot is required");
  } else {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < j["robots"].size(); ++i) {
      const auto& r = j["robots"][i];
      const std::string where = "robots[" + std::to_string(i) + "]";
      if (!r.is_object() || !r.contains("id") || !r["id"].is_string()) {
        L.error(where + ".id", "missing string id");
        continue;
      }
      if (!ids.insert(r["id"].get<std::string>()).second) L.error(where + ".id", "duplicate robot id");
      if (!r.contains("start")) {
        L.error(where + ".start", "missing");
      } else if (L.vec(r["start"], 2, where + ".start") && grid_ok) {
        const auto p = vec2(r["start"]);
        if (!inside(p)) L.error(where + ".start", "outside grid");
        else if (blocked_tiles.count(tile_key(p))) L.warn(where + ".start", "starts inside an object footprint");
      }
      if (r.contains("heading")) L.number(r["heading"], where + ".heading");
      for (const char* key : {"speed", "sensor_radius"})
        if (r.contains(key) && L.number(r[key], where + "." + key) && r[key].get<double>() <= 0.0)
          L.error(where + "." + key, "must be positive");
      if (r.contains("route")) {
        if (!r["route"].is_array()) {
          L.error(where + ".route", "must be an array of points");
        } else {
          for (std::size_t k = 0; k < r["route"].size(); ++k) {
            const std::string w = where + ".route[" + std::to_string(k) + "]";
            if (L.vec(r["route"][k], 2, w) && grid_ok) {
              const auto p = vec2(r["route"][k]);
              if (!inside(p)) L.error(w, "checkpoint outside grid");
              else if (blocked_tiles.count(tile_key(p))) L.warn(w, "checkpoint inside an object footprint");
            }
          }
          if (r["route"].empty()) L.warn(where + ".route", "empty route, robot will idle");
        }
      } else {
        L.warn(where + ".route", "no route, robot will idle");
      }
    }
  }

  if (j.contains("avatar")) {
    const auto& a = j["avatar"];
    if (a.contains("position") && L.vec(a["position"], 2, "avatar.position") && grid_ok &&
        !inside(vec2(a["position"])))
      L.error("avatar.position", "outside grid");
  }
  return L.issues;
}

Scenario parse_scenario(const json& j) {
  const auto issues = validate_scenario(j);
  std::ostringstream msg;
  bool failed = false;
  for (const auto& i : issues) {
    if (i.severity != ValidationIssue::Severity::Error) continue;
    msg << (failed ? "; " : "") << i.where << ": " << i.message;
    failed = true;
  }
  if (failed) throw ScenarioError("invalid scenario: " + msg.str());

  Scenario s;
  s.name = j.value("name", std::string("unnamed"));
  const auto& g = j["grid"];
  s.grid.cols = g["cols"].get<int>();
  s.grid.rows = g["rows"].get<int>();
  s.grid.tile_size = g["tile_size"].get<double>();
  if (g.contains("origin")) s.grid.origin = vec2(g["origin"]);
  s.constants = constants_from(j.value("constants", json::object()));
  s.grid.plane_height = s.constants.sensor_height;

  for (const auto& h : j.value("hazards", json::array())) {
    HazardSphere<double> sphere;
    sphere.hazard = *parse_hazard(h["hazard"].get<std::string>());
    sphere.center = vec3(h["center"]);
    sphere.radius = h["radius"].get<double>();
    sphere.peak = h.value("peak", 1.0);
    s.field.add(sphere);
  }
  for (const auto& o : j.value("objects", json::array()))
    s.objects.push_back({o["id"].get<std::string>(), footprint_of(o)});
  for (const auto& r : j["robots"]) {
    RobotSpec spec;
    spec.id = r["id"].get<std::string>();
    spec.start = vec2(r["start"]);
    spec.heading = r.value("heading", 0.0);
    for (const auto& p : r.value("route", json::array())) spec.route.push_back(vec2(p));
    if (r.contains("speed")) spec.speed = r["speed"].get<double>();
    if (r.contains("sensor_radius")) spec.sensor_radius = r["sensor_radius"].get<double>();
    s.robots.push_back(std::move(spec));
  }
  if (j.contains("avatar")) {
    const auto& a = j["avatar"];
    if (a.contains("position")) s.avatar.position = vec2(a["position"]);
    s.avatar.heading = a.value("heading", 0.0);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ScenarioError("malformed scenario JSON in " + path.string() + ": " + e.what());
  }
  return parse_scenario(j);
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["grid"] = {{"cols", s.grid.cols},
               {"rows", s.grid.rows},
               {"tile_size", s.grid.tile_size},
               {"origin", {s.grid.origin.x(), s.grid.origin.y()}}};
  j["constants"] = constants_to_json(s.constants);
  j["hazards"] = json::array();
  for (const auto& h : s.field.spheres())
    j["hazards"].push_back({{"hazard", to_string(h.hazard)},
                            {"center", {h.center.x(), h.center.y(), h.center.z()}},
                            {"radius", h.radius},
                            {"peak", h.peak}});
  j["objects"] = json::array();
  for (const auto& o : s.objects) {
    json tiles = json::array();
    for (const Tile& t : o.footprint) tiles.push_back({t.col, t.row});
    j["objects"].push_back({{"id", o.id}, {"tiles", tiles}});
  }
  j["robots"] = json::array();
  for (const auto& r : s.robots) {
    json route = json::array();
    for (const auto& p : r.route) route.push_back({p.x(), p.y()});
    json rj = {{"id", r.id}, {"start", {r.start.x(), r.start.y()}}, {"heading", r.heading}, {"route", route}};
    if (r.speed) rj["speed"] = *r.speed;
    if (r.sensor_radius) rj["sensor_radius"] = *r.sensor_radius;
    j["robots"].push_back(rj);
  }
  j["avatar"] = {{"position", {s.avatar.position.x(), s.avatar.position.y()}}, {"heading", s.avatar.heading}};
  return j;
}

WorldState make_world(const Scenario& s) {
  WorldState w;
  w.constants = s.constants;
  GridSpec spec = s.grid;
  spec.plane_height = s.constants.sensor_height;
  w.grid = GridWorld(spec);
  for (const auto& o : s.objects) w.grid.objects.push_back({o.id, o.footprint, false, {}});
  for (const auto& rs : s.robots) {
    Robot r;
    r.id = rs.id;
    r.position = rs.start;
    r.heading = rs.heading;
    r.route = rs.route;
    r.speed = rs.speed.value_or(s.constants.robot_speed);
    r.sensor_radius = rs.sensor_radius.value_or(s.constants.sensor_radius);
    w.robots.push_back(std::move(r));
  }
  w.avatar = s.avatar;
  return w;
}

}  // namespace hazsim
