#pragma once

#include "hazsim/hazard_field.hpp"
#include "hazsim/world.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace hazsim {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RobotSpec {
  std::string id;
  Eigen::Vector2d start = Eigen::Vector2d::Zero();
  double heading = 0.0;
  std::vector<Eigen::Vector2d> route;
  std::optional<double> speed;
  std::optional<double> sensor_radius;
};

struct ObjectSpec {
  std::string id;
  std::vector<Tile> footprint;
};

/// Authored world: grid, hidden objects, robots and routes, hazard spheres, constants.
///
/// JSON layout (all lengths in metres):
///
///     {
///       "name": "demo",
///       "grid": {"cols": 40, "rows": 30, "tile_size": 1.0, "origin": [0, 0]},
///       "constants": {"cost_gain": 9, "decay_rate": 0.02, ...},
///       "hazards": [{"hazard": "radiation", "center": [x, y, z], "radius": 4, "peak": 1}],
///       "objects": [{"id": "drum", "tiles": [[c, r], ...]} | {"id": "..", "rect": [c0, r0, c1, r1]}],
///       "robots": [{"id": "R1", "start": [x, y], "heading": 0, "route": [[x, y], ...]}],
///       "avatar": {"position": [x, y], "heading": 0}
///     }
///
/// `rect` is inclusive on both corners. Constants not given keep their defaults.
struct Scenario {
  std::string name;
  GridSpec grid;
  SimConstants constants;
  HazardField field;
  std::vector<ObjectSpec> objects;
  std::vector<RobotSpec> robots;
  Avatar avatar;
};

struct ValidationIssue {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string where;
  std::string message;
};

/// Structural and semantic lint. Never throws on malformed input.
std::vector<ValidationIssue> validate_scenario(const nlohmann::json& j);

/// Throws ScenarioError listing every error-level issue.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json scenario_to_json(const Scenario& s);

WorldState make_world(const Scenario& s);

}  // namespace hazsim
