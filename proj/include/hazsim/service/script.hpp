#pragma once

#include "hazsim/scenario.hpp"
#include "hazsim/sim.hpp"
#include "hazsim/sound/audio_block.hpp"
#include "hazsim/sound/params.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hazsim::service {

struct ScriptCommand {
  double time = 0.0;  // applied before the first tick at or after this time
  Command command;
};

/// Headless run description:
///
///     {
///       "scenario": "demo.json",        // relative to the script file
///       "duration": 60, "dt": 0.05,
///       "sound_set": "cog", "seed": 1,
///       "commands": [{"t": 1.0, "command": {"op": "select_robot", "robot": "R1"}}]
///     }
struct Script {
  std::filesystem::path scenario;
  double duration = 60.0;
  double dt = 0.05;
  sound::SoundSet sound_set = sound::SoundSet::Cog;
  std::uint64_t seed = 1;
  std::vector<ScriptCommand> commands;
};

/// `base` resolves a relative scenario path. Throws std::invalid_argument.
Script parse_script(const nlohmann::json& j, const std::filesystem::path& base = {});
Script load_script(const std::filesystem::path& path);
nlohmann::json script_to_json(const Script& s);

struct SimulateResult {
  std::string log;  // JSON lines: {"type": "ack" | "event", ...}
  nlohmann::json metrics;
  std::optional<sound::AudioBlock> audio;  // stereo session mix
};

SimulateResult run_script(const Script& script, const Scenario& scenario, bool render_audio = false);

}  // namespace hazsim::service
