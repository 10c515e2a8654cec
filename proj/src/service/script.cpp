#include "hazsim/service/script.hpp"

#include "hazsim/service/protocol.hpp"
#include "hazsim/sound/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace hazsim::service {

using nlohmann::json;

Script parse_script(const json& j, const std::filesystem::path& base) {
  Script s;
  try {
    std::filesystem::path p = j.at("scenario").get<std::string>();
    s.scenario = p.is_relative() && !base.empty() ? base / p : p;
    s.duration = j.value("duration", s.duration);
    s.dt = j.value("dt", s.dt);
    const auto set = sound::parse_sound_set(j.value("sound_set", std::string("cog")));
    if (!set) throw std::invalid_argument("script: unknown sound_set");
    s.sound_set = *set;
    s.seed = j.value("seed", s.seed);
    for (const auto& c : j.value("commands", json::array())) {
      ScriptCommand sc;
      sc.time = c.at("t").get<double>();
      sc.command = command_from_json(c.at("command"));
      s.commands.push_back(std::move(sc));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("script: ") + e.what());
  } catch (const ProtocolError& e) {
    throw std::invalid_argument(std::string("script: ") + e.what());
  }
  if (!(s.duration > 0.0) || !(s.dt > 0.0)) throw std::invalid_argument("script: duration and dt must be positive");
  std::stable_sort(s.commands.begin(), s.commands.end(),
                   [](const ScriptCommand& a, const ScriptCommand& b) { return a.time < b.time; });
  return s;
}

Script load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open script " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return parse_script(j, path.parent_path());
}

json script_to_json(const Script& s) {
  json cmds = json::array();
  for (const auto& c : s.commands) cmds.push_back({{"t", c.time}, {"command", command_to_json(c.command)}});
  return json{{"scenario", s.scenario.string()}, {"duration", s.duration},
              {"dt", s.dt},                      {"sound_set", std::string(sound::to_string(s.sound_set))},
              {"seed", s.seed},                  {"commands", cmds}};
}

SimulateResult run_script(const Script& script, const Scenario& scenario, bool render_audio) {
  WorldState world = make_world(scenario);
  sound::SessionAudio audio(script.sound_set, sound::kDefaultSampleRate, script.seed);
  SimulateResult out;

  std::map<std::string, int> counts;
  int accepted = 0, rejected = 0;
  std::size_t next = 0;
  const auto ticks = static_cast<std::int64_t>(std::llround(script.duration / script.dt));
  // Audio frames per tick are spread so the total matches the duration exactly.
  auto frames_at = [&](std::int64_t k) {
    return static_cast<Eigen::Index>(std::llround(double(k) * script.dt * sound::kDefaultSampleRate));
  };
  if (render_audio) out.audio = sound::AudioBlock::stereo(frames_at(ticks), sound::kDefaultSampleRate);

  for (std::int64_t k = 0; k < ticks; ++k) {
    while (next < script.commands.size() && script.commands[next].time <= world.time + 1e-9) {
      const auto& c = script.commands[next++];
      const CommandResult r = apply_command(world, c.command);
      (r.accepted ? accepted : rejected)++;
      audio.on_command(r);
      json line{{"type", "ack"},          {"tick", world.tick},       {"time", world.time},
                {"command", command_to_json(c.command)}, {"accepted", r.accepted}, {"reason", r.reason}};
      out.log += line.dump() + "\n";
    }
    const auto events = step(world, scenario.field, script.dt);
    for (const auto& e : events) {
      json line = event_to_json(e);
      line["type"] = "event";
      line["time"] = world.time;
      out.log += line.dump() + "\n";
      ++counts[std::string(to_string(e.kind))];
    }
    audio.on_events(world, events);
    if (render_audio) {
      const Eigen::Index at = frames_at(k), n = frames_at(k + 1) - at;
      out.audio->samples.middleRows(at, n) = audio.render(world, scenario.field, n).samples;
    }
  }

  json robots = json::object();
  for (const Robot& r : world.robots) {
    json enc = json::array();
    for (HazardType h : kAllHazards)
      if (r.encountered[index_of(h)]) enc.push_back(std::string(to_string(h)));
    robots[r.id] = {{"distance_travelled", r.distance_travelled},
                    {"health", r.health},
                    {"inoperative", r.inoperative},
                    {"encountered", enc},
                    {"position", {r.position.x(), r.position.y()}},
                    {"mode", std::string(to_string(r.mode))}};
  }
  const auto& cov = world.grid.coverage();
  int revealed = 0;
  for (const auto& o : world.grid.objects) revealed += o.revealed;
  out.metrics = json{{"ticks", world.tick},
                     {"time", world.time},
                     {"commands", {{"accepted", accepted}, {"rejected", rejected}}},
                     {"events", counts},
                     {"robots", robots},
                     {"coverage", cov.size() ? double(cov.count()) / double(cov.size()) : 0.0},
                     {"markers", world.grid.markers.size()},
                     {"objects_revealed", revealed}};
  return out;
}

}  // namespace hazsim::service
