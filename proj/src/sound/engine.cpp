#include "hazsim/sound/engine.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace hazsim::sound {

nlohmann::json to_json(const VoiceFrame& f) {
  return nlohmann::json{{"id", f.id},
                        {"category", to_string(f.category)},
                        {"position", {f.position.x(), f.position.y()}},
                        {"params", to_json(f.params)}};
}

ListeningMode listening_mode(const WorldState& world) {
  if (world.self_rtl) return ListeningMode::SelfRtl;
  if (world.selected_robot()) return ListeningMode::RobotRtl;
  return ListeningMode::Off;
}

SessionAudio::SessionAudio(SoundSet set, int sample_rate, std::uint64_t seed, const SoundConstants& c)
    : set_(set),
      fs_(sample_rate),
      c_(c),
      seed_(seed),
      rtl_{Voice(sample_rate, seed * 3 + 0, c), Voice(sample_rate, seed * 3 + 1, c), Voice(sample_rate, seed * 3 + 2, c)},
      mixer_(sample_rate) {}

void SessionAudio::enqueue(AudioBlock block, const WorldState& world, const std::string& robot, SourceCategory cat) {
  Pending p;
  p.block = std::move(block);
  p.robot = robot;
  p.category = cat;
  if (const Robot* r = world.find_robot(robot)) p.position = r->position;
  pending_.push_back(std::move(p));
}

void SessionAudio::on_events(const WorldState& world, const std::vector<SimEvent>& events) {
  for (const SimEvent& e : events) {
    switch (e.kind) {
      case SimEventKind::HazardFirstEncounter:
        if (e.hazard && gate_.allow(e.robot, *e.hazard, world.time))
          enqueue(render_notification(notification(set_, *e.hazard, c_), fs_, seed_ + 1000 + earcon_count_++, c_),
                  world, e.robot, SourceCategory::Notification);
        break;
      case SimEventKind::MediumAlertRising:
      case SimEventKind::MediumAlertFalling:
        if (e.hazard)
          enqueue(render_medium_earcon(set_, *e.hazard, e.kind == SimEventKind::MediumAlertRising, fs_), world, e.robot,
                  SourceCategory::Alert);
        break;
      case SimEventKind::Grunt:
        enqueue(render_grunt(GruntKind::AlertPrelude, fs_), world, e.robot, SourceCategory::Alert);
        break;
      case SimEventKind::WaypointReached:
      case SimEventKind::WaypointRemoved:
        enqueue(render_grunt(GruntKind::WaypointRemoved, fs_), world, "", SourceCategory::UiFeedback);
        break;
      default: break;
    }
  }
}

void SessionAudio::on_command(const CommandResult& result) {
  Pending p;
  p.block = render_grunt(result.accepted ? GruntKind::Accept : GruntKind::Reject, fs_);
  p.category = SourceCategory::UiFeedback;
  pending_.push_back(std::move(p));
}

std::vector<VoiceFrame> SessionAudio::rtl_frames(const WorldState& world, const HazardField& field) const {
  std::vector<VoiceFrame> frames;
  const ListeningMode mode = listening_mode(world);
  PerHazard<double> levels{};
  Eigen::Vector2d where = world.avatar.position;
  if (mode == ListeningMode::RobotRtl) {
    const Robot* r = world.selected_robot();
    levels = r->levels;
    where = r->position;
  } else if (mode == ListeningMode::SelfRtl) {
    const auto tile = world.grid.tile_of(world.avatar.position);
    if (!tile || !world.grid.covered(*tile)) return frames;
    levels = field.levels_at(Eigen::Vector3d(where.x(), where.y(), world.constants.sensor_height));
  } else {
    return frames;
  }
  for (HazardType h : kAllHazards) {
    const double l = std::clamp(levels[index_of(h)], 0.0, 1.0);
    VoiceFrame f;
    f.id = "rtl/" + std::string(to_string(h));
    f.category = SourceCategory::Rtl;
    f.position = where;
    f.params = rtl_params(set_, h, l, c_);
    // Hazards the source is not sensing stay silent.
    if (l <= 0.0) f.params.gains = {0.0, 0.0};
    frames.push_back(f);
  }
  return frames;
}

AudioBlock SessionAudio::render(const WorldState& world, const HazardField& field, Eigen::Index frames) {
  std::vector<SceneSource> sources;
  const auto rtl = rtl_frames(world, field);
  for (HazardType h : kAllHazards) {
    Voice& v = rtl_[index_of(h)];
    const VoiceFrame* f = nullptr;
    for (const auto& fr : rtl)
      if (fr.id == "rtl/" + std::string(to_string(h))) f = &fr;
    SynthParams p = f ? f->params : v.params();
    if (!f) p.gains = {0.0, 0.0};
    SceneSource s;
    s.category = SourceCategory::Rtl;
    s.position = f ? f->position : world.avatar.position;
    s.block = v.render(p, static_cast<int>(frames));
    sources.push_back(std::move(s));
  }

  const double phase = world.alerts.loop_phase();
  for (const auto& [key, ch] : world.alerts.channels()) {
    if (!ch.high_active) continue;
    const Robot* r = world.find_robot(key.robot);
    SceneSource s;
    s.category = SourceCategory::Alert;
    s.position = r ? r->position : world.avatar.position;
    s.block = render_alert_loop(set_, key.hazard, phase, frames, fs_);
    sources.push_back(std::move(s));
  }

  for (auto& p : pending_) {
    if (!p.robot.empty())
      if (const Robot* r = world.find_robot(p.robot)) p.position = r->position;
    SceneSource s;
    s.category = p.category;
    s.position = p.position;
    s.block = p.block.slice(p.offset, frames);
    p.offset += frames;
    sources.push_back(std::move(s));
  }
  std::erase_if(pending_, [](const Pending& p) { return p.offset >= p.block.frames(); });

  const ListenerPose listener{world.avatar.position, world.avatar.heading};
  return mix_scene(mixer_, sources, listener, world.alerts, world.grid, listening_mode(world), frames);
}

}  // namespace hazsim::sound
