#include "hazsim/sound/mixer.hpp"

#include "hazsim/world.hpp"

#include <cmath>

namespace hazsim::sound {

std::string_view to_string(SourceCategory c) {
  switch (c) {
    case SourceCategory::Rtl: return "rtl";
    case SourceCategory::Notification: return "notification";
    case SourceCategory::Alert: return "alert";
    case SourceCategory::UiFeedback: return "ui";
  }
  return "rtl";
}

std::string_view to_string(ListeningMode m) {
  switch (m) {
    case ListeningMode::Off: return "off";
    case ListeningMode::RobotRtl: return "robot_rtl";
    case ListeningMode::SelfRtl: return "self_rtl";
  }
  return "off";
}

double distance_gain(double distance, double ref_distance) {
  if (!(distance > ref_distance)) return 1.0;
  return ref_distance / distance;
}

std::pair<double, double> pan_gains(const Eigen::Vector2d& source, const ListenerPose& listener) {
  const Eigen::Vector2d d = source - listener.position;
  double pan = 0.0;  // -1 left, +1 right
  if (d.norm() > 1e-9) pan = -std::sin(std::atan2(d.y(), d.x()) - listener.heading);
  const double theta = (pan + 1.0) * M_PI / 4.0;
  return {std::cos(theta), std::sin(theta)};
}

SceneMixer::SceneMixer(int sample_rate, MixerConfig config) : fs_(sample_rate), cfg_(config), flanger_(sample_rate) {
  for (auto& f : duck_lp_) f.lowpass(fs_, cfg_.duck_cutoff, M_SQRT1_2);
}

AudioBlock SceneMixer::mix(const std::vector<SceneSource>& sources, const ListenerPose& listener,
                           const MixContext& ctx, Eigen::Index frames) {
  AudioBlock bus = AudioBlock::stereo(frames, fs_);
  AudioBlock alert_bus = AudioBlock::stereo(frames, fs_);
  for (const auto& s : sources) {
    if (s.category == SourceCategory::Rtl && ctx.mode == ListeningMode::SelfRtl && !ctx.listener_tile_covered)
      continue;
    double gl, gr;
    if (s.category == SourceCategory::UiFeedback) {
      gl = gr = M_SQRT1_2;
    } else {
      const double g = distance_gain((s.position - listener.position).norm(), cfg_.ref_distance);
      const auto [l, r] = pan_gains(s.position, listener);
      gl = g * l;
      gr = g * r;
    }
    AudioBlock& target = s.category == SourceCategory::Alert ? alert_bus : bus;
    const Eigen::Index n = std::min(frames, s.block.frames());
    const auto x = s.block.channel(0).head(n);
    target.samples.col(0).head(n) += x * static_cast<float>(gl);
    target.samples.col(1).head(n) += x * static_cast<float>(gr);
  }

  const int ramp = std::max(1, static_cast<int>(cfg_.duck_ramp * fs_));
  const double duck_target = ctx.high_alert_active ? 1.0 : 0.0;
  if (duck_.target() != duck_target) duck_.set(duck_target, ramp);
  const double duck_floor = dsp::db_to_gain(cfg_.duck_db);
  for (Eigen::Index i = 0; i < frames; ++i) {
    const double m = duck_.next();
    const double g = 1.0 - m * (1.0 - duck_floor);
    for (int c = 0; c < 2; ++c) {
      const double dry = bus.samples(i, c);
      const double lp = duck_lp_[c].process(dry);
      bus.samples(i, c) = static_cast<float>(g * ((1.0 - m) * dry + m * lp));
    }
  }

  const int framp = std::max(1, static_cast<int>(cfg_.flanger_ramp * fs_));
  const double want = ctx.flanger_active ? 1.0 : 0.0;
  if (flanger_wet_.target() != want) flanger_wet_.set(want, framp);
  // Wet amount is held per block; the ramp keeps block-to-block steps small.
  double wet = flanger_wet_.value();
  for (Eigen::Index i = 0; i < frames; ++i) wet = flanger_wet_.next();
  flanger_.process(alert_bus, wet);

  AudioBlock out = AudioBlock::stereo(frames, fs_);
  out.samples = bus.samples + alert_bus.samples;
  const double release = 1.0 / std::max(1.0, cfg_.limiter_release * fs_);
  for (Eigen::Index i = 0; i < frames; ++i) {
    const double peak = std::max(std::abs(out.samples(i, 0)), std::abs(out.samples(i, 1)));
    const double need = peak > cfg_.limiter_ceiling ? cfg_.limiter_ceiling / peak : 1.0;
    limiter_gain_ = std::min({1.0, limiter_gain_ + release, need});
    for (int c = 0; c < 2; ++c) {
      const float y = static_cast<float>(out.samples(i, c) * limiter_gain_);
      out.samples(i, c) = std::clamp(y, static_cast<float>(-cfg_.limiter_ceiling), static_cast<float>(cfg_.limiter_ceiling));
    }
  }
  return out;
}

AudioBlock mix_scene(SceneMixer& mixer, const std::vector<SceneSource>& sources, const ListenerPose& listener,
                     const AlertState& alerts, const GridWorld& coverage, ListeningMode mode, Eigen::Index frames) {
  MixContext ctx;
  ctx.high_alert_active = alerts.any_high_active();
  ctx.flanger_active = alerts.any_flanger_active();
  ctx.mode = mode;
  const auto tile = coverage.tile_of(listener.position);
  ctx.listener_tile_covered = tile && coverage.covered(*tile);
  return mixer.mix(sources, listener, ctx, frames);
}

}  // namespace hazsim::sound
