#include "hazsim/sound/earcons.hpp"

#include "hazsim/sound/voice.hpp"

#include <algorithm>
#include <cmath>

namespace hazsim::sound {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kAlertAmp = 0.45;

double note_envelope(double tn, double length) {
  const double attack = std::min(1.0, tn / 0.005);
  const double release = std::clamp((length - tn) / 0.010, 0.0, 1.0);
  return attack * release * std::exp(-tn / 0.12);
}

/// Stateless tone for one note; `tn` is time since note onset.
double timbre(SoundSet set, HazardType hazard, double f, double tn) {
  const double p = f * tn;
  if (set == SoundSet::Cog) {
    switch (hazard) {
      case HazardType::Radiation:  // bright ping with a fast-decaying upper partial
        return 0.75 * std::sin(kTwoPi * p) + 0.25 * std::exp(-tn / 0.01) * std::sin(kTwoPi * 3.0 * p);
      case HazardType::FlammableGas:  // metallic inharmonic partials
        return 0.5 * std::sin(kTwoPi * p) + 0.3 * std::sin(kTwoPi * 2.76 * p) + 0.2 * std::sin(kTwoPi * 5.4 * p);
      case HazardType::Temperature:  // vibrato sine
        return std::sin(kTwoPi * p + 0.6 * std::sin(kTwoPi * 30.0 * tn));
    }
  }
  switch (hazard) {
    case HazardType::Radiation: return std::sin(kTwoPi * p);
    case HazardType::FlammableGas:  // odd harmonics
      return 0.75 * (std::sin(kTwoPi * p) + std::sin(kTwoPi * 3 * p) / 3 + std::sin(kTwoPi * 5 * p) / 5);
    case HazardType::Temperature: {  // band-limited saw
      double s = 0.0;
      for (int k = 1; k <= 6; ++k) s += std::sin(kTwoPi * k * p) / k;
      return 0.55 * s;
    }
  }
  return 0.0;
}

}  // namespace

double alert_base_hz(HazardType hazard) {
  switch (hazard) {
    case HazardType::Radiation: return 930.0;
    case HazardType::FlammableGas: return 680.0;
    case HazardType::Temperature: return 470.0;
  }
  return 600.0;
}

double alert_loop_sample(SoundSet set, HazardType hazard, double t) {
  const double tp = std::fmod(std::max(t, 0.0), kAlertPeriodSeconds);
  const int note = static_cast<int>(tp / kAlertNoteSeconds);
  if (note >= kAlertNotes) return 0.0;
  const double tn = tp - note * kAlertNoteSeconds;
  const double f = alert_base_hz(hazard) * kAlertRatios[note];
  return kAlertAmp * note_envelope(tn, kAlertNoteSeconds) * timbre(set, hazard, f, tn);
}

AudioBlock render_alert_loop(SoundSet set, HazardType hazard, double phase_start, Eigen::Index frames,
                             int sample_rate) {
  AudioBlock out = AudioBlock::mono(frames, sample_rate);
  for (Eigen::Index i = 0; i < frames; ++i)
    out.samples(i, 0) = static_cast<float>(alert_loop_sample(set, hazard, phase_start + double(i) / sample_rate));
  return out;
}

AudioBlock render_medium_earcon(SoundSet set, HazardType hazard, bool rising, int sample_rate) {
  const std::array<int, 2> notes = rising ? std::array<int, 2>{0, 2} : std::array<int, 2>{2, 0};
  const double gap = 0.03;
  const Eigen::Index frames = static_cast<Eigen::Index>((2 * kAlertNoteSeconds + gap) * sample_rate);
  AudioBlock out = AudioBlock::mono(frames, sample_rate);
  for (Eigen::Index i = 0; i < frames; ++i) {
    const double t = double(i) / sample_rate;
    const int slot = t < kAlertNoteSeconds ? 0 : (t >= kAlertNoteSeconds + gap ? 1 : -1);
    if (slot < 0) continue;
    const double tn = slot == 0 ? t : t - kAlertNoteSeconds - gap;
    if (tn >= kAlertNoteSeconds) continue;
    const double f = alert_base_hz(hazard) * kAlertRatios[notes[slot]];
    out.samples(i, 0) = static_cast<float>(0.8 * kAlertAmp * note_envelope(tn, kAlertNoteSeconds) * timbre(set, hazard, f, tn));
  }
  return out;
}

std::string_view to_string(GruntKind k) {
  switch (k) {
    case GruntKind::AlertPrelude: return "alert_prelude";
    case GruntKind::Accept: return "accept";
    case GruntKind::Reject: return "reject";
    case GruntKind::Tag: return "tag";
    case GruntKind::WaypointSet: return "waypoint_set";
    case GruntKind::WaypointRemoved: return "waypoint_removed";
  }
  return "grunt";
}

AudioBlock render_grunt(GruntKind kind, int sample_rate) {
  struct Syllable {
    double f0, f1, length;
  };
  std::vector<Syllable> syl;
  switch (kind) {
    case GruntKind::AlertPrelude: syl = {{120, 105, 0.11}, {135, 110, 0.14}}; break;
    case GruntKind::Accept: syl = {{150, 175, 0.07}, {185, 210, 0.08}}; break;
    case GruntKind::Reject: syl = {{200, 170, 0.08}, {150, 120, 0.10}}; break;
    case GruntKind::Tag: syl = {{180, 165, 0.09}}; break;
    case GruntKind::WaypointSet: syl = {{220, 240, 0.06}}; break;
    case GruntKind::WaypointRemoved: syl = {{170, 150, 0.06}}; break;
  }
  const double gap = 0.04;
  double total = 0.0;
  for (const auto& s : syl) total += s.length + gap;
  AudioBlock out = AudioBlock::mono(static_cast<Eigen::Index>(total * sample_rate), sample_rate);
  Eigen::Index at = 0;
  for (const auto& s : syl) {
    const Eigen::Index n = static_cast<Eigen::Index>(s.length * sample_rate);
    double phase = 0.0;
    for (Eigen::Index i = 0; i < n && at + i < out.frames(); ++i) {
      const double u = double(i) / n;
      const double f = s.f0 + (s.f1 - s.f0) * u;
      phase += f / sample_rate;
      double v = 0.0;
      for (int k = 1; k <= 8; ++k) v += std::sin(kTwoPi * k * phase) / (k * k);
      const double env = std::min(1.0, u / 0.08) * std::pow(1.0 - u, 1.5);
      out.samples(at + i, 0) = static_cast<float>(0.5 * env * v);
    }
    at += n + static_cast<Eigen::Index>(gap * sample_rate);
  }
  return out;
}

EarconDescriptor notification(SoundSet set, HazardType hazard, const SoundConstants& c) {
  EarconDescriptor d;
  d.set = set;
  d.hazard = hazard;
  d.reference_level = 0.7;
  d.duration = (set == SoundSet::Cog && hazard == HazardType::FlammableGas) ? 0.8 : 0.6;
  d.params = rtl_params(set, hazard, d.reference_level, c);
  return d;
}

AudioBlock render_notification(const EarconDescriptor& d, int sample_rate, std::uint64_t seed, const SoundConstants& c) {
  Voice v(sample_rate, seed, c);
  const int frames = static_cast<int>(std::lround(d.duration * sample_rate));
  AudioBlock out = v.render(d.params, frames);
  const int fade = static_cast<int>(0.05 * sample_rate);
  for (int i = 0; i < fade && i < frames; ++i) out.samples(frames - 1 - i, 0) *= float(double(i) / fade);
  return out;
}

bool NotificationGate::allow(const std::string& robot, HazardType hazard, double time_s) {
  const auto key = std::make_pair(robot, hazard);
  const auto it = last_.find(key);
  if (it != last_.end() && time_s - it->second < cooldown_) return false;
  last_[key] = time_s;
  return true;
}

Flanger::Flanger(int sample_rate, double rate_hz) : fs_(sample_rate), rate_(rate_hz) {}

void Flanger::process(AudioBlock& block, double wet) {
  constexpr int kVoices = 4;
  constexpr double kBaseMs[kVoices] = {1.0, 2.0, 3.0, 4.0};
  constexpr double kDepthMs = 2.0;
  const std::size_t len = static_cast<std::size_t>(0.010 * fs_) + 2;
  if (lines_.size() != static_cast<std::size_t>(block.channels()))
    lines_.assign(block.channels(), std::vector<float>(len, 0.0f));
  wet = std::clamp(wet, 0.0, 1.0);
  for (Eigen::Index i = 0; i < block.frames(); ++i) {
    double taps[kVoices];
    for (int v = 0; v < kVoices; ++v) {
      const double mod = 0.5 + 0.5 * std::sin(kTwoPi * phase_ + v * M_PI / 2);
      taps[v] = (kBaseMs[v] + kDepthMs * mod) * 1e-3 * fs_;
    }
    for (int c = 0; c < block.channels(); ++c) {
      auto& line = lines_[c];
      const float x = block.samples(i, c);
      line[write_] = x;
      double acc = 0.0;
      for (double d : taps) {
        const double pos = double(write_) + len - d;
        const std::size_t i0 = static_cast<std::size_t>(pos) % len;
        const double frac = pos - std::floor(pos);
        acc += (1.0 - frac) * line[i0] + frac * line[(i0 + 1) % len];
      }
      // Convex mix: output magnitude never exceeds the input's running peak.
      block.samples(i, c) = static_cast<float>((1.0 - 0.5 * wet) * x + 0.5 * wet * acc / kVoices);
    }
    write_ = (write_ + 1) % len;
    phase_ = std::fmod(phase_ + rate_ / fs_, 1.0);
  }
}

}  // namespace hazsim::sound
