#pragma once

#include "hazsim/sound/audio_block.hpp"
#include "hazsim/sound/params.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hazsim::sound {

// High-priority alert loop: five ascending notes off any musical scale, then a rest.
inline constexpr int kAlertNotes = 5;
inline constexpr double kAlertNoteSeconds = 0.090;
inline constexpr double kAlertPeriodSeconds = 0.750;
inline constexpr std::array<double, kAlertNotes> kAlertRatios{1.0, 1.137, 1.311, 1.486, 1.733};

double alert_base_hz(HazardType hazard);

/// Alert loop sample at `t` seconds of loop phase. Pure in t, so every alert
/// reading the shared phase clock is sample-aligned.
double alert_loop_sample(SoundSet set, HazardType hazard, double t);
AudioBlock render_alert_loop(SoundSet set, HazardType hazard, double phase_start, Eigen::Index frames,
                             int sample_rate = kDefaultSampleRate);

/// Two-note motif in the alert timbre; rising and falling reverse the note order.
AudioBlock render_medium_earcon(SoundSet set, HazardType hazard, bool rising, int sample_rate = kDefaultSampleRate);

enum class GruntKind { AlertPrelude, Accept, Reject, Tag, WaypointSet, WaypointRemoved };
std::string_view to_string(GruntKind k);

/// Short tonal grunt. AlertPrelude is the first stage of the high alert.
AudioBlock render_grunt(GruntKind kind, int sample_rate = kDefaultSampleRate);

/// Notification earcon: a short snippet of the RTL voice at a fixed level.
struct EarconDescriptor {
  SoundSet set = SoundSet::Cog;
  HazardType hazard = HazardType::Radiation;
  double reference_level = 0.7;
  double duration = 0.6;  // s, at most 1
  SynthParams params;
};

EarconDescriptor notification(SoundSet set, HazardType hazard, const SoundConstants& c = default_constants());
AudioBlock render_notification(const EarconDescriptor& d, int sample_rate = kDefaultSampleRate, std::uint64_t seed = 1,
                               const SoundConstants& c = default_constants());

/// Suppresses repeat notifications for the same (robot, hazard) within the cooldown.
class NotificationGate {
 public:
  explicit NotificationGate(double cooldown_s = 10.0) : cooldown_(cooldown_s) {}
  bool allow(const std::string& robot, HazardType hazard, double time_s);
  double cooldown() const { return cooldown_; }

 private:
  double cooldown_;
  std::map<std::pair<std::string, HazardType>, double> last_;
};

/// 4-voice modulated comb on the alert bus.
class Flanger {
 public:
  explicit Flanger(int sample_rate = kDefaultSampleRate, double rate_hz = 0.25);
  /// Processes every channel in place. `wet` in [0, 1].
  void process(AudioBlock& block, double wet);

 private:
  int fs_;
  double rate_;
  double phase_ = 0.0;
  std::vector<std::vector<float>> lines_;
  std::size_t write_ = 0;
};

}  // namespace hazsim::sound
