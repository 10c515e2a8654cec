#pragma once

#include "hazsim/sound/alerts.hpp"
#include "hazsim/sound/audio_block.hpp"
#include "hazsim/sound/dsp.hpp"
#include "hazsim/sound/earcons.hpp"

#include <Eigen/Core>

#include <optional>
#include <string_view>
#include <vector>

namespace hazsim {
class GridWorld;
}

namespace hazsim::sound {

enum class SourceCategory { Rtl, Notification, Alert, UiFeedback };
std::string_view to_string(SourceCategory c);

enum class ListeningMode { Off, RobotRtl, SelfRtl };
std::string_view to_string(ListeningMode m);

struct SceneSource {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  AudioBlock block;  // mono
  SourceCategory category = SourceCategory::Rtl;
};

struct ListenerPose {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double heading = 0.0;  // radians, CCW from +x
};

struct MixerConfig {
  double ref_distance = 1.0;     // m
  double duck_db = -12.0;
  double duck_cutoff = 2000.0;   // Hz
  double duck_ramp = 0.020;      // s
  double flanger_ramp = 0.020;   // s
  double limiter_ceiling = 1.0;
  double limiter_release = 0.050;  // s
};

struct MixContext {
  bool high_alert_active = false;
  bool flanger_active = false;
  ListeningMode mode = ListeningMode::Off;
  bool listener_tile_covered = true;
};

/// min(1, ref / distance).
double distance_gain(double distance, double ref_distance);
/// Constant-power (left, right) gains for a source seen from the listener.
std::pair<double, double> pan_gains(const Eigen::Vector2d& source, const ListenerPose& listener);

/// Stateful stereo mixer: spatialisation, ducking, alert-bus flanger, limiter.
class SceneMixer {
 public:
  explicit SceneMixer(int sample_rate = kDefaultSampleRate, MixerConfig config = {});

  /// Mixes `frames` stereo frames. Shorter sources are zero-padded.
  AudioBlock mix(const std::vector<SceneSource>& sources, const ListenerPose& listener, const MixContext& ctx,
                 Eigen::Index frames);

  const MixerConfig& config() const { return cfg_; }
  /// Current duck amount in [0, 1]; 1 means fully ducked.
  double duck_amount() const { return duck_.value(); }

 private:
  int fs_;
  MixerConfig cfg_;
  dsp::Ramp<double> duck_, flanger_wet_;
  std::array<dsp::Biquad<double>, 2> duck_lp_;
  Flanger flanger_;
  double limiter_gain_ = 1.0;
};

/// Derives the mix context from alert state and coverage, then mixes.
AudioBlock mix_scene(SceneMixer& mixer, const std::vector<SceneSource>& sources, const ListenerPose& listener,
                     const AlertState& alerts, const GridWorld& coverage, ListeningMode mode, Eigen::Index frames);

}  // namespace hazsim::sound
