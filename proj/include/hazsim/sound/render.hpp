#pragma once

#include "hazsim/sound/audio_block.hpp"
#include "hazsim/sound/params.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace hazsim::sound {

/// Level as a function of time, in a serialisable form.
struct LevelTrajectory {
  enum class Kind { Constant, Keyframes, GaussianSweep };

  Kind kind = Kind::Constant;
  double level = 0.0;                              // Constant
  std::vector<std::pair<double, double>> points;   // Keyframes: (time s, level), linear between
  double mu = 0.0, sigma = 0.35, sweep_duration = 16.0;  // GaussianSweep

  static LevelTrajectory constant(double level);
  static LevelTrajectory keyframes(std::vector<std::pair<double, double>> points);
  static LevelTrajectory gaussian_sweep(double mu, double sigma, double sweep_duration);

  /// Level at time t, clamped to [0, 1].
  double at(double t) const;
};

nlohmann::json to_json(const LevelTrajectory& t);
LevelTrajectory trajectory_from_json(const nlohmann::json& j);

/// Position of the left-right-left traversal at time t: -1 at 0, +1 at T/2, -1 at T.
double sweep_position(double t, double sweep_duration);
/// Gaussian level of a position for a hidden maximum at mu.
double gaussian_level(double position, double mu, double sigma);

struct RenderRequest {
  SoundSet set = SoundSet::Comp;
  HazardType hazard = HazardType::Radiation;
  LevelTrajectory trajectory;
  double duration = 2.0;
  int sample_rate = kDefaultSampleRate;
  std::uint64_t seed = 1;
};

/// Offline, unspatialised render: the level is sampled at the start of each
/// 256-frame block and fed through `rtl_params` into one voice. Throws
/// std::invalid_argument for a non-positive duration or sample rate.
AudioBlock render_trajectory(const RenderRequest& request, const SoundConstants& c = default_constants());

AudioBlock render_trajectory(SoundSet set, HazardType hazard, const std::function<double(double)>& level,
                             double duration, int sample_rate = kDefaultSampleRate, std::uint64_t seed = 1,
                             const SoundConstants& c = default_constants());

/// Sidecar describing a render for reproduction.
nlohmann::json render_manifest(const RenderRequest& request, const std::string& audio_file,
                               const SoundConstants& c = default_constants());
RenderRequest request_from_manifest(const nlohmann::json& manifest);

}  // namespace hazsim::sound
