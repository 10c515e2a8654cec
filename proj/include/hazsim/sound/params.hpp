#pragma once

#include "hazsim/hazard_field.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace hazsim::sound {

enum class SoundSet { Cog, Comp };

std::string_view to_string(SoundSet s);
std::optional<SoundSet> parse_sound_set(std::string_view s);
inline constexpr std::array<SoundSet, 2> kAllSoundSets{SoundSet::Cog, SoundSet::Comp};

enum class VoiceKind {
  Silent,
  Click,     // jittered noise clicks plus optional chirps
  Grain,     // reverse-swell metallic noise grains
  FmSine,    // sine with FM and amplitude LFO
  Sine,      // pure sine
  NoiseLfo,  // white noise under a raised-cosine amplitude LFO
  DualSaw,   // 55 Hz saw plus pulse-width 110 Hz saw through a lowpass
};

std::string_view to_string(VoiceKind k);
std::optional<VoiceKind> parse_voice_kind(std::string_view s);

/// Parameters for one synthesis voice. Fields a voice kind does not use stay zero.
struct SynthParams {
  VoiceKind kind = VoiceKind::Silent;
  double frequency = 0.0;       // Hz
  double click_rate = 0.0;      // clicks/s
  double chirp_probability = 0.0;
  double lfo_rate = 0.0;        // amplitude LFO, Hz
  double fm_rate = 0.0;         // Hz
  double fm_depth = 0.0;        // Hz
  double cutoff = 0.0;          // lowpass, Hz
  std::array<double, 2> gains{0.0, 0.0};
  double grain_interval = 0.0;  // s

  friend bool operator==(const SynthParams&, const SynthParams&) = default;
};

/// Throws std::invalid_argument if frequencies leave [0, 20000] or gains are negative.
void validate(const SynthParams& p);

nlohmann::json to_json(const SynthParams& p);
SynthParams synth_params_from_json(const nlohmann::json& j);

/// Every constant the mappings and voices read. One table so the reference
/// renderer and remote clients agree.
struct SoundConstants {
  struct CogRadiation {
    double rate_min = 3.0, rate_max = 40.0;  // clicks/s
    double jitter_shape = 4.0;               // gamma shape of inter-click intervals
    double chirp_onset_level = 0.8;
    double chirp_max_probability = 0.25;  // per click, at level 1
    double chirp_duration = 0.040;
    double chirp_f0 = 2000.0, chirp_f1 = 4000.0;
    double chirp_gain = 0.18;
    double click_decay = 0.0004;  // s
    double click_length = 0.003;  // s
    double gain = 0.8;
  } cog_radiation;

  struct CogGas {
    double interval_max = 1.2, interval_min = 0.12;  // s
    double grain_duty = 0.6;                         // grain length / interval
    double swell_curve = 4.0;                        // exponential reverse-swell steepness
    double release = 0.005;                          // s
    std::array<double, 4> resonator_hz{1180.0, 1930.0, 3170.0, 4870.0};
    double resonator_q = 8.0;
    double phaser_rate = 0.3;  // Hz
    double phaser_min_hz = 600.0, phaser_max_hz = 3000.0;
    double gain = 0.8;
  } cog_gas;

  struct CogTemperature {
    double frequency = 220.0;
    double lfo_min = 0.5, lfo_max = 8.0;
    double fm_ratio = 1.0;  // modulator / carrier
    double fm_depth_max = 60.0;
    double lfo_depth = 0.7;
    double gain = 0.5;
  } cog_temperature;

  struct CompRadiation {
    double base = 220.0;
    double octaves = 2.0;
    double gain = 0.5;
  } comp_radiation;

  struct CompGas {
    double lfo_min = 0.5, lfo_max = 10.0;
    double gain = 0.5;
  } comp_gas;

  struct CompTemperature {
    double low_hz = 55.0, high_hz = 110.0;
    double pulse_duty = 0.8;
    double cutoff_min = 100.0, cutoff_max = 20000.0;
    int filter_sections = 4;  // cascaded Butterworth biquads
    double gain = 0.35;
  } comp_temperature;

  double ramp_seconds = 0.010;
};

const SoundConstants& default_constants();
nlohmann::json to_json(const SoundConstants& c);

/// Level-to-parameter mapping for real-time listening. Throws std::invalid_argument
/// for a level outside [0, 1].
SynthParams rtl_params(SoundSet set, HazardType hazard, double level,
                       const SoundConstants& c = default_constants());

/// The mapped quantity the decoder recovers for (set, hazard), in the mapping's own units.
enum class FeatureKind { ClickRate, Pitch, BeatRate, Cutoff, LfoRate, GrainRate };
std::string_view to_string(FeatureKind k);

FeatureKind primary_feature(SoundSet set, HazardType hazard);
/// Value of the primary feature at `level`.
double primary_feature_value(SoundSet set, HazardType hazard, double level,
                             const SoundConstants& c = default_constants());
/// Analytic inverse of `primary_feature_value`, clamped to [0, 1].
double level_from_feature(SoundSet set, HazardType hazard, double value,
                          const SoundConstants& c = default_constants());

}  // namespace hazsim::sound
