#pragma once

#include "hazsim/sound/audio_block.hpp"
#include "hazsim/sound/params.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <string_view>

namespace hazsim::decode {

using sound::AudioBlock;
using sound::FeatureKind;

/// Input too short (< 1 s) or effectively silent.
struct NoSignal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FeatureEstimate {
  FeatureKind kind = FeatureKind::Pitch;
  double value = 0.0;
  double confidence = 0.0;  // 0 means the value is unusable

  bool usable() const { return confidence > 0.0; }
  std::string_view unit() const;
};

struct DecoderConfig {
  int window = 4096;
  int hop = 1024;
  double min_duration = 1.0;     // s
  double silence_rms = 1e-4;
  double envelope_window = 0.010;  // s
  double envelope_hop = 0.0025;    // s
};

/// Autocorrelation pitch over `window`-sample frames, median across voiced frames.
FeatureEstimate estimate_pitch(const AudioBlock& block, const DecoderConfig& cfg = {}, double fmin = 40.0,
                               double fmax = 2000.0);
/// Onsets of the highpassed short-time envelope, divided by the block duration.
FeatureEstimate estimate_click_rate(const AudioBlock& block, const DecoderConfig& cfg = {});
/// Autocorrelation of the smoothed amplitude envelope.
FeatureEstimate estimate_beat_rate(const AudioBlock& block, const DecoderConfig& cfg = {});
/// 95% energy rolloff of the averaged power spectrum after a +6 dB/octave
/// tilt, which flattens sawtooth-like spectra so the rolloff follows a lowpass.
FeatureEstimate estimate_cutoff(const AudioBlock& block, const DecoderConfig& cfg = {});
/// Largest peak of the envelope spectrum between 0.2 and 30 Hz.
FeatureEstimate estimate_mod_rate(const AudioBlock& block, const DecoderConfig& cfg = {});

/// Hann-weighted short-time RMS of the channel mixdown.
Eigen::ArrayXd envelope(const Eigen::ArrayXf& x, int sample_rate, double window_s, double hop_s);

struct LevelEstimate {
  double level = 0.0;
  FeatureEstimate feature;
};

/// Picks the estimator for (set, hazard), inverts the mapping and clamps to [0, 1].
LevelEstimate invert_level(sound::SoundSet set, HazardType hazard, const AudioBlock& block,
                           const DecoderConfig& cfg = {},
                           const sound::SoundConstants& c = sound::default_constants());

}  // namespace hazsim::decode
