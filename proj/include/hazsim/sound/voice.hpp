#pragma once

#include "hazsim/sound/audio_block.hpp"
#include "hazsim/sound/dsp.hpp"
#include "hazsim/sound/params.hpp"

#include <array>
#include <cstdint>

namespace hazsim::sound {

/// Stateful synthesis voice. Consecutive `render` calls are phase-continuous;
/// continuous parameters glide to new values over `ramp_seconds`. Event-rate
/// parameters (click rate, chirp probability, grain interval) apply from the
/// next scheduled event. A change of voice kind restarts the voice.
class Voice {
 public:
  explicit Voice(int sample_rate = kDefaultSampleRate, std::uint64_t seed = 1,
                 const SoundConstants& constants = default_constants());

  /// Mono block of `frames` samples. Throws std::invalid_argument for frames <= 0
  /// or invalid params.
  AudioBlock render(const SynthParams& params, int frames);

  const SynthParams& params() const { return params_; }
  int sample_rate() const { return fs_; }

 private:
  void retarget(const SynthParams& p);
  void restart(const SynthParams& p);
  double interval_samples(double seconds) const { return seconds * fs_; }
  double next_click_interval();

  float click_sample();
  float grain_sample();
  float fm_sample();
  float sine_sample();
  float noise_lfo_sample();
  float dual_saw_sample();

  int fs_;
  SoundConstants c_;
  dsp::Noise noise_;
  SynthParams params_;
  bool started_ = false;
  int ramp_len_;

  dsp::Ramp<double> freq_, lfo_, fm_rate_, fm_depth_, cutoff_, gain0_, gain1_;
  double phase_ = 0, phase2_ = 0, lfo_phase_ = 0, fm_phase_ = 0, sweep_phase_ = 0;

  // Click voice.
  double to_next_event_ = 0;
  int click_age_ = -1;
  int chirp_age_ = -1;
  double chirp_phase_ = 0;

  // Grain voice.
  int grain_age_ = -1;
  int grain_len_ = 0;
  std::array<dsp::Biquad<double>, 4> resonators_;
  std::array<dsp::Allpass1<double>, 4> phaser_;

  // Dual saw.
  dsp::ButterworthLowpass<double> lowpass_;
  double designed_cutoff_ = -1;

  int counter_ = 0;
};

/// Free-function form of Voice::render.
inline AudioBlock synth_block(Voice& voice, const SynthParams& params, int frames) {
  return voice.render(params, frames);
}

}  // namespace hazsim::sound
