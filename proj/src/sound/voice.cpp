#include "hazsim/sound/voice.hpp"

#include <cmath>
#include <stdexcept>

namespace hazsim::sound {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
constexpr int kRetuneEvery = 16;
}  // namespace

Voice::Voice(int sample_rate, std::uint64_t seed, const SoundConstants& constants)
    : fs_(sample_rate),
      c_(constants),
      noise_(seed),
      ramp_len_(std::max(1, static_cast<int>(std::lround(constants.ramp_seconds * sample_rate)))),
      lowpass_(constants.comp_temperature.filter_sections) {
  if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
}

double Voice::next_click_interval() {
  const double rate = params_.click_rate;
  if (rate <= 0.0) return 1e12;
  const double shape = c_.cog_radiation.jitter_shape;
  return interval_samples(noise_.gamma(shape, 1.0 / (rate * shape)));
}

void Voice::restart(const SynthParams& p) {
  params_ = p;
  freq_.jump(p.frequency);
  lfo_.jump(p.lfo_rate);
  fm_rate_.jump(p.fm_rate);
  fm_depth_.jump(p.fm_depth);
  cutoff_.jump(p.cutoff);
  gain0_.jump(0.0);
  gain1_.jump(0.0);
  gain0_.set(p.gains[0], ramp_len_);
  gain1_.set(p.gains[1], ramp_len_);
  phase_ = phase2_ = lfo_phase_ = fm_phase_ = sweep_phase_ = 0.0;
  click_age_ = chirp_age_ = grain_age_ = -1;
  chirp_phase_ = 0.0;
  grain_len_ = 0;
  designed_cutoff_ = -1.0;
  lowpass_.reset();
  counter_ = 0;
  switch (p.kind) {
    case VoiceKind::Click: to_next_event_ = next_click_interval(); break;
    case VoiceKind::Grain: {
      to_next_event_ = 0.0;
      const auto& g = c_.cog_gas;
      for (std::size_t i = 0; i < resonators_.size(); ++i) {
        resonators_[i].reset();
        resonators_[i].bandpass(fs_, g.resonator_hz[i], g.resonator_q);
      }
      break;
    }
    default: break;
  }
  started_ = true;
}

void Voice::retarget(const SynthParams& p) {
  if (!started_ || p.kind != params_.kind) {
    restart(p);
    return;
  }
  params_ = p;
  freq_.set(p.frequency, ramp_len_);
  lfo_.set(p.lfo_rate, ramp_len_);
  fm_rate_.set(p.fm_rate, ramp_len_);
  fm_depth_.set(p.fm_depth, ramp_len_);
  cutoff_.set(p.cutoff, ramp_len_);
  gain0_.set(p.gains[0], ramp_len_);
  gain1_.set(p.gains[1], ramp_len_);
}

AudioBlock Voice::render(const SynthParams& params, int frames) {
  if (frames <= 0) throw std::invalid_argument("frames must be positive");
  validate(params);
  retarget(params);
  AudioBlock out = AudioBlock::mono(frames, fs_);
  auto x = out.channel(0);
  switch (params_.kind) {
    case VoiceKind::Silent:
      for (int i = 0; i < frames; ++i) x[i] = 0.0f, gain0_.next(), gain1_.next();
      break;
    case VoiceKind::Click:
      for (int i = 0; i < frames; ++i) x[i] = click_sample();
      break;
    case VoiceKind::Grain:
      for (int i = 0; i < frames; ++i) x[i] = grain_sample();
      break;
    case VoiceKind::FmSine:
      for (int i = 0; i < frames; ++i) x[i] = fm_sample();
      break;
    case VoiceKind::Sine:
      for (int i = 0; i < frames; ++i) x[i] = sine_sample();
      break;
    case VoiceKind::NoiseLfo:
      for (int i = 0; i < frames; ++i) x[i] = noise_lfo_sample();
      break;
    case VoiceKind::DualSaw:
      for (int i = 0; i < frames; ++i) x[i] = dual_saw_sample();
      break;
  }
  return out;
}

float Voice::click_sample() {
  const auto& k = c_.cog_radiation;
  const double g = gain0_.next();
  to_next_event_ -= 1.0;
  while (to_next_event_ <= 0.0) {
    click_age_ = 0;
    if (params_.chirp_probability > 0.0 && chirp_age_ < 0 && noise_.uniform() < params_.chirp_probability) {
      chirp_age_ = 0;
      chirp_phase_ = 0.0;
    }
    to_next_event_ += next_click_interval();
  }
  double y = 0.0;
  if (click_age_ >= 0) {
    const double t = click_age_ / double(fs_);
    y += noise_.bipolar() * std::exp(-t / k.click_decay);
    if (++click_age_ >= static_cast<int>(k.click_length * fs_)) click_age_ = -1;
  }
  if (chirp_age_ >= 0) {
    const int len = static_cast<int>(k.chirp_duration * fs_);
    const double u = chirp_age_ / double(len);
    const double f = k.chirp_f0 * std::pow(k.chirp_f1 / k.chirp_f0, u);
    chirp_phase_ = dsp::wrap01(chirp_phase_ + f / fs_);
    const double env = 0.5 - 0.5 * std::cos(kTwoPi * u);
    y += (k.chirp_gain / k.gain) * env * std::sin(kTwoPi * chirp_phase_);
    if (++chirp_age_ >= len) chirp_age_ = -1;
  }
  return static_cast<float>(g * y);
}

float Voice::grain_sample() {
  const auto& k = c_.cog_gas;
  const double g = gain0_.next();
  if (counter_++ % kRetuneEvery == 0) {
    const double sweep = 0.5 - 0.5 * std::cos(kTwoPi * sweep_phase_);
    const double fc = k.phaser_min_hz * std::pow(k.phaser_max_hz / k.phaser_min_hz, sweep);
    for (auto& ap : phaser_) ap.tune(fs_, fc);
  }
  sweep_phase_ = dsp::wrap01(sweep_phase_ + k.phaser_rate / fs_);

  to_next_event_ -= 1.0;
  if (to_next_event_ <= 0.0 && params_.grain_interval > 0.0) {
    grain_age_ = 0;
    grain_len_ = std::max(1, static_cast<int>(k.grain_duty * params_.grain_interval * fs_));
    to_next_event_ += interval_samples(params_.grain_interval);
  }

  const double src = noise_.bipolar();
  double metal = 0.0;
  for (auto& r : resonators_) metal += r.process(src);
  const double dry = 2.5 * metal + 0.15 * src;
  double wet = dry;
  for (auto& ap : phaser_) wet = ap.process(wet);
  const double tone = 0.5 * (dry + wet);

  double env = 0.0;
  if (grain_age_ >= 0) {
    const double u = grain_age_ / double(grain_len_);
    env = std::expm1(k.swell_curve * u) / std::expm1(k.swell_curve);
    const double release = k.release * fs_;
    env *= std::min(1.0, (grain_len_ - grain_age_) / release);
    if (++grain_age_ >= grain_len_) grain_age_ = -1;
  }
  return static_cast<float>(g * std::tanh(env * tone));
}

float Voice::fm_sample() {
  const double g = gain0_.next();
  const double f = freq_.next(), depth = fm_depth_.next(), fm = fm_rate_.next(), lfo = lfo_.next();
  const double inst = f + depth * std::sin(kTwoPi * fm_phase_);
  fm_phase_ = dsp::wrap01(fm_phase_ + fm / fs_);
  const double amp = 1.0 - c_.cog_temperature.lfo_depth * (0.5 - 0.5 * std::cos(kTwoPi * lfo_phase_));
  lfo_phase_ = dsp::wrap01(lfo_phase_ + lfo / fs_);
  const double y = g * amp * std::sin(kTwoPi * phase_);
  phase_ = dsp::wrap01(phase_ + inst / fs_);
  return static_cast<float>(y);
}

float Voice::sine_sample() {
  const double g = gain0_.next();
  const double f = freq_.next();
  const double y = g * std::sin(kTwoPi * phase_);
  phase_ = dsp::wrap01(phase_ + f / fs_);
  return static_cast<float>(y);
}

float Voice::noise_lfo_sample() {
  const double g = gain0_.next();
  const double lfo = lfo_.next();
  const double amp = 0.5 - 0.5 * std::cos(kTwoPi * lfo_phase_);
  lfo_phase_ = dsp::wrap01(lfo_phase_ + lfo / fs_);
  return static_cast<float>(g * amp * noise_.bipolar());
}

float Voice::dual_saw_sample() {
  const auto& k = c_.comp_temperature;
  const double g0 = gain0_.next(), g1 = gain1_.next();
  const double fc = cutoff_.next();
  if (fc != designed_cutoff_ && (counter_ % kRetuneEvery == 0 || designed_cutoff_ < 0)) {
    lowpass_.design(fs_, fc);
    designed_cutoff_ = fc;
  }
  ++counter_;
  const double f = freq_.next();
  const double low = 2.0 * phase_ - 1.0;
  const double s1 = 2.0 * phase2_ - 1.0;
  const double s2 = 2.0 * dsp::wrap01(phase2_ + k.pulse_duty) - 1.0;
  const double pulse = 0.5 * (s1 - s2);
  phase_ = dsp::wrap01(phase_ + f / fs_);
  phase2_ = dsp::wrap01(phase2_ + f * (k.high_hz / k.low_hz) / fs_);
  return static_cast<float>(lowpass_.process(g0 * low + g1 * pulse));
}

}  // namespace hazsim::sound
