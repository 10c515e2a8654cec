#include "hazsim/decode/decoder.hpp"

#include "hazsim/sound/dsp.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

namespace hazsim::decode {

namespace {

Eigen::ArrayXd checked_mono(const AudioBlock& block, const DecoderConfig& cfg) {
  if (block.frames() == 0 || block.sample_rate <= 0) throw NoSignal("empty block");
  if (block.duration() + 1e-9 < cfg.min_duration) throw NoSignal("block shorter than the minimum duration");
  Eigen::ArrayXd x = block.mixdown().cast<double>();
  if (std::sqrt(x.square().mean()) < cfg.silence_rms) throw NoSignal("block is silent");
  return x;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Raw (biased) autocorrelation sums r[0..n-1].
Eigen::ArrayXd autocorr(const Eigen::ArrayXd& x) {
  const std::size_t n = static_cast<std::size_t>(x.size());
  const std::size_t m = next_pow2(2 * n);
  std::vector<double> buf(m, 0.0);
  std::copy(x.data(), x.data() + n, buf.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, buf);
  for (auto& s : spec) s = std::norm(s);
  std::vector<double> r;
  fft.inv(r, spec);
  Eigen::ArrayXd out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = r[i];
  return out;
}

/// Vertex offset in (-0.5, 0.5) of a parabola through three samples.
double parabolic(double a, double b, double c) {
  const double den = a - 2 * b + c;
  if (std::abs(den) < 1e-300) return 0.0;
  return std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Eigen::ArrayXd hann(int n) {
  return 0.5 - 0.5 * (Eigen::ArrayXd::LinSpaced(n, 0, n - 1) * (2 * M_PI / n)).cos();
}

struct Lag {
  double lag = 0.0;
  double height = 0.0;
};

/// First local maximum of a normalised autocorrelation in [lo, hi] reaching
/// `ratio` of the largest value there. Searching begins past the first zero
/// crossing when `after_zero` is set.
std::optional<Lag> pick_period(const Eigen::ArrayXd& r, Eigen::Index lo, Eigen::Index hi, double ratio,
                               bool after_zero) {
  hi = std::min<Eigen::Index>(hi, r.size() - 2);
  if (after_zero) {
    Eigen::Index z = 1;
    while (z < hi && r[z] > 0.0) ++z;
    lo = std::max(lo, z);
  }
  lo = std::max<Eigen::Index>(lo, 1);
  if (lo >= hi) return std::nullopt;
  const double top = r.segment(lo, hi - lo + 1).maxCoeff();
  if (!(top > 0.0)) return std::nullopt;
  for (Eigen::Index t = lo; t <= hi; ++t) {
    if (r[t] >= ratio * top && r[t] >= r[t - 1] && r[t] >= r[t + 1]) {
      const double off = parabolic(r[t - 1], r[t], r[t + 1]);
      const double h = r[t] - 0.25 * (r[t - 1] - r[t + 1]) * off;
      return Lag{t + off, h};
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view FeatureEstimate::unit() const {
  switch (kind) {
    case FeatureKind::ClickRate: return "clicks/s";
    case FeatureKind::Pitch:
    case FeatureKind::Cutoff:
    case FeatureKind::BeatRate:
    case FeatureKind::LfoRate:
    case FeatureKind::GrainRate: return "Hz";
  }
  return "";
}

Eigen::ArrayXd envelope(const Eigen::ArrayXf& x, int sample_rate, double window_s, double hop_s) {
  const int w = std::max(2, static_cast<int>(std::lround(window_s * sample_rate)));
  const int h = std::max(1, static_cast<int>(std::lround(hop_s * sample_rate)));
  if (x.size() < w) return Eigen::ArrayXd::Zero(0);
  const Eigen::Index frames = 1 + (x.size() - w) / h;
  const Eigen::ArrayXd win = hann(w);
  const double norm = win.sum();
  Eigen::ArrayXd env(frames);
  const Eigen::ArrayXd sq = x.cast<double>().square();
  for (Eigen::Index i = 0; i < frames; ++i) env[i] = std::sqrt((sq.segment(i * h, w) * win).sum() / norm);
  return env;
}

FeatureEstimate estimate_pitch(const AudioBlock& block, const DecoderConfig& cfg, double fmin, double fmax) {
  const Eigen::ArrayXd x = checked_mono(block, cfg);
  const double fs = block.sample_rate;
  const int w = std::min<int>(cfg.window, static_cast<int>(x.size()));
  const Eigen::Index lo = static_cast<Eigen::Index>(std::floor(fs / fmax));
  const Eigen::Index hi = static_cast<Eigen::Index>(std::ceil(fs / fmin));
  std::vector<double> pitches, heights;
  for (Eigen::Index start = 0; start + w <= x.size(); start += cfg.hop) {
    Eigen::ArrayXd seg = x.segment(start, w);
    seg -= seg.mean();
    Eigen::ArrayXd r = autocorr(seg);
    if (!(r[0] > 1e-12)) continue;
    r /= r[0];
    const auto lag = pick_period(r, lo, std::min<Eigen::Index>(hi, w / 2), 0.9, false);
    if (!lag || lag->height < 0.3) continue;
    pitches.push_back(fs / lag->lag);
    heights.push_back(std::clamp(lag->height, 0.0, 1.0));
  }
  FeatureEstimate e{FeatureKind::Pitch, 0.0, 0.0};
  if (pitches.empty()) return e;
  e.value = median(pitches);
  e.confidence = median(heights);
  return e;
}

FeatureEstimate estimate_click_rate(const AudioBlock& block, const DecoderConfig& cfg) {
  const Eigen::ArrayXd x = checked_mono(block, cfg);
  const double fs = block.sample_rate;
  // Clicks are broadband; chirps and tonal content sit below the highpass.
  sound::dsp::Biquad<double> hp1, hp2;
  hp1.highpass(fs, 6000.0, 0.5412);
  hp2.highpass(fs, 6000.0, 1.3066);
  Eigen::ArrayXf y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = static_cast<float>(hp2.process(hp1.process(x[i])));
  const Eigen::ArrayXd env = envelope(y, block.sample_rate, 0.001, 0.0005);
  FeatureEstimate e{FeatureKind::ClickRate, 0.0, 0.0};
  if (env.size() < 3) return e;
  const std::vector<double> v(env.data(), env.data() + env.size());
  const double floor = median(v);
  const double top = env.maxCoeff();
  if (!(top > floor)) return e;
  const double on = floor + 0.3 * (top - floor);
  const double off = floor + 0.15 * (top - floor);
  int count = 0;
  bool armed = true;
  for (Eigen::Index i = 0; i < env.size(); ++i) {
    if (armed && env[i] > on) {
      ++count;
      armed = false;
    } else if (!armed && env[i] < off) {
      armed = true;
    }
  }
  e.value = count / block.duration();
  e.confidence = count > 0 ? std::clamp(1.0 - floor / on, 0.0, 1.0) : 0.0;
  return e;
}

FeatureEstimate estimate_beat_rate(const AudioBlock& block, const DecoderConfig& cfg) {
  const Eigen::ArrayXd x = checked_mono(block, cfg);
  const double env_fs = 1.0 / cfg.envelope_hop;
  Eigen::ArrayXd env = envelope(x.cast<float>(), block.sample_rate, cfg.envelope_window, cfg.envelope_hop);
  FeatureEstimate e{FeatureKind::BeatRate, 0.0, 0.0};
  const Eigen::Index n = env.size();
  if (n < 8) return e;
  env -= env.mean();
  Eigen::ArrayXd r = autocorr(env);
  if (!(r[0] > 1e-18)) return e;
  // Unbiased normalisation so long lags are not penalised.
  for (Eigen::Index t = 0; t < n; ++t) r[t] /= double(n - t);
  r /= r[0];
  const Eigen::Index lo = static_cast<Eigen::Index>(env_fs / 25.0);
  const Eigen::Index hi = std::min<Eigen::Index>(static_cast<Eigen::Index>(2.5 * env_fs), (3 * n) / 4);
  const auto lag = pick_period(r, lo, hi, 0.8, true);
  if (!lag) return e;
  e.value = env_fs / lag->lag;
  e.confidence = std::clamp(lag->height, 0.0, 1.0);
  return e;
}

FeatureEstimate estimate_cutoff(const AudioBlock& block, const DecoderConfig& cfg) {
  const Eigen::ArrayXd x = checked_mono(block, cfg);
  const double fs = block.sample_rate;
  const int w = std::min<int>(cfg.window, static_cast<int>(x.size()));
  const Eigen::ArrayXd win = hann(w);
  const int bins = w / 2 + 1;
  Eigen::ArrayXd psd = Eigen::ArrayXd::Zero(bins);
  Eigen::FFT<double> fft;
  std::vector<double> buf(w);
  std::vector<std::complex<double>> spec;
  int frames = 0;
  for (Eigen::Index start = 0; start + w <= x.size(); start += cfg.hop) {
    for (int i = 0; i < w; ++i) buf[i] = x[start + i] * win[i];
    fft.fwd(spec, buf);
    for (int k = 0; k < bins; ++k) psd[k] += std::norm(spec[k]);
    ++frames;
  }
  FeatureEstimate e{FeatureKind::Cutoff, 0.0, 0.0};
  if (frames == 0) return e;
  psd /= frames;
  const Eigen::ArrayXd freq = Eigen::ArrayXd::LinSpaced(bins, 0, bins - 1) * (fs / w);
  const Eigen::ArrayXd tilted = psd * (freq / 1000.0).square();
  const double total = tilted.sum();
  if (!(total > 0.0)) return e;
  double acc = 0.0;
  const double target = 0.95 * total;
  for (int k = 0; k < bins; ++k) {
    if (acc + tilted[k] >= target) {
      const double frac = tilted[k] > 0 ? (target - acc) / tilted[k] : 0.0;
      e.value = (k - 0.5 + frac) * fs / w;
      break;
    }
    acc += tilted[k];
  }
  e.value = std::max(e.value, 0.0);
  // Tonal spectra are far from flat; broadband noise pushes flatness toward one.
  const Eigen::ArrayXd p = psd.segment(1, bins - 2) + 1e-30;
  const double flatness = std::exp(p.log().mean()) / p.mean();
  e.confidence = std::clamp(1.0 - flatness, 0.0, 1.0);
  return e;
}

FeatureEstimate estimate_mod_rate(const AudioBlock& block, const DecoderConfig& cfg) {
  const Eigen::ArrayXd x = checked_mono(block, cfg);
  const double env_fs = 1.0 / cfg.envelope_hop;
  Eigen::ArrayXd env = envelope(x.cast<float>(), block.sample_rate, cfg.envelope_window, cfg.envelope_hop);
  FeatureEstimate e{FeatureKind::LfoRate, 0.0, 0.0};
  const int n = static_cast<int>(env.size());
  if (n < 8) return e;
  env -= env.mean();
  env *= hann(n);
  const std::size_t m = next_pow2(16 * static_cast<std::size_t>(n));
  std::vector<double> buf(m, 0.0);
  std::copy(env.data(), env.data() + n, buf.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, buf);
  const std::size_t lo = std::max<std::size_t>(1, static_cast<std::size_t>(0.2 * m / env_fs));
  const std::size_t hi = std::min(m / 2 - 1, static_cast<std::size_t>(30.0 * m / env_fs));
  std::size_t best = lo;
  double band = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) {
    band += std::norm(spec[k]);
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  }
  if (!(band > 0.0)) return e;
  const double off =
      (best > lo && best < hi)
          ? parabolic(std::abs(spec[best - 1]), std::abs(spec[best]), std::abs(spec[best + 1]))
          : 0.0;
  e.value = (best + off) * env_fs / m;
  // Share of band energy inside the peak's main lobe (two Hann bins either side).
  const std::size_t lobe = 2 * m / n;
  double peak = 0.0;
  for (std::size_t k = best > lo + lobe ? best - lobe : lo; k <= std::min(hi, best + lobe); ++k)
    peak += std::norm(spec[k]);
  e.confidence = std::clamp(peak / band, 0.0, 1.0);
  return e;
}

LevelEstimate invert_level(sound::SoundSet set, HazardType hazard, const AudioBlock& block,
                           const DecoderConfig& cfg, const sound::SoundConstants& c) {
  FeatureEstimate f;
  const FeatureKind kind = sound::primary_feature(set, hazard);
  switch (kind) {
    case FeatureKind::ClickRate: f = estimate_click_rate(block, cfg); break;
    case FeatureKind::Pitch: f = estimate_pitch(block, cfg); break;
    case FeatureKind::BeatRate: f = estimate_beat_rate(block, cfg); break;
    case FeatureKind::GrainRate:
      f = estimate_beat_rate(block, cfg);
      f.kind = FeatureKind::GrainRate;
      break;
    case FeatureKind::Cutoff: f = estimate_cutoff(block, cfg); break;
    case FeatureKind::LfoRate: f = estimate_mod_rate(block, cfg); break;
  }
  LevelEstimate out;
  out.feature = f;
  out.level = f.usable() ? sound::level_from_feature(set, hazard, f.value, c) : 0.0;
  return out;
}

}  // namespace hazsim::decode
