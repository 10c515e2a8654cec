#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hazsim::sound::dsp {

/// Linear ramp toward a target over a fixed number of samples.
template <typename Scalar>
class Ramp {
 public:
  Ramp() = default;
  explicit Ramp(Scalar v) : value_(v), target_(v) {}

  void set(Scalar target, int samples) {
    target_ = target;
    if (samples <= 0 || target == value_) {
      value_ = target;
      remaining_ = 0;
      return;
    }
    step_ = (target_ - value_) / Scalar(samples);
    remaining_ = samples;
  }
  void jump(Scalar v) {
    value_ = target_ = v;
    remaining_ = 0;
  }
  Scalar next() {
    if (remaining_ > 0) {
      value_ += step_;
      if (--remaining_ == 0) value_ = target_;
    }
    return value_;
  }
  Scalar value() const { return value_; }
  Scalar target() const { return target_; }
  bool ramping() const { return remaining_ > 0; }

 private:
  Scalar value_ = 0, target_ = 0, step_ = 0;
  int remaining_ = 0;
};

/// Transposed direct form II biquad with RBJ cookbook designs.
template <typename Scalar>
class Biquad {
 public:
  void lowpass(Scalar fs, Scalar fc, Scalar q) {
    const Scalar w = two_pi() * clamp_hz(fs, fc) / fs, c = std::cos(w), a = std::sin(w) / (2 * q);
    set((1 - c) / 2, 1 - c, (1 - c) / 2, 1 + a, -2 * c, 1 - a);
  }
  void highpass(Scalar fs, Scalar fc, Scalar q) {
    const Scalar w = two_pi() * clamp_hz(fs, fc) / fs, c = std::cos(w), a = std::sin(w) / (2 * q);
    set((1 + c) / 2, -(1 + c), (1 + c) / 2, 1 + a, -2 * c, 1 - a);
  }
  /// Constant 0 dB peak gain bandpass.
  void bandpass(Scalar fs, Scalar fc, Scalar q) {
    const Scalar w = two_pi() * clamp_hz(fs, fc) / fs, c = std::cos(w), a = std::sin(w) / (2 * q);
    set(a, 0, -a, 1 + a, -2 * c, 1 - a);
  }
  Scalar process(Scalar x) {
    const Scalar y = b0_ * x + z1_;
    z1_ = b1_ * x - a1_ * y + z2_;
    z2_ = b2_ * x - a2_ * y;
    return y;
  }
  void reset() { z1_ = z2_ = 0; }

 private:
  static constexpr Scalar two_pi() { return Scalar(2 * M_PI); }
  static Scalar clamp_hz(Scalar fs, Scalar fc) { return std::clamp(fc, Scalar(1), Scalar(0.49) * fs); }
  void set(Scalar b0, Scalar b1, Scalar b2, Scalar a0, Scalar a1, Scalar a2) {
    b0_ = b0 / a0;
    b1_ = b1 / a0;
    b2_ = b2 / a0;
    a1_ = a1 / a0;
    a2_ = a2 / a0;
  }
  Scalar b0_ = 1, b1_ = 0, b2_ = 0, a1_ = 0, a2_ = 0, z1_ = 0, z2_ = 0;
};

/// Butterworth lowpass of order 2N built from N cascaded biquads.
template <typename Scalar>
class ButterworthLowpass {
 public:
  explicit ButterworthLowpass(int sections = 2) : stages_(std::max(1, sections)) {}
  void design(Scalar fs, Scalar fc) {
    const int n = static_cast<int>(stages_.size());
    for (int k = 0; k < n; ++k) {
      const Scalar q = Scalar(1) / (2 * std::sin((2 * k + 1) * Scalar(M_PI) / (4 * n)));
      stages_[k].lowpass(fs, fc, q);
    }
  }
  Scalar process(Scalar x) {
    for (auto& s : stages_) x = s.process(x);
    return x;
  }
  void reset() {
    for (auto& s : stages_) s.reset();
  }
  int sections() const { return static_cast<int>(stages_.size()); }

 private:
  std::vector<Biquad<Scalar>> stages_;
};

/// First-order allpass; the phaser chains several.
template <typename Scalar>
class Allpass1 {
 public:
  void tune(Scalar fs, Scalar fc) {
    const Scalar t = std::tan(Scalar(M_PI) * std::clamp(fc, Scalar(1), Scalar(0.49) * fs) / fs);
    a_ = (t - 1) / (t + 1);
  }
  Scalar process(Scalar x) {
    const Scalar y = a_ * x + x1_ - a_ * y1_;
    x1_ = x;
    y1_ = y;
    return y;
  }

 private:
  Scalar a_ = 0, x1_ = 0, y1_ = 0;
};

/// Seeded generator with fixed-width conversions so sample streams do not
/// depend on library distribution implementations.
class Noise {
 public:
  explicit Noise(std::uint64_t seed = 1) : eng_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
  /// Uniform in [-1, 1).
  double bipolar() { return 2.0 * uniform() - 1.0; }
  /// Gamma(shape, scale) via Marsaglia-Tsang; shape >= 1.
  double gamma(double shape, double scale) {
    const double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }
  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do u1 = uniform();
    while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Wraps a phase to [0, 1).
template <typename Scalar>
inline Scalar wrap01(Scalar p) {
  return p - std::floor(p);
}

inline double db_to_gain(double db) { return std::pow(10.0, db / 20.0); }
inline double gain_to_db(double g) { return 20.0 * std::log10(g); }

}  // namespace hazsim::sound::dsp
