#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hazsim::sound {

inline constexpr int kDefaultSampleRate = 48000;
inline constexpr int kDefaultBlockSize = 256;

/// Frames x channels sample buffer (column-major, so each channel is contiguous).
template <typename Scalar>
struct BasicAudioBlock {
  using Samples = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  int sample_rate = kDefaultSampleRate;
  Samples samples;

  BasicAudioBlock() = default;
  BasicAudioBlock(int sr, Eigen::Index frames, int channels) : sample_rate(sr), samples(frames, channels) {
    samples.setZero();
  }

  static BasicAudioBlock mono(Eigen::Index frames, int sr = kDefaultSampleRate) { return {sr, frames, 1}; }
  static BasicAudioBlock stereo(Eigen::Index frames, int sr = kDefaultSampleRate) { return {sr, frames, 2}; }

  Eigen::Index frames() const { return samples.rows(); }
  int channels() const { return static_cast<int>(samples.cols()); }
  double duration() const { return sample_rate > 0 ? double(frames()) / sample_rate : 0.0; }

  auto channel(int c) { return samples.col(c); }
  auto channel(int c) const { return samples.col(c); }

  /// Channel average as a single column.
  Eigen::Array<Scalar, Eigen::Dynamic, 1> mixdown() const {
    if (channels() == 1) return samples.col(0);
    return samples.rowwise().mean();
  }

  Scalar peak() const { return samples.size() ? samples.abs().maxCoeff() : Scalar(0); }

  void append(const BasicAudioBlock& other) {
    if (samples.size() == 0 && frames() == 0) {
      *this = other;
      return;
    }
    if (other.channels() != channels() || other.sample_rate != sample_rate)
      throw std::invalid_argument("append: channel count or sample rate mismatch");
    const Eigen::Index n = frames();
    samples.conservativeResize(n + other.frames(), Eigen::NoChange);
    samples.bottomRows(other.frames()) = other.samples;
  }

  /// Frames [start, start + count) as a new block.
  BasicAudioBlock slice(Eigen::Index start, Eigen::Index count) const {
    start = std::clamp<Eigen::Index>(start, 0, frames());
    count = std::clamp<Eigen::Index>(count, 0, frames() - start);
    BasicAudioBlock out(sample_rate, count, channels());
    out.samples = samples.middleRows(start, count);
    return out;
  }
};

using AudioBlock = BasicAudioBlock<float>;

}  // namespace hazsim::sound
