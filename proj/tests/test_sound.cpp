#include "hazsim/sound/params.hpp"
#include "hazsim/sound/render.hpp"
#include "hazsim/sound/voice.hpp"
#include "hazsim/sound/wav.hpp"

#include "oracles.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>

using namespace hazsim;
using namespace hazsim::sound;

namespace {
AudioBlock render_constant(SoundSet s, HazardType h, double level, double dur, std::uint64_t seed = 1) {
  return render_trajectory(RenderRequest{s, h, LevelTrajectory::constant(level), dur, kDefaultSampleRate, seed});
}

Eigen::ArrayXf col(const AudioBlock& b) { return b.channel(0); }

// Spectral flatness of a Hann-windowed periodogram, computed independently of the decoder.
double flatness(const Eigen::ArrayXf& x) {
  const std::size_t n = 8192;
  Eigen::FFT<double> fft;
  std::vector<double> buf(n);
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(n / 2);
  int frames = 0;
  for (Eigen::Index s = 0; s + Eigen::Index(n) <= x.size(); s += n / 2, ++frames) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[s + i] * (0.5 - 0.5 * std::cos(2 * M_PI * i / n));
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, buf);
    for (std::size_t k = 1; k <= n / 2; ++k) acc[k - 1] += std::norm(spec[k]);
  }
  acc = acc / frames + 1e-30;
  return std::exp(acc.log().mean()) / acc.mean();
}
}  // namespace

TEST_CASE("mapping examples") {
  CHECK(rtl_params(SoundSet::Comp, HazardType::FlammableGas, 0.0).lfo_rate == doctest::Approx(0.5));
  CHECK(rtl_params(SoundSet::Comp, HazardType::FlammableGas, 1.0).lfo_rate == doctest::Approx(10.0));
  CHECK(rtl_params(SoundSet::Comp, HazardType::FlammableGas, 0.5).lfo_rate == doctest::Approx(5.25));
  CHECK(rtl_params(SoundSet::Comp, HazardType::Radiation, 1.0).frequency ==
        doctest::Approx(4.0 * rtl_params(SoundSet::Comp, HazardType::Radiation, 0.0).frequency));
  CHECK(rtl_params(SoundSet::Comp, HazardType::Radiation, 0.0).frequency == doctest::Approx(220.0));
  CHECK(rtl_params(SoundSet::Comp, HazardType::Temperature, 0.5).cutoff == doctest::Approx(std::sqrt(100.0 * 20000.0)));
  CHECK(rtl_params(SoundSet::Comp, HazardType::Temperature, 0.0).cutoff == doctest::Approx(100.0));
  CHECK(rtl_params(SoundSet::Comp, HazardType::Temperature, 1.0).cutoff == doctest::Approx(20000.0));
  CHECK(rtl_params(SoundSet::Cog, HazardType::Radiation, 0.0).click_rate == doctest::Approx(3.0));
  CHECK(rtl_params(SoundSet::Cog, HazardType::Radiation, 1.0).click_rate == doctest::Approx(40.0));
  CHECK(rtl_params(SoundSet::Cog, HazardType::Radiation, 0.8).chirp_probability == 0.0);
  CHECK(rtl_params(SoundSet::Cog, HazardType::Radiation, 0.9).chirp_probability > 0.0);
  CHECK(rtl_params(SoundSet::Cog, HazardType::FlammableGas, 0.0).grain_interval == doctest::Approx(1.2));
  CHECK(rtl_params(SoundSet::Cog, HazardType::FlammableGas, 1.0).grain_interval == doctest::Approx(0.12));
  for (double l : {0.0, 0.3, 0.77, 1.0}) {
    const auto p = rtl_params(SoundSet::Cog, HazardType::Temperature, l);
    CHECK(p.frequency == 220.0);
    CHECK(p.lfo_rate == doctest::Approx(0.5 + 7.5 * l));
    CHECK(p.fm_depth == doctest::Approx(60.0 * l));
  }
  const auto t0 = rtl_params(SoundSet::Comp, HazardType::Temperature, 0.0);
  const auto t1 = rtl_params(SoundSet::Comp, HazardType::Temperature, 1.0);
  CHECK(t0.frequency == 55.0);
  CHECK(t0.gains[1] == doctest::Approx(0.0));
  CHECK(t1.gains[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t0.gains[0] == doctest::Approx(t1.gains[1]));
}

TEST_CASE("mappings are strictly monotone, valid, and zero unused fields") {
  for (SoundSet s : kAllSoundSets)
    for (HazardType h : kAllHazards) {
      double prev = -1.0;
      for (int i = 0; i <= 100; ++i) {
        const double l = i / 100.0;
        const auto p = rtl_params(s, h, l);
        CHECK_NOTHROW(validate(p));
        const double v = primary_feature_value(s, h, l);
        CHECK(v > prev);
        prev = v;
        CHECK(level_from_feature(s, h, v) == doctest::Approx(l).epsilon(1e-9));
        if (p.kind != VoiceKind::Click) CHECK(p.click_rate == 0.0);
        if (p.kind != VoiceKind::Grain) CHECK(p.grain_interval == 0.0);
        if (p.kind != VoiceKind::DualSaw) CHECK(p.cutoff == 0.0);
        if (p.kind != VoiceKind::FmSine) CHECK(p.fm_depth == 0.0);
        if (p.kind != VoiceKind::DualSaw) CHECK(p.gains[1] == 0.0);
      }
    }
}

TEST_CASE("out-of-range levels are rejected") {
  CHECK_THROWS_AS(rtl_params(SoundSet::Cog, HazardType::Radiation, -0.01), std::invalid_argument);
  CHECK_THROWS_AS(rtl_params(SoundSet::Comp, HazardType::Radiation, 1.01), std::invalid_argument);
  CHECK_THROWS_AS(rtl_params(SoundSet::Comp, HazardType::Radiation, std::nan("")), std::invalid_argument);
}

TEST_CASE("synth params json round trip and validation") {
  for (SoundSet s : kAllSoundSets)
    for (HazardType h : kAllHazards) {
      const auto p = rtl_params(s, h, 0.37);
      CHECK(synth_params_from_json(to_json(p)) == p);
    }
  SynthParams bad;
  bad.kind = VoiceKind::Sine;
  bad.frequency = 25000.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad.frequency = 100.0;
  bad.gains = {-0.1, 0.0};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("sine voice at 220 Hz peaks at 220 Hz") {
  Voice v;
  SynthParams p;
  p.kind = VoiceKind::Sine;
  p.frequency = 220.0;
  p.gains = {0.5, 0.0};
  const AudioBlock b = synth_block(v, p, 2 * kDefaultSampleRate);
  CHECK(oracle::fft_peak_hz(col(b), b.sample_rate) == doctest::Approx(220.0).epsilon(1.0 / 220.0));
}

TEST_CASE("click voice onset count tracks the rate") {
  for (double rate : {5.0, 15.0, 30.0}) {
    Voice v(kDefaultSampleRate, 3);
    SynthParams p;
    p.kind = VoiceKind::Click;
    p.click_rate = rate;
    p.gains = {0.8, 0.0};
    const AudioBlock b = synth_block(v, p, 10 * kDefaultSampleRate);
    const int n = oracle::count_onsets(col(b), b.sample_rate, 0.2f, 0.004);
    CHECK(n >= 0.9 * rate * 10.0);
    CHECK(n <= 1.1 * rate * 10.0);
  }
}

TEST_CASE("zero-gain params give an all-zero block") {
  for (SoundSet s : kAllSoundSets)
    for (HazardType h : kAllHazards) {
      auto p = rtl_params(s, h, 0.6);
      p.gains = {0.0, 0.0};
      Voice v;
      CHECK(synth_block(v, p, 4096).samples.isZero());
    }
  Voice v;
  CHECK(synth_block(v, SynthParams{}, 512).samples.isZero());
  CHECK_THROWS_AS(synth_block(v, SynthParams{}, 0), std::invalid_argument);
}

TEST_CASE("consecutive blocks are phase-continuous") {
  for (SoundSet s : kAllSoundSets)
    for (HazardType h : kAllHazards) {
      const auto p = rtl_params(s, h, 0.45);
      Voice whole(kDefaultSampleRate, 11), parts(kDefaultSampleRate, 11);
      const AudioBlock a = synth_block(whole, p, 3000);
      AudioBlock b = synth_block(parts, p, 1000);
      b.append(synth_block(parts, p, 256));
      b.append(synth_block(parts, p, 1744));
      CHECK((a.samples == b.samples).all());
    }
}

TEST_CASE("parameter changes glide within 20 ms") {
  Voice v;
  SynthParams p;
  p.kind = VoiceKind::Sine;
  p.frequency = 300.0;
  p.gains = {0.5, 0.0};
  synth_block(v, p, 4800);
  p.gains = {0.0, 0.0};
  const AudioBlock b = synth_block(v, p, 4800);
  const Eigen::Index ramp_end = static_cast<Eigen::Index>(0.020 * kDefaultSampleRate);
  CHECK(b.samples.topRows(64).abs().maxCoeff() > 0.01f);
  CHECK(b.samples.bottomRows(b.frames() - ramp_end).isZero());
  // No step larger than a 300 Hz sine at full gain can produce.
  Eigen::ArrayXf d = b.channel(0).tail(b.frames() - 1) - b.channel(0).head(b.frames() - 1);
  CHECK(d.abs().maxCoeff() <= 0.5f * 2 * M_PI * 300.0 / kDefaultSampleRate + 1e-4f);
}

TEST_CASE("voice output stays inside [-1, 1]") {
  for (SoundSet s : kAllSoundSets)
    for (HazardType h : kAllHazards)
      for (double l : {0.0, 0.5, 0.95, 1.0}) CHECK(render_constant(s, h, l, 2.0, 5).peak() <= 1.0f);
}

TEST_CASE("comp streams are spectrally separable") {
  const double tonal = flatness(col(render_constant(SoundSet::Comp, HazardType::Radiation, 0.5, 2.0)));
  const double noisy = flatness(col(render_constant(SoundSet::Comp, HazardType::FlammableGas, 0.5, 2.0)));
  const double saws = flatness(col(render_constant(SoundSet::Comp, HazardType::Temperature, 0.5, 2.0)));
  CHECK(tonal < 0.01);
  CHECK(noisy > 0.5);
  CHECK(saws < 0.1);
  // The temperature stream holds energy at the 55 Hz and 110 Hz fundamentals.
  const auto t = col(render_constant(SoundSet::Comp, HazardType::Temperature, 0.5, 2.0));
  CHECK(oracle::fft_peak_hz(t, kDefaultSampleRate, 40.0, 80.0) == doctest::Approx(55.0).epsilon(0.02));
  CHECK(oracle::fft_peak_hz(t, kDefaultSampleRate, 95.0, 125.0) == doctest::Approx(110.0).epsilon(0.02));
}

TEST_CASE("comp radiation at level 0 is a constant 220 Hz sine") {
  const auto b = render_constant(SoundSet::Comp, HazardType::Radiation, 0.0, 2.0);
  CHECK(oracle::fft_peak_hz(col(b), b.sample_rate) == doctest::Approx(220.0).epsilon(1.0 / 220.0));
  // After the fade-in the envelope is flat.
  const Eigen::ArrayXf tail = col(b).tail(kDefaultSampleRate);
  CHECK(oracle::rms(tail) == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("cog temperature keeps a 220 Hz fundamental at every level") {
  for (double l : {0.0, 0.5, 1.0}) {
    const auto b = render_constant(SoundSet::Cog, HazardType::Temperature, l, 2.0);
    CHECK(oracle::fft_peak_hz(col(b), b.sample_rate, 100.0, 400.0) == doctest::Approx(220.0).epsilon(1.0 / 220.0));
  }
}

TEST_CASE("render_trajectory is deterministic and equals per-block synthesis") {
  const auto traj = LevelTrajectory::keyframes({{0.0, 0.1}, {1.0, 0.9}});
  RenderRequest r{SoundSet::Cog, HazardType::FlammableGas, traj, 1.3, kDefaultSampleRate, 42};
  const AudioBlock a = render_trajectory(r), b = render_trajectory(r);
  CHECK((a.samples == b.samples).all());
  r.seed = 43;
  CHECK_FALSE((render_trajectory(r).samples == a.samples).all());

  Voice v(kDefaultSampleRate, 42);
  AudioBlock manual;
  const Eigen::Index total = a.frames();
  for (Eigen::Index s = 0; s < total; s += kDefaultBlockSize) {
    const int n = static_cast<int>(std::min<Eigen::Index>(kDefaultBlockSize, total - s));
    manual.append(synth_block(v, rtl_params(r.set, r.hazard, traj.at(double(s) / kDefaultSampleRate)), n));
  }
  CHECK((manual.samples == a.samples).all());
  CHECK_THROWS_AS(render_trajectory(RenderRequest{SoundSet::Cog, HazardType::Radiation, {}, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("level trajectories") {
  const auto k = LevelTrajectory::keyframes({{2.0, 1.0}, {0.0, 0.0}});
  CHECK(k.at(-1.0) == 0.0);
  CHECK(k.at(1.0) == doctest::Approx(0.5));
  CHECK(k.at(5.0) == 1.0);
  const auto g = LevelTrajectory::gaussian_sweep(0.25, 0.35, 16.0);
  CHECK(sweep_position(0.0, 16.0) == -1.0);
  CHECK(sweep_position(8.0, 16.0) == 1.0);
  CHECK(sweep_position(16.0, 16.0) == -1.0);
  // x = 0.25 is reached at t = 5 and t = 11.
  CHECK(g.at(5.0) == doctest::Approx(1.0));
  CHECK(g.at(11.0) == doctest::Approx(1.0));
  for (const auto& t : {k, g, LevelTrajectory::constant(0.4)}) {
    const auto back = trajectory_from_json(to_json(t));
    for (double s : {0.0, 0.7, 3.3, 9.1}) CHECK(back.at(s) == t.at(s));
  }
}

TEST_CASE("wav round trip and manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "hazsim_test_wav";
  std::filesystem::create_directories(dir);
  AudioBlock st = AudioBlock::stereo(1000);
  for (Eigen::Index i = 0; i < 1000; ++i) {
    st.samples(i, 0) = std::sin(0.01f * i);
    st.samples(i, 1) = (i % 7) / 7.0f - 0.5f;
  }
  st.samples(3, 0) = 1.7f;  // clamps on write
  write_wav(dir / "st.wav", st);
  const AudioBlock back = read_wav(dir / "st.wav");
  REQUIRE(back.channels() == 2);
  REQUIRE(back.frames() == 1000);
  CHECK(back.sample_rate == kDefaultSampleRate);
  CHECK(back.samples(3, 0) == 1.0f);
  st.samples(3, 0) = 1.0f;
  CHECK((back.samples - st.samples).abs().maxCoeff() <= 0.5f / 32767.0f + 1e-6f);
  CHECK(std::filesystem::file_size(dir / "st.wav") == 44 + 4000);
  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), WavError);

  RenderRequest r{SoundSet::Comp, HazardType::Temperature, LevelTrajectory::constant(0.3), 2.0, kDefaultSampleRate, 9};
  const auto m = render_manifest(r, "x.wav");
  CHECK(m["set"] == "comp");
  CHECK(m["constants"]["comp_temperature"]["cutoff_min"] == 100.0);
  const auto r2 = request_from_manifest(m);
  CHECK(r2.seed == 9);
  CHECK(r2.hazard == HazardType::Temperature);
  CHECK(r2.trajectory.at(0.0) == doctest::Approx(0.3));
}
