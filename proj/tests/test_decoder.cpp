#include "hazsim/decode/decoder.hpp"
#include "hazsim/sound/dsp.hpp"
#include "hazsim/sound/render.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace hazsim;
using namespace hazsim::sound;
using namespace hazsim::decode;

namespace {
constexpr int kFs = kDefaultSampleRate;

AudioBlock sine(double hz, double seconds, double amp = 0.5) {
  AudioBlock b = AudioBlock::mono(static_cast<Eigen::Index>(seconds * kFs));
  for (Eigen::Index i = 0; i < b.frames(); ++i) b.samples(i, 0) = float(amp * std::sin(2 * M_PI * hz * i / kFs));
  return b;
}

AudioBlock am_noise(double lfo_hz, double seconds, std::uint64_t seed) {
  dsp::Noise n(seed);
  AudioBlock b = AudioBlock::mono(static_cast<Eigen::Index>(seconds * kFs));
  for (Eigen::Index i = 0; i < b.frames(); ++i)
    b.samples(i, 0) = float(0.5 * (0.5 + 0.5 * std::sin(2 * M_PI * lfo_hz * i / kFs)) * n.bipolar());
  return b;
}

AudioBlock with_noise(const AudioBlock& b, double snr_db, std::uint64_t seed) {
  dsp::Noise n(seed);
  const double sig = oracle::rms(b.channel(0));
  const double target = sig / std::pow(10.0, snr_db / 20.0);
  const double scale = target * std::sqrt(3.0);  // uniform [-1, 1) has rms 1/sqrt(3)
  AudioBlock out = b;
  for (Eigen::Index i = 0; i < out.frames(); ++i) out.samples(i, 0) += float(scale * n.bipolar());
  return out;
}

AudioBlock render(SoundSet s, HazardType h, double level, double dur = 2.0) {
  return render_trajectory(RenderRequest{s, h, LevelTrajectory::constant(level), dur});
}
}  // namespace

TEST_CASE("pure 440 Hz sine") {
  const auto e = estimate_pitch(sine(440.0, 1.5));
  CHECK(e.value == doctest::Approx(440.0).epsilon(2.0 / 440.0));
  CHECK(e.usable());
  CHECK(e.unit() == "Hz");
}

TEST_CASE("white noise with a 4 Hz amplitude LFO") {
  const auto e = estimate_beat_rate(am_noise(4.0, 3.0, 5));
  CHECK(e.value == doctest::Approx(4.0).epsilon(0.3 / 4.0));
}

TEST_CASE("silence and short input raise NoSignal") {
  const AudioBlock silent = AudioBlock::mono(2 * kFs);
  CHECK_THROWS_AS(estimate_pitch(silent), NoSignal);
  CHECK_THROWS_AS(estimate_click_rate(silent), NoSignal);
  CHECK_THROWS_AS(estimate_beat_rate(silent), NoSignal);
  CHECK_THROWS_AS(estimate_cutoff(silent), NoSignal);
  CHECK_THROWS_AS(estimate_mod_rate(silent), NoSignal);
  CHECK_THROWS_AS(estimate_pitch(sine(440.0, 0.5)), NoSignal);
  CHECK_THROWS_AS(invert_level(SoundSet::Comp, HazardType::Radiation, silent), NoSignal);
}

TEST_CASE("cutoff of a known lowpassed saw follows the filter") {
  // 55 Hz saw through an 8th-order lowpass: the tilted rolloff sits near the cutoff.
  double prev = 0.0;
  for (double fc : {500.0, 2000.0, 8000.0}) {
    dsp::ButterworthLowpass<double> lp(4);
    lp.design(kFs, fc);
    AudioBlock b = AudioBlock::mono(2 * kFs);
    for (Eigen::Index i = 0; i < b.frames(); ++i) {
      const double ph = std::fmod(i * 55.0 / kFs, 1.0);
      b.samples(i, 0) = float(0.3 * lp.process(2 * ph - 1));
    }
    const double est = estimate_cutoff(b).value;
    CHECK(est > 0.8 * fc);
    CHECK(est < 1.2 * fc);
    CHECK(est > prev);
    prev = est;
  }
}

TEST_CASE("invert_level examples") {
  CHECK(invert_level(SoundSet::Comp, HazardType::FlammableGas, render(SoundSet::Comp, HazardType::FlammableGas, 0.5))
            .level == doctest::Approx(0.5).epsilon(0.1));
  CHECK(invert_level(SoundSet::Comp, HazardType::Radiation, sine(880.0, 2.0)).level ==
        doctest::Approx(1.0).epsilon(0.05));
  for (double l : {0.2, 0.6}) {
    const auto est = invert_level(SoundSet::Cog, HazardType::Temperature, render(SoundSet::Cog, HazardType::Temperature, l));
    CHECK(std::abs(est.level - l) <= 0.1);
    CHECK(est.feature.kind == FeatureKind::LfoRate);
  }
}

TEST_CASE("round trip over every sound and level") {
  for (SoundSet s : kAllSoundSets)
    for (HazardType h : kAllHazards) {
      const FeatureKind k = primary_feature(s, h);
      const double tol = (k == FeatureKind::ClickRate || k == FeatureKind::GrainRate || k == FeatureKind::LfoRate) ? 0.10 : 0.05;
      for (int i = 1; i <= 9; ++i) {
        const double l = i / 10.0;
        const auto est = invert_level(s, h, render(s, h, l));
        INFO(to_string(s), " ", to_string(h), " level ", l, " est ", est.level);
        CHECK(std::abs(est.level - l) <= tol);
      }
    }
}

TEST_CASE("estimators are pure") {
  const auto b = render(SoundSet::Cog, HazardType::Radiation, 0.7);
  const auto a1 = estimate_click_rate(b), a2 = estimate_click_rate(b);
  CHECK(a1.value == a2.value);
  CHECK(a1.confidence == a2.confidence);
  const auto c = render(SoundSet::Comp, HazardType::Temperature, 0.4);
  CHECK(estimate_cutoff(c).value == estimate_cutoff(c).value);
}

TEST_CASE("confidence degrades with added noise") {
  for (SoundSet s : kAllSoundSets)
    for (HazardType h : kAllHazards) {
      const auto clean = render(s, h, 0.5);
      double prev = 1.0 + 1e-12;
      for (double snr : {30.0, 20.0, 10.0}) {
        const double conf = invert_level(s, h, with_noise(clean, snr, 77)).feature.confidence;
        INFO(to_string(s), " ", to_string(h), " snr ", snr, " conf ", conf);
        CHECK(conf < prev);
        prev = conf;
      }
    }
}

TEST_CASE("click detector is unbiased on long renders") {
  for (double l : {0.1, 0.5, 1.0}) {
    const auto b = render(SoundSet::Cog, HazardType::Radiation, l, 60.0);
    const double expected = primary_feature_value(SoundSet::Cog, HazardType::Radiation, l);
    CHECK(estimate_click_rate(b).value == doctest::Approx(expected).epsilon(0.03));
  }
}

TEST_CASE("envelope helper") {
  const auto env = envelope(sine(1000.0, 1.0).channel(0), kFs, 0.01, 0.0025);
  CHECK(env.size() == 1 + (kFs - 480) / 120);
  CHECK(env.mean() == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(0.01));
}
