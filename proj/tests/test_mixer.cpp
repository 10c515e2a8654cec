#include "hazsim/sim.hpp"
#include "hazsim/sound/earcons.hpp"
#include "hazsim/sound/engine.hpp"
#include "hazsim/sound/mixer.hpp"

#include "oracles.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>

using namespace hazsim;
using namespace hazsim::sound;
using oracle::fft_peak_hz;
using oracle::rms;

namespace {

constexpr int kFs = kDefaultSampleRate;

AudioBlock tone(double hz, Eigen::Index frames, double amp = 0.5) {
  AudioBlock b = AudioBlock::mono(frames, kFs);
  for (Eigen::Index i = 0; i < frames; ++i) b.samples(i, 0) = float(amp * std::sin(2 * M_PI * hz * i / kFs));
  return b;
}

// Mixes a stream block by block and returns the concatenated output.
AudioBlock run_mixer(SceneMixer& m, const SceneSource& src, const ListenerPose& l, const MixContext& ctx, int blocks) {
  AudioBlock out = AudioBlock::stereo(0, kFs);
  SceneSource s = src;
  for (int b = 0; b < blocks; ++b) {
    s.block = src.block.slice(Eigen::Index(b) * kDefaultBlockSize, kDefaultBlockSize);
    out.append(m.mix({s}, l, ctx, kDefaultBlockSize));
  }
  return out;
}

// Amplitude envelope in 1 ms frames.
Eigen::ArrayXd frame_rms(const Eigen::ArrayXf& x, int hop) {
  Eigen::ArrayXd e(x.size() / hop);
  for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = rms(x.segment(i * hop, hop));
  return e;
}

}  // namespace

TEST_CASE("distance gain is min(1, ref/d)") {
  CHECK(distance_gain(0.0, 1.0) == 1.0);
  CHECK(distance_gain(0.5, 1.0) == 1.0);
  CHECK(distance_gain(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(distance_gain(10.0, 2.0) == doctest::Approx(0.2));
}

TEST_CASE("constant-power panning") {
  const ListenerPose l{{0, 0}, 0.0};
  for (double a : {0.0, 0.7, 1.5707963, 2.5, -1.0}) {
    const auto [gl, gr] = pan_gains(Eigen::Vector2d(std::cos(a), std::sin(a)), l);
    CHECK(gl * gl + gr * gr == doctest::Approx(1.0));
  }
  const auto [cl, cr] = pan_gains({0, 0}, l);
  CHECK(cl == doctest::Approx(cr));
  const auto [ll, lr] = pan_gains({0, 3}, l);  // +y is to the left when facing +x
  CHECK(ll == doctest::Approx(1.0));
  CHECK(lr == doctest::Approx(0.0).epsilon(1e-9));
  const auto [rl, rr] = pan_gains({0, 3}, ListenerPose{{0, 0}, M_PI});
  CHECK(rr > rl);
}

TEST_CASE("source at the listener: unity distance gain, centred") {
  SceneMixer m(kFs);
  const Eigen::Index n = 4096;
  const AudioBlock out = m.mix({SceneSource{{2, 3}, tone(440, n), SourceCategory::Rtl}}, ListenerPose{{2, 3}, 0.3}, {}, n);
  CHECK((out.channel(0) - out.channel(1)).abs().maxCoeff() < 1e-6f);
  CHECK(rms(out.channel(0)) == doctest::Approx(0.5 / std::sqrt(2.0) * M_SQRT1_2).epsilon(0.01));
}

TEST_CASE("distance attenuation at 2x reference is 0.5") {
  const Eigen::Index n = 8192;
  SceneMixer near(kFs), far(kFs);
  const ListenerPose l{{0, 0}, 0.0};
  // Straight ahead so both channels get the same pan.
  const auto a = near.mix({SceneSource{{1, 0}, tone(440, n), SourceCategory::Rtl}}, l, {}, n);
  const auto b = far.mix({SceneSource{{2, 0}, tone(440, n), SourceCategory::Rtl}}, l, {}, n);
  CHECK(rms(b.channel(0)) / rms(a.channel(0)) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("high alert ducks other sources by 12 dB") {
  const int blocks = 200;
  const AudioBlock src = tone(440, Eigen::Index(blocks) * kDefaultBlockSize);
  const ListenerPose l{{0, 0}, 0.0};
  SceneMixer dry(kFs), ducked(kFs);
  MixContext on;
  on.high_alert_active = true;
  const auto a = run_mixer(dry, {{0, 0}, src, SourceCategory::Rtl}, l, {}, blocks);
  const auto b = run_mixer(ducked, {{0, 0}, src, SourceCategory::Rtl}, l, on, blocks);
  const Eigen::Index skip = kFs / 10;  // past the duck ramp
  const double ra = rms(a.channel(0).tail(a.frames() - skip));
  const double rb = rms(b.channel(0).tail(b.frames() - skip));
  CHECK(20 * std::log10(rb / ra) == doctest::Approx(-12.0).epsilon(1.0 / 12.0));
  CHECK(ducked.duck_amount() == doctest::Approx(1.0));

  // Content above the lowpass corner is attenuated further.
  SceneMixer dry_hi(kFs), ducked_hi(kFs);
  const AudioBlock hi = tone(6000, src.frames());
  const auto c = run_mixer(dry_hi, {{0, 0}, hi, SourceCategory::Rtl}, l, {}, blocks);
  const auto d = run_mixer(ducked_hi, {{0, 0}, hi, SourceCategory::Rtl}, l, on, blocks);
  CHECK(20 * std::log10(rms(d.channel(0).tail(d.frames() - skip)) / rms(c.channel(0).tail(c.frames() - skip))) < -24.0);
}

TEST_CASE("alert sources are not ducked") {
  const int blocks = 100;
  const AudioBlock src = tone(440, Eigen::Index(blocks) * kDefaultBlockSize);
  SceneMixer a(kFs), b(kFs);
  MixContext on;
  on.high_alert_active = true;
  const auto x = run_mixer(a, {{0, 0}, src, SourceCategory::Alert}, {}, {}, blocks);
  const auto y = run_mixer(b, {{0, 0}, src, SourceCategory::Alert}, {}, on, blocks);
  CHECK((x.samples - y.samples).abs().maxCoeff() == 0.0f);
}

TEST_CASE("duck release glides within the ramp") {
  SceneMixer m(kFs);
  MixContext on;
  on.high_alert_active = true;
  const AudioBlock src = tone(440, kDefaultBlockSize);
  for (int i = 0; i < 20; ++i) m.mix({{{0, 0}, src, SourceCategory::Rtl}}, {}, on, kDefaultBlockSize);
  CHECK(m.duck_amount() == doctest::Approx(1.0));
  const int ramp_blocks = int(std::ceil(m.config().duck_ramp * kFs / kDefaultBlockSize));
  double prev = 1.0;
  for (int i = 0; i < ramp_blocks; ++i) {
    m.mix({{{0, 0}, src, SourceCategory::Rtl}}, {}, {}, kDefaultBlockSize);
    CHECK(m.duck_amount() < prev);
    CHECK(prev - m.duck_amount() <= double(kDefaultBlockSize) / (m.config().duck_ramp * kFs) + 1e-9);
    prev = m.duck_amount();
  }
  CHECK(m.duck_amount() == doctest::Approx(0.0));
}

TEST_CASE("twelve concurrent alerts never clip") {
  SceneMixer m(kFs);
  MixContext ctx;
  ctx.high_alert_active = true;
  ctx.flanger_active = true;
  const ListenerPose l{{0, 0}, 0.0};
  double phase = 0.0;
  float peak = 0.0f;
  for (int b = 0; b < 400; ++b) {
    std::vector<SceneSource> src;
    for (int k = 0; k < 12; ++k) {
      const HazardType h = kAllHazards[k % 3];
      const SoundSet set = kAllSoundSets[k % 2];
      src.push_back({{0.1 * k, 0.0}, render_alert_loop(set, h, phase, kDefaultBlockSize), SourceCategory::Alert});
    }
    src.push_back({{0, 0}, tone(300, kDefaultBlockSize, 0.9), SourceCategory::Rtl});
    src.push_back({{0, 0}, render_grunt(GruntKind::Reject).slice(0, kDefaultBlockSize), SourceCategory::UiFeedback});
    const auto out = m.mix(src, l, ctx, kDefaultBlockSize);
    peak = std::max(peak, out.peak());
    phase += double(kDefaultBlockSize) / kFs;
  }
  CHECK(peak <= 1.0f);
  CHECK(peak > 0.5f);
}

TEST_CASE("self-RTL on an untraversed tile is silent") {
  SceneMixer m(kFs);
  MixContext ctx;
  ctx.mode = ListeningMode::SelfRtl;
  ctx.listener_tile_covered = false;
  const auto out = m.mix({SceneSource{{0, 0}, tone(440, 1024), SourceCategory::Rtl}}, {}, ctx, 1024);
  CHECK(out.samples.abs().maxCoeff() == 0.0f);
  ctx.listener_tile_covered = true;
  CHECK(SceneMixer(kFs).mix({SceneSource{{0, 0}, tone(440, 1024), SourceCategory::Rtl}}, {}, ctx, 1024).peak() > 0.1f);
}

TEST_CASE("UI feedback is head-locked") {
  const AudioBlock g = render_grunt(GruntKind::Accept);
  SceneMixer a(kFs), b(kFs);
  const auto x = a.mix({SceneSource{{5, 5}, g, SourceCategory::UiFeedback}}, ListenerPose{{0, 0}, 0.0}, {}, g.frames());
  const auto y = b.mix({SceneSource{{-9, 2}, g, SourceCategory::UiFeedback}}, ListenerPose{{3, 1}, 2.0}, {}, g.frames());
  CHECK((x.samples - y.samples).abs().maxCoeff() == 0.0f);
  CHECK((x.channel(0) - x.channel(1)).abs().maxCoeff() == 0.0f);
}

TEST_CASE("alert loop structure") {
  const auto loop = render_alert_loop(SoundSet::Cog, HazardType::Radiation, 0.0, Eigen::Index(3 * kAlertPeriodSeconds * kFs));
  const auto env = frame_rms(loop.channel(0), kFs / 1000);
  // Five notes then a rest in each period.
  const double note_end = kAlertNotes * kAlertNoteSeconds;
  for (int p = 0; p < 3; ++p) {
    const int rest0 = int((p * kAlertPeriodSeconds + note_end) * 1000) + 2;
    const int rest1 = int((p + 1) * kAlertPeriodSeconds * 1000) - 2;
    CHECK(env.segment(rest0, rest1 - rest0).maxCoeff() == 0.0);
    for (int n = 0; n < kAlertNotes; ++n)
      CHECK(env[int((p * kAlertPeriodSeconds + (n + 0.3) * kAlertNoteSeconds) * 1000)] > 0.02);
  }
  // Ascending pitch across the five notes.
  double prev = 0.0;
  for (int n = 0; n < kAlertNotes; ++n) {
    const auto seg = loop.channel(0).segment(Eigen::Index((n * kAlertNoteSeconds + 0.01) * kFs), Eigen::Index(0.07 * kFs));
    const double f = fft_peak_hz(seg, kFs, 300, 3000);
    CHECK(f > prev);
    prev = f;
  }
  CHECK(loop.peak() <= 1.0f);
}

TEST_CASE("alerts sharing the phase clock are synchronised") {
  AlertState s;
  s.update({"A", HazardType::Radiation}, 0.95);
  s.advance_clock(0.31);
  s.update({"B", HazardType::FlammableGas}, 0.95);
  s.advance_clock(0.2);
  const Eigen::Index n = Eigen::Index(2 * kAlertPeriodSeconds * kFs);
  const auto a = render_alert_loop(SoundSet::Comp, HazardType::Radiation, s.loop_phase(), n);
  const auto b = render_alert_loop(SoundSet::Comp, HazardType::FlammableGas, s.loop_phase(), n);
  const auto ea = frame_rms(a.channel(0), kFs / 1000);
  const auto eb = frame_rms(b.channel(0), kFs / 1000);
  const Eigen::ArrayXd ca = ea - ea.mean(), cb = eb - eb.mean();
  int best_lag = 0;
  double best = -1e300;
  for (int lag = -200; lag <= 200; ++lag) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ca.size(); ++i) {
      const Eigen::Index j = i + lag;
      if (j >= 0 && j < cb.size()) acc += ca[i] * cb[j];
    }
    if (acc > best) best = acc, best_lag = lag;
  }
  CHECK(best_lag == 0);
}

TEST_CASE("medium earcon motif direction") {
  const auto up = render_medium_earcon(SoundSet::Cog, HazardType::Temperature, true);
  const auto down = render_medium_earcon(SoundSet::Cog, HazardType::Temperature, false);
  CHECK(up.frames() == down.frames());
  const Eigen::Index len = Eigen::Index(0.07 * kFs);
  const Eigen::Index second = up.frames() - Eigen::Index(kAlertNoteSeconds * kFs);
  const double u0 = fft_peak_hz(up.channel(0).head(len), kFs, 200, 2000);
  const double u1 = fft_peak_hz(up.channel(0).segment(second, len), kFs, 200, 2000);
  const double d0 = fft_peak_hz(down.channel(0).head(len), kFs, 200, 2000);
  const double d1 = fft_peak_hz(down.channel(0).segment(second, len), kFs, 200, 2000);
  CHECK(u1 > u0);
  CHECK(d1 < d0);
}

TEST_CASE("grunts are short and bounded") {
  for (GruntKind k : {GruntKind::AlertPrelude, GruntKind::Accept, GruntKind::Reject, GruntKind::Tag,
                      GruntKind::WaypointSet, GruntKind::WaypointRemoved}) {
    const auto g = render_grunt(k);
    CHECK(g.duration() > 0.05);
    CHECK(g.duration() < 0.5);
    CHECK(g.peak() <= 1.0f);
    CHECK(g.peak() > 0.05f);
  }
}

TEST_CASE("notifications") {
  for (SoundSet set : kAllSoundSets)
    for (HazardType h : kAllHazards) {
      const auto d = notification(set, h);
      CHECK(d.reference_level == 0.7);
      CHECK(d.duration <= 1.0);
      CHECK(d.params.kind == rtl_params(set, h, 0.7).kind);
      const auto b = render_notification(d);
      CHECK(b.duration() == doctest::Approx(d.duration).epsilon(1e-3));
      CHECK(b.duration() <= 1.0);
      CHECK(rms(b.channel(0)) > 0.01);
      CHECK(std::abs(b.samples(b.frames() - 1, 0)) < 1e-3f);
    }
}

TEST_CASE("notification gate cooldown") {
  NotificationGate g(10.0);
  CHECK(g.allow("A", HazardType::Radiation, 0.0));
  CHECK_FALSE(g.allow("A", HazardType::Radiation, 9.99));
  CHECK(g.allow("A", HazardType::FlammableGas, 1.0));
  CHECK(g.allow("B", HazardType::Radiation, 1.0));
  CHECK(g.allow("A", HazardType::Radiation, 10.0));
  CHECK_FALSE(g.allow("A", HazardType::Radiation, 15.0));
}

TEST_CASE("flanger: dry at zero wet, bounded when wet") {
  AudioBlock x = tone(700, 8192, 0.8);
  AudioBlock y = x;
  Flanger f(kFs);
  f.process(y, 0.0);
  CHECK((x.samples - y.samples).abs().maxCoeff() == 0.0f);
  Flanger g(kFs);
  AudioBlock z = x;
  g.process(z, 1.0);
  CHECK(z.peak() <= x.peak() + 1e-6f);
  CHECK((x.samples - z.samples).abs().maxCoeff() > 0.05f);
}

namespace {

WorldState engine_world() {
  WorldState w;
  w.grid = GridWorld(GridSpec{20, 20, 1.0, {0, 0}, 0.5});
  Robot r;
  r.id = "A";
  r.position = {5.5, 5.5};
  w.robots.push_back(r);
  w.avatar.position = {5.5, 7.5};
  return w;
}

}  // namespace

TEST_CASE("session audio: RTL frames follow selection") {
  auto w = engine_world();
  HazardField f({HazardSphere<double>{{5.5, 5.5, 0.5}, 3.0, 0.8, HazardType::Radiation}});
  SessionAudio audio(SoundSet::Comp);
  CHECK(audio.rtl_frames(w, f).empty());

  step(w, f, 0.05);
  REQUIRE(select_robot(w, "A").accepted);
  const auto frames = audio.rtl_frames(w, f);
  REQUIRE(frames.size() == 3);
  CHECK(frames[0].id == "rtl/radiation");
  CHECK(frames[0].position.isApprox(w.robots[0].position));
  CHECK(frames[0].params.frequency == doctest::Approx(rtl_params(SoundSet::Comp, HazardType::Radiation, 0.8).frequency));
  for (std::size_t i = 1; i < 3; ++i) CHECK(frames[i].params.gains[0] == 0.0);
  const auto j = to_json(frames[0]);
  CHECK(j["category"] == "rtl");
  CHECK(j["params"]["kind"].is_string());

  const auto out = audio.render(w, f, 4096);
  CHECK(out.channels() == 2);
  CHECK(out.peak() > 0.05f);
}

TEST_CASE("session audio: self-RTL needs a traversed tile") {
  auto w = engine_world();
  HazardField f({HazardSphere<double>{{5.5, 7.5, 0.5}, 3.0, 0.8, HazardType::Temperature}});
  SessionAudio audio(SoundSet::Cog);
  REQUIRE(toggle_self_rtl(w).accepted);
  CHECK(audio.rtl_frames(w, f).empty());
  AudioBlock silent = audio.render(w, f, 2048);
  CHECK(silent.samples.abs().maxCoeff() == 0.0f);

  w.grid.mark_covered(*w.grid.tile_of(w.avatar.position));
  const auto frames = audio.rtl_frames(w, f);
  REQUIRE(frames.size() == 3);
  CHECK(frames[index_of(HazardType::Temperature)].params.lfo_rate ==
        doctest::Approx(rtl_params(SoundSet::Cog, HazardType::Temperature, f.level_at({5.5, 7.5, 0.5}, HazardType::Temperature)).lfo_rate));
  CHECK(audio.render(w, f, 4096).peak() > 0.01f);
}

TEST_CASE("session audio: encounter notification is gated") {
  auto w = engine_world();
  HazardField f;
  SessionAudio audio(SoundSet::Cog);
  const SimEvent enc{0, SimEventKind::HazardFirstEncounter, "A", HazardType::Radiation, "", 0.1};
  audio.on_events(w, {enc});
  const auto a = audio.render(w, f, Eigen::Index(0.3 * kFs));
  CHECK(a.peak() > 0.01f);
  audio.render(w, f, Eigen::Index(0.8 * kFs));
  CHECK(audio.render(w, f, 1024).peak() == 0.0f);

  w.time = 5.0;
  audio.on_events(w, {enc});
  CHECK(audio.render(w, f, Eigen::Index(0.3 * kFs)).peak() == 0.0f);
  w.time = 10.5;
  audio.on_events(w, {enc});
  CHECK(audio.render(w, f, Eigen::Index(0.3 * kFs)).peak() > 0.01f);
}

TEST_CASE("session audio: command feedback") {
  auto w = engine_world();
  HazardField f;
  SessionAudio audio(SoundSet::Comp);
  audio.on_command(CommandResult::reject("no"));
  const auto out = audio.render(w, f, Eigen::Index(0.5 * kFs));
  CHECK(out.peak() > 0.05f);
  CHECK((out.channel(0) - out.channel(1)).abs().maxCoeff() == 0.0f);
}

TEST_CASE("session audio: high alert plays a loop and ducks") {
  auto w = engine_world();
  w.robots[0].health = 0.3;
  HazardField f({HazardSphere<double>{{5.5, 5.5, 0.5}, 3.0, 1.0, HazardType::Temperature}});
  SessionAudio audio(SoundSet::Cog);
  bool entered = false;
  for (int i = 0; i < 400 && !entered; ++i) {
    const auto ev = step(w, f, 0.05);
    audio.on_events(w, ev);
    for (const auto& e : ev) entered |= e.kind == SimEventKind::HighAlertEnter;
  }
  REQUIRE(entered);
  REQUIRE(w.alerts.any_high_active());
  const auto out = audio.render(w, f, Eigen::Index(kAlertPeriodSeconds * kFs));
  CHECK(out.peak() > 0.05f);
  CHECK(out.peak() <= 1.0f);
}
