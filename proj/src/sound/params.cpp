#include "hazsim/sound/params.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hazsim::sound {

using nlohmann::json;

std::string_view to_string(SoundSet s) { return s == SoundSet::Cog ? "cog" : "comp"; }

std::optional<SoundSet> parse_sound_set(std::string_view s) {
  if (s == "cog") return SoundSet::Cog;
  if (s == "comp") return SoundSet::Comp;
  return std::nullopt;
}

std::string_view to_string(VoiceKind k) {
  switch (k) {
    case VoiceKind::Silent: return "silent";
    case VoiceKind::Click: return "click";
    case VoiceKind::Grain: return "grain";
    case VoiceKind::FmSine: return "fm_sine";
    case VoiceKind::Sine: return "sine";
    case VoiceKind::NoiseLfo: return "noise_lfo";
    case VoiceKind::DualSaw: return "dual_saw";
  }
  return "silent";
}

std::optional<VoiceKind> parse_voice_kind(std::string_view s) {
  for (VoiceKind k : {VoiceKind::Silent, VoiceKind::Click, VoiceKind::Grain, VoiceKind::FmSine, VoiceKind::Sine,
                      VoiceKind::NoiseLfo, VoiceKind::DualSaw})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::ClickRate: return "click_rate";
    case FeatureKind::Pitch: return "pitch";
    case FeatureKind::BeatRate: return "beat_rate";
    case FeatureKind::Cutoff: return "cutoff";
    case FeatureKind::LfoRate: return "lfo_rate";
    case FeatureKind::GrainRate: return "grain_rate";
  }
  return "unknown";
}

void validate(const SynthParams& p) {
  auto freq = [](double f, const char* name) {
    if (!(f >= 0.0 && f <= 20000.0)) throw std::invalid_argument(std::string(name) + " outside [0, 20000] Hz");
  };
  freq(p.frequency, "frequency");
  freq(p.lfo_rate, "lfo_rate");
  freq(p.fm_rate, "fm_rate");
  freq(p.fm_depth, "fm_depth");
  freq(p.cutoff, "cutoff");
  for (double g : p.gains)
    if (!(g >= 0.0)) throw std::invalid_argument("gains must be non-negative");
  if (!(p.click_rate >= 0.0) || !(p.grain_interval >= 0.0))
    throw std::invalid_argument("rates and intervals must be non-negative");
  if (!(p.chirp_probability >= 0.0 && p.chirp_probability <= 1.0))
    throw std::invalid_argument("chirp probability outside [0, 1]");
}

json to_json(const SynthParams& p) {
  return json{{"kind", to_string(p.kind)},        {"frequency", p.frequency},
              {"click_rate", p.click_rate},       {"chirp_probability", p.chirp_probability},
              {"lfo_rate", p.lfo_rate},           {"fm_rate", p.fm_rate},
              {"fm_depth", p.fm_depth},           {"cutoff", p.cutoff},
              {"gains", {p.gains[0], p.gains[1]}}, {"grain_interval", p.grain_interval}};
}

SynthParams synth_params_from_json(const json& j) {
  SynthParams p;
  const auto kind = parse_voice_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown voice kind");
  p.kind = *kind;
  p.frequency = j.value("frequency", 0.0);
  p.click_rate = j.value("click_rate", 0.0);
  p.chirp_probability = j.value("chirp_probability", 0.0);
  p.lfo_rate = j.value("lfo_rate", 0.0);
  p.fm_rate = j.value("fm_rate", 0.0);
  p.fm_depth = j.value("fm_depth", 0.0);
  p.cutoff = j.value("cutoff", 0.0);
  if (j.contains("gains")) {
    const auto& g = j.at("gains");
    if (!g.is_array() || g.size() != 2) throw std::invalid_argument("gains must hold two values");
    p.gains = {g[0].get<double>(), g[1].get<double>()};
  }
  p.grain_interval = j.value("grain_interval", 0.0);
  validate(p);
  return p;
}

const SoundConstants& default_constants() {
  static const SoundConstants c{};
  return c;
}

json to_json(const SoundConstants& c) {
  const auto& cr = c.cog_radiation;
  const auto& cg = c.cog_gas;
  const auto& ct = c.cog_temperature;
  const auto& pr = c.comp_radiation;
  const auto& pg = c.comp_gas;
  const auto& pt = c.comp_temperature;
  return json{
      {"cog_radiation",
       {{"rate_min", cr.rate_min}, {"rate_max", cr.rate_max}, {"jitter_shape", cr.jitter_shape},
        {"chirp_onset_level", cr.chirp_onset_level}, {"chirp_max_probability", cr.chirp_max_probability},
        {"chirp_duration", cr.chirp_duration}, {"chirp_f0", cr.chirp_f0}, {"chirp_f1", cr.chirp_f1},
        {"chirp_gain", cr.chirp_gain}, {"click_decay", cr.click_decay}, {"click_length", cr.click_length},
        {"gain", cr.gain}}},
      {"cog_gas",
       {{"interval_max", cg.interval_max}, {"interval_min", cg.interval_min}, {"grain_duty", cg.grain_duty},
        {"swell_curve", cg.swell_curve}, {"release", cg.release}, {"resonator_hz", cg.resonator_hz},
        {"resonator_q", cg.resonator_q}, {"phaser_rate", cg.phaser_rate}, {"phaser_min_hz", cg.phaser_min_hz},
        {"phaser_max_hz", cg.phaser_max_hz}, {"gain", cg.gain}}},
      {"cog_temperature",
       {{"frequency", ct.frequency}, {"lfo_min", ct.lfo_min}, {"lfo_max", ct.lfo_max}, {"fm_ratio", ct.fm_ratio},
        {"fm_depth_max", ct.fm_depth_max}, {"lfo_depth", ct.lfo_depth}, {"gain", ct.gain}}},
      {"comp_radiation", {{"base", pr.base}, {"octaves", pr.octaves}, {"gain", pr.gain}}},
      {"comp_gas", {{"lfo_min", pg.lfo_min}, {"lfo_max", pg.lfo_max}, {"gain", pg.gain}}},
      {"comp_temperature",
       {{"low_hz", pt.low_hz}, {"high_hz", pt.high_hz}, {"pulse_duty", pt.pulse_duty},
        {"cutoff_min", pt.cutoff_min}, {"cutoff_max", pt.cutoff_max}, {"filter_sections", pt.filter_sections},
        {"gain", pt.gain}}},
      {"ramp_seconds", c.ramp_seconds},
  };
}

namespace {

double lerp(double a, double b, double t) { return a + (b - a) * t; }
double geo(double a, double b, double t) { return a * std::pow(b / a, t); }

}  // namespace

SynthParams rtl_params(SoundSet set, HazardType hazard, double level, const SoundConstants& c) {
  if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("level outside [0, 1]");
  SynthParams p;
  if (set == SoundSet::Cog) {
    switch (hazard) {
      case HazardType::Radiation: {
        const auto& k = c.cog_radiation;
        p.kind = VoiceKind::Click;
        p.click_rate = lerp(k.rate_min, k.rate_max, level);
        if (level > k.chirp_onset_level)
          p.chirp_probability = k.chirp_max_probability * (level - k.chirp_onset_level) / (1.0 - k.chirp_onset_level);
        p.gains = {k.gain, 0.0};
        break;
      }
      case HazardType::FlammableGas: {
        const auto& k = c.cog_gas;
        p.kind = VoiceKind::Grain;
        p.grain_interval = lerp(k.interval_max, k.interval_min, level);
        p.gains = {k.gain, 0.0};
        break;
      }
      case HazardType::Temperature: {
        const auto& k = c.cog_temperature;
        p.kind = VoiceKind::FmSine;
        p.frequency = k.frequency;
        p.lfo_rate = lerp(k.lfo_min, k.lfo_max, level);
        p.fm_rate = k.frequency * k.fm_ratio;
        p.fm_depth = k.fm_depth_max * level;
        p.gains = {k.gain, 0.0};
        break;
      }
    }
  } else {
    switch (hazard) {
      case HazardType::Radiation: {
        const auto& k = c.comp_radiation;
        p.kind = VoiceKind::Sine;
        p.frequency = k.base * std::pow(2.0, k.octaves * level);
        p.gains = {k.gain, 0.0};
        break;
      }
      case HazardType::FlammableGas: {
        const auto& k = c.comp_gas;
        p.kind = VoiceKind::NoiseLfo;
        p.lfo_rate = lerp(k.lfo_min, k.lfo_max, level);
        p.gains = {k.gain, 0.0};
        break;
      }
      case HazardType::Temperature: {
        const auto& k = c.comp_temperature;
        p.kind = VoiceKind::DualSaw;
        p.frequency = k.low_hz;
        p.cutoff = geo(k.cutoff_min, k.cutoff_max, level);
        p.gains = {k.gain * std::cos(level * M_PI / 2), k.gain * std::sin(level * M_PI / 2)};
        break;
      }
    }
  }
  return p;
}

FeatureKind primary_feature(SoundSet set, HazardType hazard) {
  if (set == SoundSet::Cog) {
    switch (hazard) {
      case HazardType::Radiation: return FeatureKind::ClickRate;
      case HazardType::FlammableGas: return FeatureKind::GrainRate;
      case HazardType::Temperature: return FeatureKind::LfoRate;
    }
  }
  switch (hazard) {
    case HazardType::Radiation: return FeatureKind::Pitch;
    case HazardType::FlammableGas: return FeatureKind::BeatRate;
    case HazardType::Temperature: return FeatureKind::Cutoff;
  }
  return FeatureKind::Pitch;
}

double primary_feature_value(SoundSet set, HazardType hazard, double level, const SoundConstants& c) {
  const SynthParams p = rtl_params(set, hazard, level, c);
  switch (primary_feature(set, hazard)) {
    case FeatureKind::ClickRate: return p.click_rate;
    case FeatureKind::GrainRate: return 1.0 / p.grain_interval;
    case FeatureKind::LfoRate: return p.lfo_rate;
    case FeatureKind::Pitch: return p.frequency;
    case FeatureKind::BeatRate: return p.lfo_rate;
    case FeatureKind::Cutoff: return p.cutoff;
  }
  return 0.0;
}

double level_from_feature(SoundSet set, HazardType hazard, double value, const SoundConstants& c) {
  double level = 0.0;
  if (set == SoundSet::Cog) {
    switch (hazard) {
      case HazardType::Radiation: {
        const auto& k = c.cog_radiation;
        level = (value - k.rate_min) / (k.rate_max - k.rate_min);
        break;
      }
      case HazardType::FlammableGas: {
        const auto& k = c.cog_gas;
        level = value > 0.0 ? (k.interval_max - 1.0 / value) / (k.interval_max - k.interval_min) : 0.0;
        break;
      }
      case HazardType::Temperature: {
        const auto& k = c.cog_temperature;
        level = (value - k.lfo_min) / (k.lfo_max - k.lfo_min);
        break;
      }
    }
  } else {
    switch (hazard) {
      case HazardType::Radiation: {
        const auto& k = c.comp_radiation;
        level = value > 0.0 ? std::log2(value / k.base) / k.octaves : 0.0;
        break;
      }
      case HazardType::FlammableGas: {
        const auto& k = c.comp_gas;
        level = (value - k.lfo_min) / (k.lfo_max - k.lfo_min);
        break;
      }
      case HazardType::Temperature: {
        const auto& k = c.comp_temperature;
        level = value > 0.0 ? std::log(value / k.cutoff_min) / std::log(k.cutoff_max / k.cutoff_min) : 0.0;
        break;
      }
    }
  }
  if (!std::isfinite(level)) return 0.0;
  return std::clamp(level, 0.0, 1.0);
}

}  // namespace hazsim::sound
