#include "hazsim/sound/render.hpp"

#include "hazsim/sound/voice.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hazsim::sound {

using nlohmann::json;

LevelTrajectory LevelTrajectory::constant(double level) {
  LevelTrajectory t;
  t.kind = Kind::Constant;
  t.level = level;
  return t;
}

LevelTrajectory LevelTrajectory::keyframes(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw std::invalid_argument("keyframe trajectory needs at least one point");
  std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  LevelTrajectory t;
  t.kind = Kind::Keyframes;
  t.points = std::move(points);
  return t;
}

LevelTrajectory LevelTrajectory::gaussian_sweep(double mu, double sigma, double sweep_duration) {
  if (!(sigma > 0.0) || !(sweep_duration > 0.0))
    throw std::invalid_argument("gaussian sweep needs positive sigma and duration");
  LevelTrajectory t;
  t.kind = Kind::GaussianSweep;
  t.mu = mu;
  t.sigma = sigma;
  t.sweep_duration = sweep_duration;
  return t;
}

double sweep_position(double t, double T) {
  const double u = std::clamp(t / T, 0.0, 1.0);
  return u <= 0.5 ? -1.0 + 4.0 * u : 3.0 - 4.0 * u;
}

double gaussian_level(double x, double mu, double sigma) {
  const double d = x - mu;
  return std::exp(-d * d / (2.0 * sigma * sigma));
}

double LevelTrajectory::at(double t) const {
  double v = 0.0;
  switch (kind) {
    case Kind::Constant: v = level; break;
    case Kind::Keyframes: {
      if (points.empty()) break;
      if (t <= points.front().first) {
        v = points.front().second;
        break;
      }
      if (t >= points.back().first) {
        v = points.back().second;
        break;
      }
      auto hi = std::upper_bound(points.begin(), points.end(), t,
                                 [](double x, const auto& p) { return x < p.first; });
      auto lo = hi - 1;
      const double span = hi->first - lo->first;
      v = span > 0 ? lo->second + (hi->second - lo->second) * (t - lo->first) / span : hi->second;
      break;
    }
    case Kind::GaussianSweep: v = gaussian_level(sweep_position(t, sweep_duration), mu, sigma); break;
  }
  return std::clamp(v, 0.0, 1.0);
}

json to_json(const LevelTrajectory& t) {
  switch (t.kind) {
    case LevelTrajectory::Kind::Constant: return json{{"kind", "constant"}, {"level", t.level}};
    case LevelTrajectory::Kind::Keyframes: {
      json pts = json::array();
      for (const auto& [time, lvl] : t.points) pts.push_back({time, lvl});
      return json{{"kind", "keyframes"}, {"points", pts}};
    }
    case LevelTrajectory::Kind::GaussianSweep:
      return json{{"kind", "gaussian_sweep"}, {"mu", t.mu}, {"sigma", t.sigma}, {"sweep_duration", t.sweep_duration}};
  }
  return json{};
}

LevelTrajectory trajectory_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return LevelTrajectory::constant(j.at("level").get<double>());
  if (kind == "keyframes") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j.at("points")) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return LevelTrajectory::keyframes(std::move(pts));
  }
  if (kind == "gaussian_sweep")
    return LevelTrajectory::gaussian_sweep(j.at("mu").get<double>(), j.value("sigma", 0.35),
                                           j.value("sweep_duration", 16.0));
  throw std::invalid_argument("unknown trajectory kind: " + kind);
}

AudioBlock render_trajectory(SoundSet set, HazardType hazard, const std::function<double(double)>& level,
                             double duration, int sample_rate, std::uint64_t seed, const SoundConstants& c) {
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
  const Eigen::Index total = static_cast<Eigen::Index>(std::llround(duration * sample_rate));
  AudioBlock out = AudioBlock::mono(total, sample_rate);
  Voice voice(sample_rate, seed, c);
  for (Eigen::Index start = 0; start < total; start += kDefaultBlockSize) {
    const int n = static_cast<int>(std::min<Eigen::Index>(kDefaultBlockSize, total - start));
    const double l = std::clamp(level(double(start) / sample_rate), 0.0, 1.0);
    out.samples.middleRows(start, n) = voice.render(rtl_params(set, hazard, l, c), n).samples;
  }
  return out;
}

AudioBlock render_trajectory(const RenderRequest& r, const SoundConstants& c) {
  const LevelTrajectory& traj = r.trajectory;
  return render_trajectory(
      r.set, r.hazard, [&traj](double t) { return traj.at(t); }, r.duration, r.sample_rate, r.seed, c);
}

json render_manifest(const RenderRequest& r, const std::string& audio_file, const SoundConstants& c) {
  return json{{"audio", audio_file},
              {"set", to_string(r.set)},
              {"hazard", to_string(r.hazard)},
              {"seed", r.seed},
              {"duration", r.duration},
              {"sample_rate", r.sample_rate},
              {"block_size", kDefaultBlockSize},
              {"bits_per_sample", 16},
              {"trajectory", to_json(r.trajectory)},
              {"constants", to_json(c)}};
}

RenderRequest request_from_manifest(const json& m) {
  RenderRequest r;
  const auto set = parse_sound_set(m.at("set").get<std::string>());
  const auto hazard = parse_hazard(m.at("hazard").get<std::string>());
  if (!set || !hazard) throw std::invalid_argument("manifest has an unknown set or hazard");
  r.set = *set;
  r.hazard = *hazard;
  r.seed = m.value("seed", std::uint64_t{1});
  r.duration = m.at("duration").get<double>();
  r.sample_rate = m.value("sample_rate", kDefaultSampleRate);
  r.trajectory = trajectory_from_json(m.at("trajectory"));
  return r;
}

}  // namespace hazsim::sound
