#include "hazsim/study.hpp"

#include "hazsim/sound/dsp.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace hazsim::study {

using sound::SoundSet;

sound::RenderRequest TrialSpec::render_request(int sample_rate) const {
  sound::RenderRequest r;
  r.set = set;
  r.hazard = hazard;
  r.trajectory = sound::LevelTrajectory::gaussian_sweep(mu, sigma, sweep_duration);
  r.duration = sweep_duration;
  r.sample_rate = sample_rate;
  r.seed = seed;
  return r;
}

nlohmann::json to_json(const TrialSpec& t) {
  return nlohmann::json{{"index", t.index},   {"seed", t.seed},
                        {"mu", t.mu},         {"sigma", t.sigma},
                        {"sweep_duration", t.sweep_duration},
                        {"set", std::string(sound::to_string(t.set))},
                        {"hazard", std::string(to_string(t.hazard))},
                        {"repeat", t.repeat}};
}

TrialSpec trial_from_json(const nlohmann::json& j) {
  TrialSpec t;
  t.index = j.value("index", 0);
  t.seed = j.at("seed").get<std::uint64_t>();
  t.mu = j.at("mu").get<double>();
  t.sigma = j.value("sigma", 0.35);
  t.sweep_duration = j.value("sweep_duration", 16.0);
  const auto set = sound::parse_sound_set(j.at("set").get<std::string>());
  const auto hazard = parse_hazard(j.at("hazard").get<std::string>());
  if (!set || !hazard) throw std::invalid_argument("trial: unknown set or hazard");
  t.set = *set;
  t.hazard = *hazard;
  t.repeat = j.value("repeat", 0);
  if (t.mu < -1.0 || t.mu > 1.0) throw std::invalid_argument("trial: mu outside [-1, 1]");
  if (!(t.sigma > 0.0) || !(t.sweep_duration > 0.0)) throw std::invalid_argument("trial: sigma and sweep_duration must be positive");
  return t;
}

namespace {

template <class T>
void shuffle(std::vector<T>& v, sound::dsp::Noise& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * double(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

std::vector<TrialSpec> gen_trials(std::uint64_t seed, const StudyConfig& cfg) {
  if (cfg.trials_per_sound < 1) throw std::invalid_argument("gen_trials: trials_per_sound must be at least 1");
  sound::dsp::Noise rng(seed);
  std::vector<std::vector<TrialSpec>> blocks;
  for (SoundSet set : sound::kAllSoundSets)
    for (HazardType h : kAllHazards) {
      std::vector<TrialSpec> block;
      for (int k = 0; k < cfg.trials_per_sound; ++k) {
        TrialSpec t;
        t.set = set;
        t.hazard = h;
        t.repeat = k;
        t.mu = rng.bipolar();
        t.sigma = cfg.sigma;
        t.sweep_duration = cfg.sweep_duration;
        t.seed = static_cast<std::uint64_t>(rng.uniform() * 0x1.0p53);
        block.push_back(t);
      }
      blocks.push_back(std::move(block));
    }
  shuffle(blocks, rng);
  std::vector<TrialSpec> out;
  for (auto& b : blocks) {
    shuffle(b, rng);
    for (auto& t : b) {
      t.index = static_cast<int>(out.size());
      out.push_back(t);
    }
  }
  return out;
}

Stimulus run_trial(const TrialSpec& trial, int sample_rate, const sound::SoundConstants& c) {
  return {sound::render_trajectory(trial.render_request(sample_rate), c), trial.mu};
}

std::vector<MachineParticipant::TrackPoint> MachineParticipant::level_track(const TrialSpec& trial,
                                                                            const sound::AudioBlock& audio) const {
  const auto f = sound::primary_feature(trial.set, trial.hazard);
  const bool slow = f == sound::FeatureKind::BeatRate || f == sound::FeatureKind::LfoRate ||
                    f == sound::FeatureKind::GrainRate;
  const double win = slow ? slow_window_s : window_s;
  const auto n = static_cast<Eigen::Index>(std::lround(win * audio.sample_rate));
  const auto hop = static_cast<Eigen::Index>(std::lround(hop_s * audio.sample_rate));
  std::vector<TrackPoint> track;
  for (Eigen::Index start = 0; start + n <= audio.frames(); start += hop) {
    const double centre = (double(start) + 0.5 * double(n)) / audio.sample_rate;
    double level = 0.0;
    try {
      level = decode::invert_level(trial.set, trial.hazard, audio.slice(start, n), decoder).level;
    } catch (const decode::NoSignal&) {
    }
    track.push_back({centre, sound::sweep_position(centre, trial.sweep_duration), level});
  }
  return track;
}

double MachineParticipant::respond(const TrialSpec& trial, const sound::AudioBlock& audio) const {
  const auto track = level_track(trial, audio);
  if (track.empty()) return 0.0;
  const auto best = std::max_element(track.begin(), track.end(),
                                     [](const TrackPoint& a, const TrackPoint& b) { return a.level < b.level; });
  if (best->level <= 0.0) return 0.0;
  // log of a Gaussian is a parabola in position; fit it to the upper part of the track.
  std::vector<const TrackPoint*> used;
  for (const auto& p : track)
    if (p.level >= fit_floor * best->level && p.level > 1e-6) used.push_back(&p);
  double answer = best->position;
  if (used.size() >= 3) {
    Eigen::MatrixXd a(used.size(), 3);
    Eigen::VectorXd b(used.size());
    for (std::size_t i = 0; i < used.size(); ++i) {
      const double x = used[i]->position;
      a.row(static_cast<Eigen::Index>(i)) << 1.0, x, x * x;
      b[static_cast<Eigen::Index>(i)] = std::log(used[i]->level);
    }
    const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(b);
    if (coef[2] < 0.0) answer = -coef[1] / (2.0 * coef[2]);
  }
  return std::clamp(answer, -1.0, 1.0);
}

// ---------------------------------------------------------------------------

namespace {

struct Moments {
  double mean = 0.0, sd = 0.0;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  if (x.empty()) return m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
  if (x.size() < 2) return m;
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.sd = std::sqrt(ss / double(x.size() - 1));
  return m;
}

using SoundKey = std::pair<SoundSet, HazardType>;

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

ScoreTable score(const std::vector<TrialResponse>& responses, double k_sd) {
  std::map<std::pair<std::string, SoundKey>, std::vector<double>> cells;
  for (const auto& r : responses) cells[{r.participant, {r.set, r.hazard}}].push_back(r.error());

  ScoreTable t;
  std::map<SoundKey, std::vector<const ParticipantScore*>> by_sound;
  for (const auto& [key, errs] : cells) {
    ParticipantScore p;
    p.participant = key.first;
    p.set = key.second.first;
    p.hazard = key.second.second;
    p.trials = static_cast<int>(errs.size());
    p.mean_error = std::accumulate(errs.begin(), errs.end(), 0.0) / double(errs.size());
    t.participants.push_back(p);
  }
  for (const auto& p : t.participants) by_sound[{p.set, p.hazard}].push_back(&p);

  std::vector<std::string> removed;
  for (const auto& [key, ps] : by_sound) {
    std::vector<double> x;
    for (const auto* p : ps) x.push_back(p->mean_error);
    const Moments m = moments(x);
    for (const auto* p : ps)
      if (std::abs(p->mean_error - m.mean) > k_sd * m.sd) removed.push_back(p->participant);
  }
  std::sort(removed.begin(), removed.end());
  removed.erase(std::unique(removed.begin(), removed.end()), removed.end());
  t.removed = removed;

  for (auto& p : t.participants) {
    p.outlier = std::binary_search(removed.begin(), removed.end(), p.participant);
    p.sqrt_error = std::sqrt(p.mean_error);
  }
  for (SoundSet set : sound::kAllSoundSets)
    for (HazardType h : kAllHazards) {
      std::vector<double> raw, tr;
      for (const auto& p : t.participants)
        if (p.set == set && p.hazard == h && !p.outlier) {
          raw.push_back(p.mean_error);
          tr.push_back(p.sqrt_error);
        }
      const Moments a = moments(raw), b = moments(tr);
      t.sounds.push_back({set, h, static_cast<int>(raw.size()), a.mean, a.sd, b.mean, b.sd});
    }
  return t;
}

ScoreTable score(const std::vector<double>& responses, const std::vector<double>& keys,
                 const std::vector<TrialGroup>& grouping, double k_sd) {
  if (responses.size() != keys.size() || responses.size() != grouping.size())
    throw std::invalid_argument("score: responses, keys and grouping must have equal length");
  std::vector<TrialResponse> rs;
  for (std::size_t i = 0; i < responses.size(); ++i)
    rs.push_back({grouping[i].participant, grouping[i].set, grouping[i].hazard, keys[i], responses[i]});
  return score(rs, k_sd);
}

std::string responses_csv(const std::vector<TrialResponse>& responses) {
  std::string out = "participant,set,hazard,key,response,error\n";
  for (const auto& r : responses)
    out += r.participant + "," + std::string(sound::to_string(r.set)) + "," + std::string(to_string(r.hazard)) + "," +
           fmt(r.key, "%.17g") + "," + fmt(r.response, "%.17g") + "," + fmt(r.error(), "%.17g") + "\n";
  return out;
}

std::vector<TrialResponse> responses_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<TrialResponse> out;
  std::map<std::string, int> col;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (col.empty()) {
      for (std::size_t i = 0; i < f.size(); ++i) col[f[i]] = static_cast<int>(i);
      for (const char* need : {"participant", "set", "hazard", "key", "response"})
        if (!col.count(need)) throw std::invalid_argument(std::string("responses csv: missing column ") + need);
      continue;
    }
    auto at = [&](const char* name) -> const std::string& {
      const auto i = static_cast<std::size_t>(col.at(name));
      if (i >= f.size()) throw std::invalid_argument("responses csv: short row at line " + std::to_string(line_no));
      return f[i];
    };
    const auto set = sound::parse_sound_set(at("set"));
    const auto hazard = parse_hazard(at("hazard"));
    if (!set || !hazard) throw std::invalid_argument("responses csv: bad set or hazard at line " + std::to_string(line_no));
    out.push_back({at("participant"), *set, *hazard, std::stod(at("key")), std::stod(at("response"))});
  }
  return out;
}

std::string participants_csv(const ScoreTable& t) {
  std::string out = "participant,set,hazard,trials,mean_error,sqrt_error,outlier\n";
  for (const auto& p : t.participants)
    out += p.participant + "," + std::string(sound::to_string(p.set)) + "," + std::string(to_string(p.hazard)) + "," +
           std::to_string(p.trials) + "," + fmt(p.mean_error) + "," + fmt(p.sqrt_error) + "," +
           (p.outlier ? "1" : "0") + "\n";
  return out;
}

std::string score_csv(const ScoreTable& t) {
  std::string out = "set,hazard,n,mean_error,sd_error,mean_sqrt_error,sd_sqrt_error\n";
  for (const auto& s : t.sounds)
    out += std::string(sound::to_string(s.set)) + "," + std::string(to_string(s.hazard)) + "," + std::to_string(s.n) +
           "," + fmt(s.mean_error) + "," + fmt(s.sd_error) + "," + fmt(s.mean_sqrt) + "," + fmt(s.sd_sqrt) + "\n";
  return out;
}

CohortResult run_machine_cohort(std::uint64_t seed, int participants, const StudyConfig& cfg,
                                const MachineParticipant& who, int sample_rate) {
  if (participants < 1) throw std::invalid_argument("run_machine_cohort: need at least one participant");
  CohortResult r;
  std::vector<std::string> names;
  for (int p = 0; p < participants; ++p) {
    char id[16];
    std::snprintf(id, sizeof id, "m%02d", p + 1);
    for (auto& t : gen_trials(seed + static_cast<std::uint64_t>(p), cfg)) {
      r.trials.push_back(t);
      names.push_back(id);
    }
  }
  std::vector<double> answers(r.trials.size(), 0.0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < r.trials.size();)
      answers[i] = who.respond(r.trials[i], run_trial(r.trials[i], sample_rate).audio);
  };
  const unsigned n_workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  std::vector<std::future<void>> pool;
  for (unsigned w = 0; w < n_workers; ++w) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const auto& t = r.trials[i];
    r.responses.push_back({names[i], t.set, t.hazard, t.mu, answers[i]});
  }
  r.table = score(r.responses);
  return r;
}

}  // namespace hazsim::study
