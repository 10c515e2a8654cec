#pragma once

#include "hazsim/decode/decoder.hpp"
#include "hazsim/sound/render.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace hazsim::study {

/// One stimulus: a hidden Gaussian over a position that sweeps -1 -> 1 -> -1.
struct TrialSpec {
  int index = 0;               // presentation order
  std::uint64_t seed = 1;      // render seed
  double mu = 0.0;             // answer key, in [-1, 1]
  double sigma = 0.35;         // position units
  double sweep_duration = 16.0;  // s
  sound::SoundSet set = sound::SoundSet::Cog;
  HazardType hazard = HazardType::Radiation;
  int repeat = 0;              // 0-based trial number within its sound block

  double level_at_position(double position) const { return sound::gaussian_level(position, mu, sigma); }
  sound::RenderRequest render_request(int sample_rate = sound::kDefaultSampleRate) const;
  friend bool operator==(const TrialSpec&, const TrialSpec&) = default;
};

nlohmann::json to_json(const TrialSpec& t);
TrialSpec trial_from_json(const nlohmann::json& j);

struct StudyConfig {
  int trials_per_sound = 3;
  double sigma = 0.35;
  double sweep_duration = 16.0;
};

/// Six sound blocks of `trials_per_sound` trials each. Block order and trial
/// order inside each block are shuffled by `seed`.
std::vector<TrialSpec> gen_trials(std::uint64_t seed, const StudyConfig& cfg = {});

struct Stimulus {
  sound::AudioBlock audio;
  double key = 0.0;
};
Stimulus run_trial(const TrialSpec& trial, int sample_rate = sound::kDefaultSampleRate,
                   const sound::SoundConstants& c = sound::default_constants());

/// Decoder-driven respondent: estimates the level over sliding windows, maps
/// each window centre to a sweep position and fits a Gaussian peak.
struct MachineParticipant {
  double window_s = 1.0;        // for pitch, click and cutoff features
  double slow_window_s = 2.0;   // for envelope-rate features
  double hop_s = 0.25;
  double fit_floor = 0.4;       // share of the track maximum used for the fit
  decode::DecoderConfig decoder;

  struct TrackPoint {
    double time, position, level;
  };
  std::vector<TrackPoint> level_track(const TrialSpec& trial, const sound::AudioBlock& audio) const;
  /// Position in [-1, 1] judged to hold the maximum.
  double respond(const TrialSpec& trial, const sound::AudioBlock& audio) const;
};

// ---------------------------------------------------------------------------
// Scoring

struct TrialResponse {
  std::string participant;
  sound::SoundSet set = sound::SoundSet::Cog;
  HazardType hazard = HazardType::Radiation;
  double key = 0.0;
  double response = 0.0;
  double error() const { return std::abs(response - key); }
};

struct ParticipantScore {
  std::string participant;
  sound::SoundSet set;
  HazardType hazard;
  int trials = 0;
  double mean_error = 0.0;
  double sqrt_error = 0.0;
  bool outlier = false;  // whole participant removed
};

struct SoundScore {
  sound::SoundSet set;
  HazardType hazard;
  int n = 0;  // participants retained
  double mean_error = 0.0, sd_error = 0.0;
  double mean_sqrt = 0.0, sd_sqrt = 0.0;
};

struct ScoreTable {
  std::vector<ParticipantScore> participants;  // sorted by participant, set, hazard
  std::vector<std::string> removed;            // sorted
  std::vector<SoundScore> sounds;              // one row per sound, fixed order
};

/// Per-participant, per-sound mean absolute error; a participant with any
/// sound mean more than `k_sd` sample SDs from that sound's cohort mean is
/// removed; survivors are square-root transformed and summarised.
ScoreTable score(const std::vector<TrialResponse>& responses, double k_sd = 3.0);

/// Parallel-array form. Throws std::invalid_argument on mismatched lengths.
struct TrialGroup {
  std::string participant;
  sound::SoundSet set;
  HazardType hazard;
};
ScoreTable score(const std::vector<double>& responses, const std::vector<double>& keys,
                 const std::vector<TrialGroup>& grouping, double k_sd = 3.0);

std::string responses_csv(const std::vector<TrialResponse>& responses);
std::vector<TrialResponse> responses_from_csv(const std::string& text);
std::string participants_csv(const ScoreTable& t);
std::string score_csv(const ScoreTable& t);

// ---------------------------------------------------------------------------
// Machine cohort

struct CohortResult {
  std::vector<TrialSpec> trials;  // all participants, in participant order
  std::vector<TrialResponse> responses;
  ScoreTable table;
};

/// Participant p gets its own trial list from seed + p. Trials run in parallel;
/// results do not depend on scheduling.
CohortResult run_machine_cohort(std::uint64_t seed, int participants, const StudyConfig& cfg = {},
                                const MachineParticipant& who = {}, int sample_rate = sound::kDefaultSampleRate);

}  // namespace hazsim::study
