#pragma once

#include "hazsim/sim.hpp"
#include "hazsim/sound/earcons.hpp"
#include "hazsim/sound/mixer.hpp"
#include "hazsim/sound/voice.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hazsim::sound {

/// One continuous voice as streamed to remote clients.
struct VoiceFrame {
  std::string id;  // e.g. "rtl/radiation", "alert/r1/gas"
  SourceCategory category = SourceCategory::Rtl;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  SynthParams params;
};
nlohmann::json to_json(const VoiceFrame& f);

/// Listening mode implied by world selection state.
ListeningMode listening_mode(const WorldState& world);

/// Sonification for a running session: RTL voices for the selected source,
/// notification and alert earcons driven by simulation events, UI grunts,
/// all mixed for the avatar's pose.
class SessionAudio {
 public:
  explicit SessionAudio(SoundSet set, int sample_rate = kDefaultSampleRate, std::uint64_t seed = 1,
                        const SoundConstants& c = default_constants());

  void on_events(const WorldState& world, const std::vector<SimEvent>& events);
  void on_command(const CommandResult& result);

  /// Parameter frames for the current RTL source (empty when listening is off
  /// or Self-RTL stands on an untraversed tile).
  std::vector<VoiceFrame> rtl_frames(const WorldState& world, const HazardField& field) const;

  /// Renders `frames` stereo frames following the current world state.
  AudioBlock render(const WorldState& world, const HazardField& field, Eigen::Index frames);

  SoundSet sound_set() const { return set_; }
  int sample_rate() const { return fs_; }

 private:
  struct Pending {
    AudioBlock block;
    Eigen::Index offset = 0;
    std::string robot;  // follows this robot when set
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    SourceCategory category = SourceCategory::Notification;
  };
  void enqueue(AudioBlock block, const WorldState& world, const std::string& robot, SourceCategory cat);

  SoundSet set_;
  int fs_;
  SoundConstants c_;
  std::uint64_t seed_;
  std::uint64_t earcon_count_ = 0;
  std::array<Voice, 3> rtl_;
  NotificationGate gate_;
  SceneMixer mixer_;
  std::vector<Pending> pending_;
};

}  // namespace hazsim::sound
