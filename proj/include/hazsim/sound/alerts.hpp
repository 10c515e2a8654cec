#pragma once

#include "hazsim/hazard_field.hpp"

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hazsim::sound {

enum class AlertEventKind {
  MediumRising,
  MediumFalling,
  Grunt,
  HighAlertEnter,
  HighAlertExit,
  FlangerEnter,
  FlangerExit,
};

std::string_view to_string(AlertEventKind k);

struct AlertThresholds {
  double medium = 0.5;
  double high = 0.9;
  double flanger = 0.95;
  double hysteresis = 0.03;
};

struct AlertChannel {
  double priority = 0.0;
  bool medium_armed = false;  // above the medium threshold
  bool high_active = false;
  bool flanger_active = false;
};

struct AlertKey {
  std::string robot;
  HazardType hazard = HazardType::Radiation;
  friend auto operator<=>(const AlertKey&, const AlertKey&) = default;
};

struct AlertEvent {
  AlertKey key;
  AlertEventKind kind;
  friend bool operator==(const AlertEvent&, const AlertEvent&) = default;
};

/// Per-(robot, hazard) alert channels plus the shared loop clock.
///
/// Upward crossings are strict (`priority > threshold`); a channel only drops
/// out once the priority falls below `threshold - hysteresis`. High-alert
/// loops read their position from `loop_phase()`, so concurrently active
/// alerts always play in phase. The clock origin resets only when an alert
/// starts while no other high alert is sounding.
class AlertState {
 public:
  explicit AlertState(AlertThresholds t = {}) : thresholds_(t) {}

  /// Feeds one priority sample; returns the events it triggers, in order.
  std::vector<AlertEvent> update(const AlertKey& key, double priority);

  void advance_clock(double seconds) { clock_s_ += seconds; }
  double clock() const { return clock_s_; }
  /// Seconds since the current loop cycle began (shared by all alerts).
  double loop_phase() const { return clock_s_ - origin_s_; }

  bool any_high_active() const;
  bool any_flanger_active() const;
  int active_high_count() const;

  const AlertChannel* channel(const AlertKey& key) const;
  const std::map<AlertKey, AlertChannel>& channels() const { return channels_; }
  const AlertThresholds& thresholds() const { return thresholds_; }

 private:
  AlertThresholds thresholds_;
  std::map<AlertKey, AlertChannel> channels_;
  double clock_s_ = 0.0;
  double origin_s_ = 0.0;
};

/// Batch form: applies each (key, priority) in order and concatenates events.
std::vector<AlertEvent> update_alerts(AlertState& state,
                                      const std::vector<std::pair<AlertKey, double>>& priorities);

}  // namespace hazsim::sound
