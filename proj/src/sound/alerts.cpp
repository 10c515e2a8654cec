#include "hazsim/sound/alerts.hpp"

#include <stdexcept>

namespace hazsim::sound {

std::string_view to_string(AlertEventKind k) {
  switch (k) {
    case AlertEventKind::MediumRising: return "MediumAlertRising";
    case AlertEventKind::MediumFalling: return "MediumAlertFalling";
    case AlertEventKind::Grunt: return "Grunt";
    case AlertEventKind::HighAlertEnter: return "HighAlertEnter";
    case AlertEventKind::HighAlertExit: return "HighAlertExit";
    case AlertEventKind::FlangerEnter: return "FlangerEnter";
    case AlertEventKind::FlangerExit: return "FlangerExit";
  }
  return "Unknown";
}

std::vector<AlertEvent> AlertState::update(const AlertKey& key, double priority) {
  if (!(priority >= 0.0 && priority <= 1.0))
    throw std::invalid_argument("alert priority must lie in [0, 1]");

  const bool others_high = any_high_active();
  AlertChannel& ch = channels_[key];
  ch.priority = priority;
  const auto& t = thresholds_;
  std::vector<AlertEvent> out;
  auto emit = [&](AlertEventKind k) { out.push_back({key, k}); };

  // Rising edges, lowest threshold first.
  if (!ch.medium_armed && priority > t.medium) {
    ch.medium_armed = true;
    emit(AlertEventKind::MediumRising);
  }
  if (!ch.high_active && priority > t.high) {
    ch.high_active = true;
    if (!others_high) origin_s_ = clock_s_;
    emit(AlertEventKind::Grunt);
    emit(AlertEventKind::HighAlertEnter);
  }
  if (ch.high_active && !ch.flanger_active && priority > t.flanger) {
    ch.flanger_active = true;
    emit(AlertEventKind::FlangerEnter);
  }

  // Falling edges, highest threshold first.
  if (ch.flanger_active && priority < t.flanger - t.hysteresis) {
    ch.flanger_active = false;
    emit(AlertEventKind::FlangerExit);
  }
  if (ch.high_active && priority < t.high - t.hysteresis) {
    ch.high_active = false;
    emit(AlertEventKind::HighAlertExit);
  }
  if (ch.medium_armed && priority < t.medium - t.hysteresis) {
    ch.medium_armed = false;
    emit(AlertEventKind::MediumFalling);
  }
  return out;
}

bool AlertState::any_high_active() const {
  for (const auto& [k, ch] : channels_)
    if (ch.high_active) return true;
  return false;
}

bool AlertState::any_flanger_active() const {
  for (const auto& [k, ch] : channels_)
    if (ch.flanger_active) return true;
  return false;
}

int AlertState::active_high_count() const {
  int n = 0;
  for (const auto& [k, ch] : channels_) n += ch.high_active ? 1 : 0;
  return n;
}

const AlertChannel* AlertState::channel(const AlertKey& key) const {
  auto it = channels_.find(key);
  return it == channels_.end() ? nullptr : &it->second;
}

std::vector<AlertEvent> update_alerts(AlertState& state,
                                      const std::vector<std::pair<AlertKey, double>>& priorities) {
  std::vector<AlertEvent> out;
  for (const auto& [key, p] : priorities) {
    auto ev = state.update(key, p);
    out.insert(out.end(), ev.begin(), ev.end());
  }
  return out;
}

}  // namespace hazsim::sound
