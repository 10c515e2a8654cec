#include "hazsim/service/session.hpp"

#include <algorithm>

namespace hazsim::service {

Session::Session(const Scenario& scenario, sound::SoundSet set, SessionConfig config)
    : cfg_(config), world_(make_world(scenario)), field_(scenario.field), audio_(set, sound::kDefaultSampleRate, config.seed) {
  if (!(cfg_.tick_rate > 0.0)) throw std::invalid_argument("tick rate must be positive");
}

ClientId Session::connect(std::vector<Outbound>& out) {
  const ClientId id = next_id_++;
  clients_.push_back(id);
  out.push_back({id, ControlStateMsg{false, controller_.has_value()}});
  out.push_back({id, SnapshotMsg{snapshot_of(world_)}});
  out.push_back({id, params()});
  out.push_back({id, alerts()});
  return id;
}

void Session::disconnect(ClientId id, std::vector<Outbound>& out) {
  clients_.erase(std::remove(clients_.begin(), clients_.end(), id), clients_.end());
  if (controller_ == id) {
    controller_.reset();
    send_control_state(out);
  }
}

void Session::send_control_state(std::vector<Outbound>& out) const {
  for (ClientId c : clients_) out.push_back({c, ControlStateMsg{controller_ == c, controller_.has_value()}});
}

void Session::handle(ClientId from, const ClientMessage& message, std::vector<Outbound>& out) {
  if (const auto* ctl = std::get_if<ControlMsg>(&message)) {
    if (ctl->action == ControlMsg::Action::Request && !controller_) {
      controller_ = from;
      send_control_state(out);
    } else if (ctl->action == ControlMsg::Action::Release && controller_ == from) {
      controller_.reset();
      send_control_state(out);
    } else {
      out.push_back({from, ControlStateMsg{controller_ == from, controller_.has_value()}});
    }
    return;
  }
  const auto& cmd = std::get<CommandMsg>(message);
  if (!controller_) {
    controller_ = from;
    send_control_state(out);
  }
  if (controller_ != from) {
    out.push_back({from, AckMsg{cmd.id, false, "another client holds control", world_.tick}});
    return;
  }
  const CommandResult r = apply_command(world_, cmd.command);
  out.push_back({from, AckMsg{cmd.id, r.accepted, r.reason, world_.tick}});
}

void Session::tick(std::vector<Outbound>& out) {
  const auto events = step(world_, field_, dt());
  audio_.on_events(world_, events);
  if (!events.empty()) out.push_back({std::nullopt, EventsMsg{world_.tick, events}});
  out.push_back({std::nullopt, SnapshotMsg{snapshot_of(world_)}});
  out.push_back({std::nullopt, params()});
  out.push_back({std::nullopt, alerts()});
}

ParamsMsg Session::params() const {
  ParamsMsg p;
  p.tick = world_.tick;
  p.sound_set = std::string(sound::to_string(audio_.sound_set()));
  p.mode = std::string(sound::to_string(sound::listening_mode(world_)));
  p.voices = audio_.rtl_frames(world_, field_);
  return p;
}

AlertsMsg Session::alerts() const {
  AlertsMsg a;
  a.tick = world_.tick;
  a.loop_phase = world_.alerts.loop_phase();
  for (const auto& [key, ch] : world_.alerts.channels())
    a.alerts.push_back({key.robot, key.hazard, ch.priority, ch.medium_armed, ch.high_active, ch.flanger_active});
  return a;
}

}  // namespace hazsim::service
