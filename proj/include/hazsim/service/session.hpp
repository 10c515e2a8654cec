#pragma once

#include "hazsim/scenario.hpp"
#include "hazsim/service/protocol.hpp"
#include "hazsim/sound/engine.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hazsim::service {

using ClientId = std::uint64_t;

struct Outbound {
  std::optional<ClientId> to;  // empty = every client
  ServerMessage message;
};

struct SessionConfig {
  double tick_rate = 20.0;  // Hz
  std::uint64_t seed = 1;
};

/// Authoritative session state. Not thread-safe: the owner calls it from a
/// single loop and relays messages to and from clients through queues.
///
/// Control is first-come: a client holds it after requesting it, or after its
/// first command while nobody holds it, and keeps it until it releases or
/// disconnects. Commands from other clients are rejected.
class Session {
 public:
  Session(const Scenario& scenario, sound::SoundSet set, SessionConfig config = {});

  /// Registers a client and returns its greeting (control state, snapshot).
  ClientId connect(std::vector<Outbound>& out);
  void disconnect(ClientId id, std::vector<Outbound>& out);
  void handle(ClientId from, const ClientMessage& message, std::vector<Outbound>& out);
  /// Advances one tick and appends the broadcast messages for it.
  void tick(std::vector<Outbound>& out);

  const WorldState& world() const { return world_; }
  const HazardField& field() const { return field_; }
  double dt() const { return 1.0 / cfg_.tick_rate; }
  std::optional<ClientId> controller() const { return controller_; }

  ParamsMsg params() const;
  AlertsMsg alerts() const;

 private:
  void send_control_state(std::vector<Outbound>& out) const;

  SessionConfig cfg_;
  WorldState world_;
  HazardField field_;
  sound::SessionAudio audio_;
  std::vector<ClientId> clients_;
  std::optional<ClientId> controller_;
  ClientId next_id_ = 1;
};

}  // namespace hazsim::service
