#pragma once

#include "hazsim/service/session.hpp"

#include <memory>
#include <string>

namespace hazsim::service {

inline constexpr unsigned short kDefaultPort = 8765;

/// HAZSIM_PORT if set, else 8765. Throws std::invalid_argument on a bad value.
unsigned short default_port();

struct ServerConfig {
  std::string host = "127.0.0.1";
  unsigned short port = kDefaultPort;  // 0 picks an ephemeral port
  std::size_t max_queued_messages = 512;  // per client; slower clients are dropped
};

/// WebSocket front end for a Session. One thread runs the I/O and the fixed-rate
/// loop; connection handlers only enqueue parsed client messages, which the loop
/// drains at the start of each tick.
class Server {
 public:
  /// Binds immediately; throws std::runtime_error if the port is unavailable.
  Server(Session& session, ServerConfig config = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  /// Runs until stop() is called.
  void run();
  /// Thread-safe.
  void stop();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace hazsim::service
