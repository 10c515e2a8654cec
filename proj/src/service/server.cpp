#include "hazsim/service/server.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <cstdlib>
#include <deque>
#include <map>
#include <stdexcept>

namespace hazsim::service {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

unsigned short default_port() {
  const char* env = std::getenv("HAZSIM_PORT");
  if (!env || !*env) return kDefaultPort;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0 || v > 65535) throw std::invalid_argument(std::string("bad HAZSIM_PORT: ") + env);
  return static_cast<unsigned short>(v);
}

class ServerConnection;

struct Server::Impl {
  Impl(Session& s, ServerConfig c) : session(s), cfg(std::move(c)), acceptor(ioc), timer(ioc) {}

  void accept();
  void schedule_tick();
  void on_tick();
  void opened(const std::shared_ptr<ServerConnection>& c);
  void closed(ClientId id);
  void dispatch(std::vector<Outbound>& out);

  Session& session;
  ServerConfig cfg;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::steady_timer timer;
  std::chrono::steady_clock::time_point next_tick;
  std::map<ClientId, std::shared_ptr<ServerConnection>> clients;
  std::deque<std::pair<ClientId, ClientMessage>> inbox;
};

class ServerConnection : public std::enable_shared_from_this<ServerConnection> {
 public:
  ServerConnection(tcp::socket socket, Server::Impl& server) : ws_(std::move(socket)), server_(server) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->server_.opened(self);
      self->read();
    });
  }

  void send(std::string text) {
    if (closed_) return;
    if (queue_.size() >= server_.cfg.max_queued_messages) {
      close();
      return;
    }
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

  ClientId id = 0;

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->finish();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      try {
        self->server_.inbox.emplace_back(self->id, parse_client_message(nlohmann::json::parse(text)));
      } catch (const std::exception& e) {
        self->send(to_json(ServerMessage{ErrorMsg{e.what()}}).dump());
      }
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->finish();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty() && !self->closed_) self->write();
    });
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    close();
    server_.closed(id);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  Server::Impl& server_;
  bool closed_ = false, finished_ = false;
};

void Server::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec == net::error::operation_aborted) return;
    if (!ec) std::make_shared<ServerConnection>(std::move(socket), *this)->start();
    accept();
  });
}

void Server::Impl::schedule_tick() {
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(session.dt()));
  next_tick += period;
  // Fall back to "now" after a stall rather than bursting catch-up ticks.
  if (next_tick < std::chrono::steady_clock::now()) next_tick = std::chrono::steady_clock::now() + period;
  timer.expires_at(next_tick);
  timer.async_wait([this](beast::error_code ec) {
    if (!ec) on_tick();
  });
}

void Server::Impl::on_tick() {
  std::vector<Outbound> out;
  while (!inbox.empty()) {
    auto [from, msg] = std::move(inbox.front());
    inbox.pop_front();
    if (clients.count(from)) session.handle(from, msg, out);
  }
  session.tick(out);
  dispatch(out);
  schedule_tick();
}

void Server::Impl::opened(const std::shared_ptr<ServerConnection>& c) {
  std::vector<Outbound> out;
  c->id = session.connect(out);
  clients[c->id] = c;
  dispatch(out);
}

void Server::Impl::closed(ClientId id) {
  if (!clients.erase(id)) return;
  std::erase_if(inbox, [id](const auto& m) { return m.first == id; });
  std::vector<Outbound> out;
  session.disconnect(id, out);
  dispatch(out);
}

void Server::Impl::dispatch(std::vector<Outbound>& out) {
  for (auto& o : out) {
    const std::string text = to_json(o.message).dump();
    if (o.to) {
      if (auto it = clients.find(*o.to); it != clients.end()) it->second->send(text);
    } else {
      // Copy: a send may drop a slow client and erase it from the map.
      auto targets = clients;
      for (auto& [id, c] : targets) c->send(text);
    }
  }
  out.clear();
}

Server::Server(Session& session, ServerConfig config) : impl_(std::make_unique<Impl>(session, std::move(config))) {
  beast::error_code ec;
  const auto address = net::ip::make_address(impl_->cfg.host, ec);
  if (ec) throw std::runtime_error("bad host address '" + impl_->cfg.host + "'");
  const tcp::endpoint ep{address, impl_->cfg.port};
  impl_->acceptor.open(ep.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(ep, ec);
  if (!ec) impl_->acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec)
    throw std::runtime_error("cannot listen on " + impl_->cfg.host + ":" + std::to_string(impl_->cfg.port) + ": " +
                             ec.message());
}

Server::~Server() = default;

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  impl_->accept();
  impl_->next_tick = std::chrono::steady_clock::now();
  impl_->schedule_tick();
  impl_->ioc.run();
}

void Server::stop() {
  net::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
    impl_->timer.cancel();
    for (auto& [id, c] : impl_->clients) c->close();
    impl_->ioc.stop();
  });
}

}  // namespace hazsim::service
