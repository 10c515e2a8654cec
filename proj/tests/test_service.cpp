#include "hazsim/service/protocol.hpp"
#include "hazsim/service/server.hpp"
#include "hazsim/service/session.hpp"

#include <doctest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <cstdlib>
#include <thread>

using namespace hazsim;
using namespace hazsim::service;
using nlohmann::json;

namespace {

const Scenario& demo() {
  static const Scenario s = load_scenario(HAZSIM_SCENARIO_DIR "/demo.json");
  return s;
}

template <class T>
std::vector<T> of_type(const std::vector<Outbound>& out, std::optional<ClientId> to = std::nullopt) {
  std::vector<T> r;
  for (const auto& o : out)
    if (const auto* m = std::get_if<T>(&o.message); m && (!to || !o.to || o.to == to)) r.push_back(*m);
  return r;
}

CommandMsg cmd(std::int64_t id, Command c) { return {id, std::move(c)}; }

std::vector<Command> sample_commands() {
  return {SelectRobot{"R2"},
          ToggleSelfRtl{},
          SetWaypoints{"R1", {{3.5, 4.5}, {10.25, 2.0}}},
          ClearWaypoint{"R1", 2},
          Go{"R3"},
          TagObject{"crate", HazardType::FlammableGas},
          TagObject{"crate", std::nullopt},
          MoveAvatar{MoveAvatar::Kind::Teleport, {12.5, 7.5}},
          MoveAvatar{MoveAvatar::Kind::JumpForward, {0.0, 0.0}},
          MoveAvatar{MoveAvatar::Kind::JumpBackward, {0.0, 0.0}},
          RotateAvatar{-3}};
}

void check_round_trip(const ServerMessage& m) {
  const json j = to_json(m);
  CHECK(j.at("v") == kProtocolVersion);
  const ServerMessage back = parse_server_message(json::parse(j.dump()));
  CHECK(back == m);
  CHECK(to_json(back) == j);
}

}  // namespace

TEST_CASE("client messages survive a round trip") {
  std::int64_t id = 1;
  for (const auto& c : sample_commands()) {
    const ClientMessage m = cmd(id++, c);
    const json j = to_json(m);
    CHECK(j.at("type") == "command");
    CHECK(parse_client_message(json::parse(j.dump())) == m);
  }
  for (auto a : {ControlMsg::Action::Request, ControlMsg::Action::Release}) {
    const ClientMessage m = ControlMsg{a};
    CHECK(parse_client_message(to_json(m)) == m);
  }
}

TEST_CASE("server messages survive a round trip") {
  Session s(demo(), sound::SoundSet::Comp);
  std::vector<Outbound> out;
  const ClientId a = s.connect(out);
  s.handle(a, cmd(1, SelectRobot{"R1"}), out);
  s.handle(a, cmd(2, TagObject{"drum", HazardType::Radiation}), out);
  for (int i = 0; i < 400; ++i) s.tick(out);
  REQUIRE(!of_type<EventsMsg>(out).empty());
  REQUIRE(!of_type<AckMsg>(out).empty());
  CHECK(!s.params().voices.empty());

  for (const auto& o : out) check_round_trip(o.message);
  check_round_trip(ErrorMsg{"bad \"quote\"\n"});
  check_round_trip(AlertsMsg{7, 1.25, {{"R1", HazardType::FlammableGas, 0.9, true, true, false}}});
  check_round_trip(EventsMsg{3, {{3, SimEventKind::HighAlertEnter, "R2", HazardType::Temperature, "", 0.93},
                                 {3, SimEventKind::ObjectRevealed, "R2", std::nullopt, "tank", 0.0}}});
}

TEST_CASE("snapshots omit hidden objects") {
  const WorldState w = make_world(demo());
  const Snapshot snap = snapshot_of(w);
  std::size_t revealed = 0;
  for (const auto& o : w.grid.objects) revealed += o.revealed ? 1 : 0;
  CHECK(snap.objects.size() == revealed);
  CHECK(revealed < w.grid.objects.size());
  const json j = to_json(snap);
  CHECK(!j.contains("hazards"));
  CHECK(j.at("coverage").size() == static_cast<std::size_t>(snap.rows));
  CHECK(j.at("coverage")[0].get<std::string>().size() == static_cast<std::size_t>(snap.cols));
}

TEST_CASE("malformed messages raise ProtocolError") {
  const json good = to_json(ClientMessage{cmd(4, Go{"R1"})});
  CHECK_NOTHROW(parse_client_message(good));

  auto broken = [&](auto edit) {
    json j = good;
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(parse_client_message(json::array()), ProtocolError);
  CHECK_THROWS_AS(parse_client_message(broken([](json& j) { j.erase("type"); })), ProtocolError);
  CHECK_THROWS_AS(parse_client_message(broken([](json& j) { j["type"] = "launch"; })), ProtocolError);
  CHECK_THROWS_AS(parse_client_message(broken([](json& j) { j["v"] = 2; })), ProtocolError);
  CHECK_THROWS_AS(parse_client_message(broken([](json& j) { j.erase("v"); })), ProtocolError);
  CHECK_THROWS_AS(parse_client_message(broken([](json& j) { j["id"] = "x"; })), ProtocolError);
  CHECK_THROWS_AS(parse_client_message(broken([](json& j) { j["command"]["op"] = "fly"; })), ProtocolError);
  CHECK_THROWS_AS(parse_client_message(broken([](json& j) { j["command"].erase("robot"); })), ProtocolError);
  CHECK_THROWS_AS(parse_client_message(json{{"type", "control"}, {"v", 1}, {"action", "steal"}}), ProtocolError);
  CHECK_THROWS_AS(
      parse_client_message(json{{"type", "command"},
                                {"v", 1},
                                {"id", 1},
                                {"command", {{"op", "set_waypoints"}, {"robot", "R1"}, {"positions", {{1.0}}}}}}),
      ProtocolError);
  CHECK_THROWS_AS(
      parse_client_message(json{
          {"type", "command"}, {"v", 1}, {"id", 1}, {"command", {{"op", "tag"}, {"object", "x"}, {"tag", "noise"}}}}),
      ProtocolError);
  CHECK_THROWS_AS(parse_server_message(json{{"type", "ack"}, {"v", 1}}), ProtocolError);
  CHECK_THROWS_AS(parse_server_message(json{{"type", "command"}, {"v", 1}}), ProtocolError);
}

TEST_CASE("greeting carries control state, snapshot, params and alerts") {
  Session s(demo(), sound::SoundSet::Cog);
  std::vector<Outbound> out;
  const ClientId a = s.connect(out);
  REQUIRE(out.size() == 4);
  for (const auto& o : out) CHECK(o.to == a);
  CHECK(std::holds_alternative<ControlStateMsg>(out[0].message));
  CHECK(std::get<SnapshotMsg>(out[1].message).snapshot.tick == 0);
  CHECK(std::get<ParamsMsg>(out[2].message).sound_set == "cog");
  CHECK(std::get<ParamsMsg>(out[2].message).mode == "off");
  CHECK(std::holds_alternative<AlertsMsg>(out[3].message));
}

TEST_CASE("one client holds control at a time") {
  Session s(demo(), sound::SoundSet::Cog);
  std::vector<Outbound> out;
  const ClientId a = s.connect(out), b = s.connect(out);
  out.clear();

  s.handle(a, cmd(1, SelectRobot{"R1"}), out);
  CHECK(s.controller() == a);
  auto acks = of_type<AckMsg>(out, a);
  REQUIRE(acks.size() == 1);
  CHECK(acks[0].accepted);
  const auto states = of_type<ControlStateMsg>(out, b);
  REQUIRE(!states.empty());
  CHECK(states.back().held);
  CHECK(!states.back().you_have_control);
  out.clear();

  const json before = to_json(snapshot_of(s.world()));
  s.handle(b, cmd(9, SelectRobot{"R2"}), out);
  acks = of_type<AckMsg>(out, b);
  REQUIRE(acks.size() == 1);
  CHECK(acks[0].id == 9);
  CHECK(!acks[0].accepted);
  CHECK(acks[0].reason == "another client holds control");
  CHECK(to_json(snapshot_of(s.world())) == before);

  s.handle(b, ControlMsg{ControlMsg::Action::Request}, out);
  CHECK(s.controller() == a);
  s.handle(b, ControlMsg{ControlMsg::Action::Release}, out);
  CHECK(s.controller() == a);

  out.clear();
  s.disconnect(a, out);
  CHECK(!s.controller());
  const auto freed = of_type<ControlStateMsg>(out, b);
  REQUIRE(freed.size() == 1);
  CHECK(!freed[0].held);

  s.handle(b, ControlMsg{ControlMsg::Action::Request}, out);
  CHECK(s.controller() == b);
  s.handle(b, ControlMsg{ControlMsg::Action::Release}, out);
  CHECK(!s.controller());
}

TEST_CASE("selection cycles through the session") {
  Session s(demo(), sound::SoundSet::Cog);
  std::vector<Outbound> out;
  const ClientId a = s.connect(out);
  auto mode = [&](const std::string& id) { return s.world().find_robot(id)->mode; };

  s.handle(a, cmd(1, SelectRobot{"R1"}), out);
  CHECK(mode("R1") == RobotMode::Rtl);
  CHECK(s.params().mode == "robot_rtl");
  s.handle(a, cmd(2, SelectRobot{"R2"}), out);
  CHECK(mode("R1") == RobotMode::Autonomous);
  CHECK(mode("R2") == RobotMode::Rtl);
  s.handle(a, cmd(3, SelectRobot{"R2"}), out);
  CHECK(mode("R2") == RobotMode::WaypointControl);
  s.handle(a, cmd(4, SelectRobot{"R2"}), out);
  CHECK(mode("R2") == RobotMode::Autonomous);
  CHECK(s.params().mode == "off");
  s.handle(a, cmd(5, ToggleSelfRtl{}), out);
  CHECK(s.params().mode == "self_rtl");
  CHECK(selection_count(s.world()) == 1);
}

TEST_CASE("rejected commands leave the snapshot unchanged") {
  Session s(demo(), sound::SoundSet::Cog);
  std::vector<Outbound> out;
  const ClientId a = s.connect(out);
  for (int i = 0; i < 20; ++i) s.tick(out);
  const std::vector<Command> bad = {SelectRobot{"R9"},
                                    SetWaypoints{"R1", {{3.5, 4.5}}},
                                    SetWaypoints{"R9", {{3.5, 4.5}}},
                                    ClearWaypoint{"R1", 1},
                                    Go{"R1"},
                                    TagObject{"drum", HazardType::FlammableGas},
                                    TagObject{"nothing", HazardType::FlammableGas},
                                    MoveAvatar{MoveAvatar::Kind::Teleport, {-5.0, 3.0}}};
  std::int64_t id = 100;
  for (const auto& c : bad) {
    const json before = to_json(snapshot_of(s.world()));
    out.clear();
    s.handle(a, cmd(id, c), out);
    const auto acks = of_type<AckMsg>(out, a);
    REQUIRE(acks.size() == 1);
    CHECK(acks[0].id == id);
    CHECK(!acks[0].accepted);
    CHECK(!acks[0].reason.empty());
    CHECK(to_json(snapshot_of(s.world())) == before);
    ++id;
  }
}

TEST_CASE("snapshot ticks strictly increase") {
  Session s(demo(), sound::SoundSet::Comp);
  std::vector<Outbound> out;
  const ClientId a = s.connect(out);
  for (int i = 0; i < 60; ++i) {
    if (i % 7 == 0) s.handle(a, cmd(i, SelectRobot{"R" + std::to_string(1 + i % 3)}), out);
    s.tick(out);
  }
  std::int64_t last = -1;
  for (const auto& snap : of_type<SnapshotMsg>(out)) {
    CHECK(snap.snapshot.tick > last);
    last = snap.snapshot.tick;
  }
  CHECK(last == 60);
  CHECK(s.dt() == doctest::Approx(0.05));
}

TEST_CASE("session config is validated") {
  CHECK_THROWS_AS(Session(demo(), sound::SoundSet::Cog, SessionConfig{0.0, 1}), std::invalid_argument);
}

TEST_CASE("default port honours HAZSIM_PORT") {
  ::unsetenv("HAZSIM_PORT");
  CHECK(default_port() == kDefaultPort);
  ::setenv("HAZSIM_PORT", "9123", 1);
  CHECK(default_port() == 9123);
  ::setenv("HAZSIM_PORT", "70000", 1);
  CHECK_THROWS_AS(default_port(), std::invalid_argument);
  ::setenv("HAZSIM_PORT", "12ab", 1);
  CHECK_THROWS_AS(default_port(), std::invalid_argument);
  ::unsetenv("HAZSIM_PORT");
}

TEST_CASE("websocket server relays commands and ticks") {
  namespace net = boost::asio;
  namespace websocket = boost::beast::websocket;

  Session session(demo(), sound::SoundSet::Cog, SessionConfig{50.0, 1});
  Server server(session, ServerConfig{"127.0.0.1", 0});
  const unsigned short port = server.port();
  REQUIRE(port != 0);
  std::thread loop([&] { server.run(); });

  net::io_context ioc;
  net::ip::tcp::resolver resolver(ioc);
  websocket::stream<net::ip::tcp::socket> ws(ioc);
  net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
  ws.handshake("127.0.0.1", "/");

  auto receive = [&] {
    boost::beast::flat_buffer buf;
    ws.read(buf);
    return parse_server_message(json::parse(boost::beast::buffers_to_string(buf.data())));
  };

  const auto first = receive();
  REQUIRE(std::holds_alternative<ControlStateMsg>(first));
  CHECK(!std::get<ControlStateMsg>(first).held);

  ws.text(true);
  ws.write(net::buffer(to_json(ClientMessage{cmd(42, SelectRobot{"R1"})}).dump()));
  ws.write(net::buffer(std::string("{not json")));

  std::optional<AckMsg> ack;
  bool got_error = false, saw_control = false;
  std::int64_t last_tick = -1;
  int snapshots = 0;
  for (int i = 0; i < 400 && (!ack || !got_error || snapshots < 5); ++i) {
    const auto m = receive();
    if (const auto* a = std::get_if<AckMsg>(&m)) ack = *a;
    if (std::holds_alternative<ErrorMsg>(m)) got_error = true;
    if (const auto* c = std::get_if<ControlStateMsg>(&m)) saw_control = saw_control || c->you_have_control;
    if (const auto* snap = std::get_if<SnapshotMsg>(&m)) {
      CHECK(snap->snapshot.tick > last_tick);
      last_tick = snap->snapshot.tick;
      ++snapshots;
    }
  }
  REQUIRE(ack);
  CHECK(ack->id == 42);
  CHECK(ack->accepted);
  CHECK(got_error);
  CHECK(saw_control);
  CHECK(snapshots >= 5);

  boost::beast::error_code ec;
  ws.close(websocket::close_code::normal, ec);
  server.stop();
  loop.join();
  CHECK(session.world().find_robot("R1")->mode == RobotMode::Rtl);
}

TEST_CASE("server refuses a port in use") {
  Session session(demo(), sound::SoundSet::Cog);
  Server a(session, ServerConfig{"127.0.0.1", 0});
  CHECK_THROWS_AS(Server(session, ServerConfig{"127.0.0.1", a.port()}), std::runtime_error);
  CHECK_THROWS_AS(Server(session, ServerConfig{"not an address", 0}), std::runtime_error);
}
