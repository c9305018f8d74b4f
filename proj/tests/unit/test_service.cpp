#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "json.hpp"

#include "dex/io/report.hpp"
#include "dex/service/server.hpp"

using namespace dex;
using namespace dex::service;
using nlohmann::json;

namespace {

engine::EngineConfig short_config() {
  engine::EngineConfig c;
  c.scene.protocol.familiarization_s = 0.5;
  c.scene.protocol.trial_s = 1.0;
  c.scene.protocol.trials = 2;
  c.scene.protocol.break_s = 0.2;
  return c;
}

ServiceConfig service_config(engine::EngineConfig engine) {
  ServiceConfig c;
  c.engine = std::move(engine);
  return c;
}

std::string input_text(std::int64_t t_us, const char* controller, Vec3 p,
                       std::array<double, 4> q = {1.0, 0.0, 0.0, 0.0}, bool button = false,
                       double jaw = 0.0) {
  json j;
  j["type"] = "input";
  j["t_us"] = t_us;
  j["controller"] = controller;
  j["pose"] = {{"p", {p.x, p.y, p.z}}, {"q", {q[0], q[1], q[2], q[3]}}};
  j["button"] = button;
  j["jaw"] = jaw;
  return j.dump();
}

json drain_one(Outbox& box) {
  const auto m = box.pop();
  REQUIRE(m.has_value());
  return json::parse(*m);
}

std::vector<json> drain(Outbox& box) {
  std::vector<json> out;
  while (auto m = box.pop()) {
    out.push_back(json::parse(*m));
  }
  return out;
}

// Feeds one text message through the protocol and into the service.
void feed(EngineService& svc, ClientSession& session, const std::shared_ptr<Outbox>& box,
          const std::string& text) {
  InboundResult r = handle_inbound(session, text, svc.context());
  for (auto& reply : r.replies) {
    box->push(reply);
  }
  if (r.joined) {
    svc.attach(box);
  }
  if (r.forward) {
    svc.submit(box, *r.forward);
  }
}

}  // namespace

TEST_CASE("hello is answered with the scene description and protocol configuration") {
  const auto config = short_config();
  const ProtocolContext ctx{&config, InputMode::Poses};
  ClientSession s;
  const auto r = handle_inbound(s, R"({"type":"hello","role":"ui"})", ctx);
  CHECK(r.joined);
  CHECK_FALSE(r.close);
  REQUIRE(r.replies.size() == 1);
  const json w = json::parse(r.replies[0]);
  CHECK(w["type"] == "welcome");
  CHECK(w["role"] == "ui");
  CHECK(w["input"] == "poses");
  CHECK(w["protocol"]["trials"] == 2);
  CHECK(w["protocol"]["trial_s"] == 1.0);
  CHECK(w["scene"]["pegs"].size() == 12);
  CHECK(w["scene"]["instruments"].size() == 2);
  CHECK(w["scene"]["instruments"][0]["limits"].size() == 6);
}

TEST_CASE("anything before hello is a protocol error that closes the connection") {
  const auto config = short_config();
  const ProtocolContext ctx{&config, InputMode::Poses};
  for (const std::string& text : {input_text(0, "left", {}), std::string("not json"),
                                 std::string(R"({"type":"trial","cmd":"start"})")}) {
    ClientSession s;
    const auto r = handle_inbound(s, text, ctx);
    CHECK(r.close);
    CHECK_FALSE(r.forward.has_value());
    REQUIRE(r.replies.size() == 1);
    const json e = json::parse(r.replies[0]);
    CHECK(e["type"] == "error");
    CHECK(e["code"] == "protocol");
  }
}

TEST_CASE("after hello a bad message gets an error reply and is dropped") {
  const auto config = short_config();
  const ProtocolContext ctx{&config, InputMode::Poses};
  ClientSession s;
  handle_inbound(s, R"({"type":"hello","role":"ui"})", ctx);

  const auto code_of = [&](const std::string& text) {
    const auto r = handle_inbound(s, text, ctx);
    CHECK_FALSE(r.close);
    if (r.replies.empty()) {
      return std::string("ok");
    }
    CHECK_FALSE(r.forward.has_value());
    return json::parse(r.replies[0])["code"].get<std::string>();
  };
  CHECK(code_of("{") == "malformed");
  CHECK(code_of(R"({"kind":"input"})") == "malformed");
  CHECK(code_of(R"({"type":"teleport"})") == "malformed");
  CHECK(code_of(R"({"type":"trial","cmd":"pause"})") == "invalid");
  CHECK(code_of(R"({"type":"hello","role":"ui"})") == "protocol");
  // |q| = 1.2 is far outside the 1e-3 tolerance.
  CHECK(code_of(input_text(10, "left", {}, {1.2, 0.0, 0.0, 0.0})) == "invalid");
  CHECK(code_of(input_text(10, "left", {}, {1.0, 0.0, 0.0, 0.0}, false, 1.5)) == "invalid");
  CHECK(code_of(input_text(10, "middle", {})) == "invalid");
  const json pk = {{"type", "packet"}, {"hex", to_hex(io::encode_packet(io::ControllerPacket{}))}};
  CHECK(code_of(pk.dump()) == "mode");
  CHECK(code_of(input_text(10, "left", {})) == "ok");
  CHECK(code_of(input_text(10, "left", {})) == "order");
  CHECK(code_of(input_text(5, "left", {})) == "order");
  // Each controller keeps its own clock.
  CHECK(code_of(input_text(5, "right", {})) == "ok");
  CHECK(code_of(input_text(11, "left", {})) == "ok");
}

TEST_CASE("a near-unit quaternion is renormalized") {
  const auto config = short_config();
  const ProtocolContext ctx{&config, InputMode::Poses};
  ClientSession s;
  handle_inbound(s, R"({"type":"hello","role":"ui"})", ctx);
  const double c = std::cos(0.3);
  const double k = 1.0008;  // norm 1.0008, within tolerance
  const auto r = handle_inbound(
      s, input_text(1, "right", {0.1, 1.0, 0.2}, {k * c, k * std::sin(0.3), 0.0, 0.0}), ctx);
  REQUIRE(r.forward.has_value());
  const auto& in = std::get<Input>(*r.forward);
  CHECK(in.controller == 1);
  CHECK(in.orientation.w() == doctest::Approx(c).epsilon(1e-12));
  CHECK(in.orientation.x() == doctest::Approx(std::sin(0.3)).epsilon(1e-12));
}

TEST_CASE("raw mode takes hex packets and blob frames, and refuses poses") {
  const auto config = short_config();
  const ProtocolContext ctx{&config, InputMode::Raw};
  ClientSession s;
  handle_inbound(s, R"({"type":"hello","role":"ui"})", ctx);
  io::ControllerPacket p;
  p.controller_id = 1;
  p.t_us = 1234;
  p.accel = {0.0f, 9.81f, 0.0f};
  p.jaw = 0.25f;
  const auto bytes = io::encode_packet(p);
  const json pk = {{"type", "packet"}, {"hex", to_hex(bytes)}};
  const auto r = handle_inbound(s, pk.dump(), ctx);
  REQUIRE(r.forward.has_value());
  CHECK(io::same_bits(std::get<Packet>(*r.forward).packet, p));
  // The same timestamp again is out of order.
  CHECK(json::parse(handle_inbound(s, pk.dump(), ctx).replies.at(0))["code"] == "order");
  const auto b = handle_inbound(
      s, R"({"type":"blobs","t_us":5,"markers":[{"left":[1,2],"right":[3,4]}]})", ctx);
  REQUIRE(b.forward.has_value());
  CHECK(std::get<Blobs>(*b.forward).record.markers.at(0).second.u == 3.0);
  CHECK(json::parse(handle_inbound(s, input_text(1, "left", {}), ctx).replies.at(0))["code"] ==
        "mode");
}

TEST_CASE("trial start from idle enters familiarization and announces it") {
  EngineService svc(service_config(short_config()));
  auto box = std::make_shared<Outbox>();
  ClientSession session;
  feed(svc, session, box, R"({"type":"hello","role":"ui"})");
  CHECK(drain_one(*box)["type"] == "welcome");
  svc.step();
  CHECK(svc.engine().runner().phase().kind == task::PhaseKind::Idle);
  feed(svc, session, box, R"({"type":"trial","cmd":"start"})");
  svc.step();
  CHECK(svc.engine().runner().phase().kind == task::PhaseKind::Familiarization);
  bool announced = false;
  for (const json& m : drain(*box)) {
    if (m["type"] == "event" && m["kind"] == "phase") {
      CHECK(m["data"]["phase"]["kind"] == "familiarization");
      announced = true;
    }
  }
  CHECK(announced);
}

TEST_CASE("idle snapshots show every ring on its peg and normal mode; clients get equal bytes") {
  EngineService svc(service_config(short_config()));
  auto a = std::make_shared<Outbox>();
  auto b = std::make_shared<Outbox>();
  ClientSession sa;
  ClientSession sb;
  feed(svc, sa, a, R"({"type":"hello","role":"ui"})");
  feed(svc, sb, b, R"({"type":"hello","role":"observer"})");
  a->pop();
  b->pop();
  for (int i = 0; i < 4; ++i) {
    svc.step();
  }
  // Ticks at 10..40 ms: the 40 ms tick is the first to cross a 1/30 s boundary.
  const auto sa_msg = a->pop();
  const auto sb_msg = b->pop();
  REQUIRE(sa_msg.has_value());
  CHECK(sa_msg == sb_msg);
  const json st = json::parse(*sa_msg);
  CHECK(st["type"] == "state");
  CHECK(st["t_us"] == 40'000);
  REQUIRE(st["rings"].size() == 6);
  for (const json& r : st["rings"]) {
    CHECK(r["state"] == "on_peg");
  }
  CHECK(st["mode"]["global"] == "normal");
  CHECK(st["mode"]["left"] == "engaged");
  CHECK(st["phase"]["kind"] == "idle");
  CHECK(st["live"]["transfers"] == 0);
  CHECK(st["live"]["remaining_us"] == 0);
  CHECK(st["live"]["avg_transfer_time_s"].is_null());
}

TEST_CASE("snapshots follow the 30 Hz boundary crossings and keep only the latest") {
  EngineService svc(service_config(short_config()));
  auto box = std::make_shared<Outbox>();
  ClientSession s;
  feed(svc, s, box, R"({"type":"hello","role":"ui"})");
  box->pop();
  int crossings = 0;
  for (int k = 1; k <= 300; ++k) {
    svc.step();
    const std::int64_t t = 10'000LL * k;
    crossings += (t * 30 / 1'000'000 != (t - 10'000) * 30 / 1'000'000) ? 1 : 0;
  }
  CHECK(crossings == 90);
  // Nobody read: all but the newest snapshot were replaced.
  CHECK(box->dropped_snapshots() == 89);
  CHECK(box->pending() == 1);
  CHECK(json::parse(*box->pop())["t_us"] == 3'000'000);
}

TEST_CASE("a scripted grasp shows up as a grasped ring held by the same instrument") {
  auto config = short_config();
  // Long enough that no phase change re-homes the tips mid-reach.
  config.scene.protocol.familiarization_s = 10.0;
  EngineService svc(service_config(config));
  auto box = std::make_shared<Outbox>();
  ClientSession s;
  feed(svc, s, box, R"({"type":"hello","role":"ui"})");
  feed(svc, s, box, R"({"type":"trial","cmd":"start"})");
  svc.step();

  const task::PegScene& scene = svc.engine().runner().scene();
  const Vec3 home = scene.home_targets()[0].pose.translation;
  const Vec3 ring = scene.rings()[0].pose.translation;
  const Vec3 above{ring.x, 0.03, ring.z - 0.012};
  const Vec3 grasp{ring.x, ring.y, ring.z - 0.012};
  const Vec3 hand{-0.15, 1.0, 0.3};
  const double scale = 0.5;
  std::int64_t t = 0;
  const auto send = [&](Vec3 tip, double jaw) {
    t += 10'000;
    feed(svc, s, box, input_text(t, "left", hand + (tip - home) / scale, {1, 0, 0, 0}, false, jaw));
    svc.step();
  };
  send(home, 0.0);
  for (int k = 1; k <= 60; ++k) {
    send(home + (static_cast<double>(k) / 60.0) * (above - home), 0.0);
  }
  for (int k = 1; k <= 30; ++k) {
    send(above + (static_cast<double>(k) / 30.0) * (grasp - above), 0.0);
  }
  for (int k = 0; k < 10; ++k) {
    send(grasp, 1.0);
  }
  // Let a snapshot boundary pass.
  for (int k = 0; k < 4; ++k) {
    send(grasp, 1.0);
  }
  std::optional<json> last_state;
  bool grasp_event = false;
  bool pulse = false;
  for (const json& m : drain(*box)) {
    if (m["type"] == "state") {
      last_state = m;
    } else if (m["type"] == "event" && m["kind"] == "grasp") {
      grasp_event = true;
      CHECK(m["data"]["ring"] == 0);
      CHECK(m["data"]["instrument"] == 0);
    } else if (m["type"] == "haptic") {
      pulse = true;
      CHECK(m["controller"] == "left");
      CHECK(m["amplitude"] == kGraspPulseAmplitude);
    }
  }
  CHECK(grasp_event);
  CHECK(pulse);
  REQUIRE(last_state.has_value());
  const json& r0 = (*last_state)["rings"][0];
  CHECK(r0["state"] == "grasped");
  CHECK(r0["holder"] == 0);
  CHECK((*last_state)["instruments"][0]["jaw_closed"] == true);
}

TEST_CASE("each trial's metrics arrive after its trial_end event") {
  EngineService svc(service_config(short_config()));
  auto box = std::make_shared<Outbox>();
  ClientSession s;
  feed(svc, s, box, R"({"type":"hello","role":"ui"})");
  feed(svc, s, box, R"({"type":"trial","cmd":"start"})");
  // 0.5 s familiarization, two 1 s trials with a 0.2 s break.
  for (int k = 0; k < 300; ++k) {
    svc.step();
  }
  CHECK(svc.engine().runner().phase().kind == task::PhaseKind::Done);
  std::int64_t last_t = -1;
  bool ended = false;
  int metrics = 0;
  std::vector<std::string> phases;
  for (const json& m : drain(*box)) {
    if (m["type"] == "event") {
      CHECK(m["t_us"].get<std::int64_t>() >= last_t);
      last_t = m["t_us"].get<std::int64_t>();
      ended = ended || m["kind"] == "trial_end";
      if (m["kind"] == "phase") {
        phases.push_back(m["data"]["phase"]["kind"]);
      }
    } else if (m["type"] == "metrics") {
      CHECK(ended);
      ended = false;
      ++metrics;
      CHECK(m["trial"] == metrics);
      CHECK(m["duration_s"] == 1.0);
    }
  }
  CHECK(metrics == 2);
  CHECK(phases == std::vector<std::string>{"familiarization", "trial", "break", "trial", "done"});
}

TEST_CASE("a recorded service session replays to the identical report") {
  const auto path = std::filesystem::temp_directory_path() / "dex_service_record.replay";
  ServiceConfig cfg = service_config(short_config());
  cfg.record_path = path.string();
  std::string live;
  std::int64_t end_us = 0;
  {
    EngineService svc(cfg);
    auto box = std::make_shared<Outbox>();
    ClientSession s;
    feed(svc, s, box, R"({"type":"hello","role":"ui"})");
    svc.step();
    feed(svc, s, box, R"({"type":"trial","cmd":"start"})");
    const Vec3 hand{-0.15, 1.0, 0.3};
    for (int k = 1; k <= 200; ++k) {
      const double a = 0.02 * std::sin(0.05 * k);
      // Two inputs per tick for the left hand, one every other tick for the right.
      feed(svc, s, box, input_text(2 * k, "left", hand + Vec3{a, 0.0, 0.0}));
      feed(svc, s, box, input_text(2 * k + 1, "left", hand + Vec3{a, -a, 0.0}, {1, 0, 0, 0},
                                   k > 100 && k < 120));
      if (k % 2 == 0) {
        feed(svc, s, box, input_text(k, "right", {0.15, 1.0, 0.3 + a}));
      }
      svc.step();
    }
    svc.stop();
    live = io::write_report(svc.engine().report()) + io::write_event_log(svc.engine().report());
    end_us = svc.engine().now_us();
  }
  engine::Engine replay(short_config());
  for (const auto& r : io::load_replay(path.string())) {
    replay.push(r);
  }
  replay.run_until(end_us);
  CHECK(io::write_report(replay.report()) + io::write_event_log(replay.report()) == live);
  std::filesystem::remove(path);
}

TEST_CASE("a client that never reads does not slow the engine thread") {
  // The same running session twice: once with a reader draining the client's
  // queue, once with nobody reading it.
  const auto run_for = [](bool blocked) {
    EngineService svc(service_config(short_config()));
    auto box = std::make_shared<Outbox>();
    ClientSession s;
    feed(svc, s, box, R"({"type":"hello","role":"ui"})");
    feed(svc, s, box, R"({"type":"trial","cmd":"start"})");
    std::atomic<bool> done{false};
    std::thread reader;
    if (!blocked) {
      reader = std::thread([&] {
        while (!done.load()) {
          while (box->pop()) {
          }
          std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
      });
    }
    svc.start();
    std::this_thread::sleep_for(std::chrono::milliseconds(500));
    svc.stop();
    done.store(true);
    if (reader.joinable()) {
      reader.join();
    }
    const auto& times = svc.tick_times();
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double dt = std::chrono::duration<double, std::milli>(times[i] - times[i - 1]).count();
      sum += dt;
      sq += dt * dt;
    }
    const double n = static_cast<double>(times.size() - 1);
    const double mean = sum / n;
    if (blocked) {
      // Every snapshot but the newest was replaced while nobody read.
      CHECK(box->dropped_snapshots() >= 10);
    }
    return std::pair{mean, std::sqrt(std::max(0.0, sq / n - mean * mean))};
  };
  const auto [free_mean, free_sd] = run_for(false);
  const auto [blocked_mean, blocked_sd] = run_for(true);
  MESSAGE("tick period mean/sd ms: reading " << free_mean << "/" << free_sd << ", blocked "
                                             << blocked_mean << "/" << blocked_sd);
  CHECK(blocked_mean == doctest::Approx(10.0).epsilon(0.05));
  CHECK(blocked_sd < free_sd + 1.0);
}

// --- over the wire ---------------------------------------------------------

namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace http = beast::http;
using tcp = asio::ip::tcp;

struct WsClient {
  asio::io_context io;
  websocket::stream<tcp::socket> ws{io};

  explicit WsClient(std::uint16_t port, const std::string& path = "/session") {
    tcp::resolver resolver(io);
    asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("127.0.0.1", path);
  }

  void send(const std::string& text) {
    ws.text(true);
    ws.write(asio::buffer(text));
  }

  json receive() {
    beast::flat_buffer buf;
    ws.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }
};

struct LiveServer {
  EngineService service;
  Server server;

  LiveServer(ServerConfig sc, engine::EngineConfig ec = short_config())
      : service(service_config(std::move(ec))), server(service, std::move(sc)) {
    service.start();
    server.start();
  }
  ~LiveServer() {
    server.stop();
    service.stop();
  }
};

}  // namespace

TEST_CASE("over WebSocket: handshake, 30 Hz snapshots and an input round trip") {
  LiveServer live(ServerConfig{});
  WsClient c(live.server.port());
  c.send(R"({"type":"hello","role":"ui"})");
  CHECK(c.receive()["type"] == "welcome");
  c.send(R"({"type":"trial","cmd":"start"})");

  const auto start = std::chrono::steady_clock::now();
  int states = 0;
  bool familiarization = false;
  while (std::chrono::steady_clock::now() - start < std::chrono::seconds(1)) {
    const json m = c.receive();
    states += m["type"] == "state" ? 1 : 0;
    familiarization = familiarization || (m["type"] == "state" &&
                                          m["phase"]["kind"] == "familiarization");
  }
  MESSAGE("snapshots in 1 s: " << states);
  CHECK(states >= 25);
  CHECK(states <= 32);
  CHECK(familiarization);

  // A clutch press shows up in the snapshot mode.
  c.send(input_text(1, "left", {-0.15, 1.0, 0.3}, {1, 0, 0, 0}, true));
  bool clutched = false;
  for (int i = 0; i < 60 && !clutched; ++i) {
    const json m = c.receive();
    clutched = m["type"] == "state" && m["mode"]["left"] == "clutched";
  }
  CHECK(clutched);
}

TEST_CASE("over WebSocket: a message before hello is refused and the connection closed") {
  LiveServer live(ServerConfig{});
  WsClient c(live.server.port());
  c.send(R"({"type":"trial","cmd":"start"})");
  const json e = c.receive();
  CHECK(e["type"] == "error");
  CHECK(e["code"] == "protocol");
  beast::flat_buffer buf;
  beast::error_code ec;
  c.ws.read(buf, ec);
  CHECK(ec == websocket::error::closed);
  CHECK(c.ws.reason().code == websocket::close_code::policy_error);
}

TEST_CASE("over WebSocket: three missed pings disconnect, answered pings do not") {
  ServerConfig sc;
  sc.ping_interval = std::chrono::milliseconds(50);
  LiveServer live(sc);

  // This client reads continuously, so Beast answers every ping.
  WsClient alive(live.server.port());
  alive.send(R"({"type":"hello","role":"ui"})");
  const auto start = std::chrono::steady_clock::now();
  while (std::chrono::steady_clock::now() - start < std::chrono::milliseconds(400)) {
    alive.receive();
  }
  CHECK(alive.ws.is_open());

  // This one never reads, so no pong goes back.
  WsClient silent(live.server.port());
  silent.send(R"({"type":"hello","role":"ui"})");
  std::this_thread::sleep_for(std::chrono::milliseconds(400));
  beast::error_code ec;
  for (int i = 0; i < 10'000 && !ec; ++i) {
    beast::flat_buffer buf;
    silent.ws.read(buf, ec);
  }
  CHECK(ec == websocket::error::closed);
  CHECK(silent.ws.reason().code == websocket::close_code::going_away);
}

TEST_CASE("plain HTTP serves the UI directory and nothing outside it") {
  const auto dir = std::filesystem::temp_directory_path() / "dex_ui_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "index.html") << "<!doctype html><title>ui</title>";
  std::ofstream(dir / "app.js") << "export {};";
  ServerConfig sc;
  sc.ui_dir = dir.string();
  LiveServer live(sc);

  const auto get = [&](const std::string& target) {
    asio::io_context io;
    tcp::socket sock(io);
    tcp::resolver resolver(io);
    asio::connect(sock, resolver.resolve("127.0.0.1", std::to_string(live.server.port())));
    http::request<http::empty_body> req{http::verb::get, target, 11};
    req.set(http::field::host, "127.0.0.1");
    http::write(sock, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(sock, buf, res);
    return res;
  };
  const auto index = get("/");
  CHECK(index.result() == http::status::ok);
  CHECK(index.body() == "<!doctype html><title>ui</title>");
  const auto js = get("/app.js");
  CHECK(js.result() == http::status::ok);
  CHECK(std::string(js[http::field::content_type]).find("javascript") != std::string::npos);
  CHECK(get("/../etc/passwd").result() == http::status::not_found);
  CHECK(get("/missing.css").result() == http::status::not_found);
  std::filesystem::remove_all(dir);
}
