#include "dex/service/messages.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

namespace dex::service {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& what) {
  throw MessageError(ErrorCode::Invalid, what);
}

const json& member(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    invalid(std::string("missing field '") + key + "'");
  }
  return *it;
}

double real(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_number() || !std::isfinite(v.get<double>())) {
    invalid(std::string("field '") + key + "' must be a finite number");
  }
  return v.get<double>();
}

std::int64_t integer(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_number_integer() || (v.is_number_unsigned() &&
                                 v.get<std::uint64_t>() >
                                     static_cast<std::uint64_t>(
                                         std::numeric_limits<std::int64_t>::max()))) {
    invalid(std::string("field '") + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::string text(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_string()) {
    invalid(std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

template <std::size_t N>
std::array<double, N> reals(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_array() || v.size() != N) {
    invalid(std::string("field '") + key + "' must be an array of " + std::to_string(N) +
            " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
      invalid(std::string("field '") + key + "' must hold finite numbers");
    }
    out[i] = v[i].get<double>();
  }
  return out;
}

int controller_id(const json& j) {
  const json& v = member(j, "controller");
  if (v == "left" || v == 0) {
    return 0;
  }
  if (v == "right" || v == 1) {
    return 1;
  }
  invalid("field 'controller' must be \"left\" or \"right\"");
}

Input parse_input(const json& j) {
  Input in;
  in.t_us = integer(j, "t_us");
  if (in.t_us < 0) {
    invalid("field 't_us' must not be negative");
  }
  in.controller = controller_id(j);
  const json& pose = member(j, "pose");
  if (!pose.is_object()) {
    invalid("field 'pose' must be an object");
  }
  const auto p = reals<3>(pose, "p");
  const auto q = reals<4>(pose, "q");
  in.position = {p[0], p[1], p[2]};
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (!(std::abs(n - 1.0) <= kQuatTolerance)) {
    invalid("quaternion norm " + std::to_string(n) + " is not within 1e-3 of 1");
  }
  in.orientation = UnitQuat::from_components(q[0], q[1], q[2], q[3]);
  const json& button = member(j, "button");
  if (!button.is_boolean()) {
    invalid("field 'button' must be a boolean");
  }
  in.button = button.get<bool>();
  in.jaw = real(j, "jaw");
  if (in.jaw < 0.0 || in.jaw > 1.0) {
    invalid("field 'jaw' must lie in [0, 1]");
  }
  return in;
}

std::uint8_t hex_digit(char c) {
  if (c >= '0' && c <= '9') {
    return static_cast<std::uint8_t>(c - '0');
  }
  if (c >= 'a' && c <= 'f') {
    return static_cast<std::uint8_t>(c - 'a' + 10);
  }
  if (c >= 'A' && c <= 'F') {
    return static_cast<std::uint8_t>(c - 'A' + 10);
  }
  invalid("field 'hex' holds a non-hex character");
}

Packet parse_packet(const json& j) {
  const std::string hex = text(j, "hex");
  if (hex.size() != 2 * io::kPacketSize) {
    invalid("field 'hex' must encode exactly " + std::to_string(io::kPacketSize) + " bytes");
  }
  io::PacketBytes bytes{};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<std::uint8_t>(hex_digit(hex[2 * i]) << 4 | hex_digit(hex[2 * i + 1]));
  }
  try {
    Packet out{io::decode_packet(bytes)};
    io::validate_packet(out.packet);
    return out;
  } catch (const MessageError&) {
    throw;
  } catch (const Error& e) {
    invalid(e.what());
  }
}

Blobs parse_blobs(const json& j) {
  Blobs b;
  b.record.t_us = integer(j, "t_us");
  if (b.record.t_us < 0) {
    invalid("field 't_us' must not be negative");
  }
  const json& markers = member(j, "markers");
  if (!markers.is_array()) {
    invalid("field 'markers' must be an array");
  }
  for (const json& m : markers) {
    if (!m.is_object()) {
      invalid("each marker must be an object");
    }
    const auto l = reals<2>(m, "left");
    const auto r = reals<2>(m, "right");
    b.record.markers.push_back({Pixel{l[0], l[1]}, Pixel{r[0], r[1]}});
  }
  return b;
}

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json quat(const UnitQuat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

json pose(const RigidTransform& t) {
  json j = json::object();
  j["p"] = vec(t.translation);
  j["q"] = quat(t.rotation);
  return j;
}

json phase_json(task::Phase phase) {
  json j = json::object();
  j["kind"] = task::to_string(phase.kind);
  j["trial"] = phase.trial;
  return j;
}

const char* side_name(int i) { return i == 0 ? "left" : "right"; }

}  // namespace

std::string_view to_string(InputMode mode) { return mode == InputMode::Poses ? "poses" : "raw"; }

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Protocol: return "protocol";
    case ErrorCode::Malformed: return "malformed";
    case ErrorCode::Invalid: return "invalid";
    case ErrorCode::Order: return "order";
    case ErrorCode::Mode: return "mode";
  }
  return "unknown";
}

Inbound parse_inbound(std::string_view raw) {
  const json j = json::parse(raw.begin(), raw.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw MessageError(ErrorCode::Malformed, "message is not a JSON object");
  }
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) {
    throw MessageError(ErrorCode::Malformed, "message has no type tag");
  }
  const std::string& t = type->get_ref<const std::string&>();
  if (t == "hello") {
    return Hello{text(j, "role")};
  }
  if (t == "input") {
    return parse_input(j);
  }
  if (t == "trial") {
    const auto cmd = task::session_command_from_string(text(j, "cmd"));
    if (!cmd) {
      invalid("field 'cmd' must be start, stop or reset");
    }
    return Trial{*cmd};
  }
  if (t == "packet") {
    return parse_packet(j);
  }
  if (t == "blobs") {
    return parse_blobs(j);
  }
  throw MessageError(ErrorCode::Malformed, "unknown message type '" + t + "'");
}

std::string welcome_message(const engine::EngineConfig& config, InputMode mode,
                            const std::string& role) {
  const task::SceneConfig& sc = config.scene.scene;
  const task::PegScene scene(sc);
  json j = json::object();
  j["type"] = "welcome";
  j["role"] = role;
  j["input"] = to_string(mode);
  j["tick_hz"] = 1'000'000 / sc.step_us;
  j["snapshot_hz"] = 30;

  const task::Protocol& p = config.scene.protocol;
  json protocol = json::object();
  protocol["familiarization_s"] = p.familiarization_s;
  protocol["trial_s"] = p.trial_s;
  protocol["trials"] = p.trials;
  protocol["break_s"] = p.break_s;
  j["protocol"] = protocol;

  json s = json::object();
  s["peg_height_m"] = sc.peg_height_m;
  s["peg_capture_radius_m"] = sc.peg_capture_radius_m;
  s["ring_radius_m"] = sc.ring_radius_m;
  s["translation_scale"] = config.scene.translation_scale;
  json pegs = json::array();
  for (const task::Peg& peg : scene.pegs()) {
    json pj = json::object();
    pj["id"] = peg.id;
    pj["name"] = peg.name();
    pj["side"] = task::to_string(peg.side);
    pj["base"] = vec(peg.base);
    pegs.push_back(pj);
  }
  s["pegs"] = pegs;
  json instruments = json::array();
  for (int i = 0; i < 2; ++i) {
    const kinematics::InstrumentModel& m = scene.instruments()[i].model;
    json ij = json::object();
    ij["id"] = side_name(i);
    ij["rcm"] = pose(m.rcm_pose);
    json limits = json::array();
    for (const kinematics::JointLimit& l : m.limits) {
      limits.push_back(json::array({l.lo, l.hi}));
    }
    ij["limits"] = limits;
    ij["tip_length_m"] = m.tip_length;
    ij["jaw_max_rad"] = m.jaw_max;
    ij["chain"] = "Ry(q1) Rx(q2) Tz(q3) Rz(q4) Rx(q5) Ry(q6) Tz(tip_length)";
    instruments.push_back(ij);
  }
  s["instruments"] = instruments;
  s["camera"] = pose(sc.camera);
  j["scene"] = s;
  return j.dump();
}

std::string state_message(const engine::Engine& engine) {
  const task::SessionRunner& runner = engine.runner();
  const task::PegScene& scene = runner.scene();
  json j = json::object();
  j["type"] = "state";
  j["t_us"] = engine.now_us();
  json phase = phase_json(runner.phase());
  phase["elapsed_us"] = runner.phase_elapsed_us();
  j["phase"] = phase;

  json instruments = json::array();
  for (int i = 0; i < 2; ++i) {
    const task::InstrumentState& inst = scene.instruments()[i];
    json ij = json::object();
    ij["id"] = side_name(i);
    ij["joints"] = json(inst.q.q);
    ij["tip"] = pose(inst.tip);
    ij["jaw"] = engine.teleop().jaw[i];
    ij["jaw_closed"] = inst.jaw_closed;
    ij["ik_ok"] = inst.ik_ok;
    instruments.push_back(ij);
  }
  j["instruments"] = instruments;

  json rings = json::array();
  for (const task::Ring& r : scene.rings()) {
    json rj = json::object();
    rj["id"] = r.id;
    rj["state"] = task::to_string(r.phase);
    rj["peg"] = r.peg;
    rj["holder"] = r.holder;
    rj["pose"] = pose(r.pose);
    rings.push_back(rj);
  }
  j["rings"] = rings;
  j["camera"] = pose(engine.output().camera);

  const teleop::TeleopState& tele = engine.teleop();
  json mode = json::object();
  mode["global"] = teleop::to_string(tele.global);
  mode["left"] = teleop::to_string(tele.mode[0]);
  mode["right"] = teleop::to_string(tele.mode[1]);
  j["mode"] = mode;

  // Running figures of the current trial, zero outside a trial.
  const std::optional<task::TrialReport> m = runner.live_metrics();
  json live = json::object();
  live["remaining_us"] = runner.phase_remaining_us();
  live["transfers"] = m ? m->transfers : 0;
  live["drops"] = m ? m->drops : 0;
  live["avg_transfer_time_s"] =
      m && m->avg_transfer_time_s ? json(*m->avg_transfer_time_s) : json(nullptr);
  live["total_path_length_m"] = m ? m->total_path_length_m : 0.0;
  j["live"] = live;
  return j.dump();
}

std::string event_message(std::int64_t t_us, const task::Event& event) {
  json j = json::object();
  j["type"] = "event";
  j["t_us"] = t_us;
  j["kind"] = task::to_string(event.kind);
  json data = json::object();
  data["phase_t_us"] = event.t_us;
  data["ring"] = event.ring;
  data["instrument"] = event.instrument;
  data["peg"] = event.peg;
  data["value"] = event.value;
  j["data"] = data;
  return j.dump();
}

std::string phase_message(std::int64_t t_us, task::Phase phase) {
  json j = json::object();
  j["type"] = "event";
  j["t_us"] = t_us;
  j["kind"] = "phase";
  json data = json::object();
  data["phase"] = phase_json(phase);
  j["data"] = data;
  return j.dump();
}

std::string metrics_message(const task::TrialReport& r) {
  json j = json::object();
  j["type"] = "metrics";
  j["trial"] = r.trial;
  j["duration_s"] = r.duration_s;
  j["transfers"] = r.transfers;
  j["drops"] = r.drops;
  j["avg_transfer_time_s"] = r.avg_transfer_time_s ? json(*r.avg_transfer_time_s) : json();
  json path = json::object();
  path["left"] = r.path_length_m[0];
  path["right"] = r.path_length_m[1];
  j["path_length_m"] = path;
  j["total_path_length_m"] = r.total_path_length_m;
  j["truncated"] = r.truncated;
  return j.dump();
}

std::string haptic_message(int controller, double amplitude, int duration_ms) {
  json j = json::object();
  j["type"] = "haptic";
  j["controller"] = side_name(controller);
  j["amplitude"] = amplitude;
  j["duration_ms"] = duration_ms;
  return j.dump();
}

std::string error_message(ErrorCode code, const std::string& text) {
  json j = json::object();
  j["type"] = "error";
  j["code"] = to_string(code);
  j["message"] = text;
  return j.dump();
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * bytes.size());
  for (std::uint8_t b : bytes) {
    out += kDigits[b >> 4];
    out += kDigits[b & 0x0f];
  }
  return out;
}

}  // namespace dex::service
