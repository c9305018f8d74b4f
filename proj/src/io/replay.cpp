#include "dex/io/replay.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dex/io/keyvalue.hpp"
#include "dex/math/error.hpp"

namespace dex::io {

namespace {

std::string format_float(float value) {
  if (value == 0.0f) {
    return "0";
  }
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

class Tokens {
 public:
  explicit Tokens(const std::string& line) {
    std::istringstream in(line);
    for (std::string t; in >> t;) {
      tokens_.push_back(t);
    }
  }

  std::size_t size() const { return tokens_.size(); }
  std::size_t remaining() const { return tokens_.size() - pos_; }

  const std::string& word(const char* what) {
    if (pos_ >= tokens_.size()) {
      throw ParseError(std::string("missing ") + what);
    }
    return tokens_[pos_++];
  }

  template <typename T>
  T number(const char* what) {
    const std::string& t = word(what);
    T out{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      throw ParseError(std::string("malformed ") + what + " '" + t + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(out)) {
        throw ParseError(std::string("non-finite ") + what);
      }
    }
    return out;
  }

  void finish() const {
    if (pos_ != tokens_.size()) {
      throw ParseError("trailing token '" + tokens_[pos_] + "'");
    }
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

std::int64_t timestamp(Tokens& t) {
  const auto t_us = t.number<std::int64_t>("timestamp");
  if (t_us < 0) {
    throw ParseError("negative timestamp");
  }
  return t_us;
}

ImuRecord parse_imu(Tokens& t) {
  ImuRecord r;
  ControllerPacket& p = r.packet;
  p.t_us = static_cast<std::uint64_t>(timestamp(t));
  const int id = t.number<int>("controller id");
  const int seq = t.number<int>("sequence number");
  if (id < 0 || id > 1 || seq < 0 || seq > 0xFFFF) {
    throw ParseError("controller id or sequence number out of range");
  }
  p.controller_id = static_cast<std::uint8_t>(id);
  p.seq = static_cast<std::uint16_t>(seq);
  for (float& g : p.gyro) {
    g = t.number<float>("gyro");
  }
  for (float& a : p.accel) {
    a = t.number<float>("accel");
  }
  const int buttons = t.number<int>("buttons");
  if (buttons < 0 || buttons > 0xFF) {
    throw ParseError("buttons out of range");
  }
  p.buttons = static_cast<std::uint8_t>(buttons);
  p.jaw = t.number<float>("jaw");
  validate_packet(p);
  return r;
}

StereoRecord parse_stereo(Tokens& t) {
  StereoRecord r;
  r.t_us = timestamp(t);
  const int n = t.number<int>("marker count");
  if (n < 0 || static_cast<std::size_t>(n) * 4 != t.remaining()) {
    throw ParseError("marker count does not match the pixel list");
  }
  for (int i = 0; i < n; ++i) {
    Pixel l{t.number<double>("pixel"), t.number<double>("pixel")};
    Pixel rr{t.number<double>("pixel"), t.number<double>("pixel")};
    r.markers.emplace_back(l, rr);
  }
  return r;
}

PoseRecord parse_pose(Tokens& t) {
  PoseRecord r;
  r.t_us = timestamp(t);
  const std::string& who = t.word("controller");
  if (who == "left" || who == "0") {
    r.controller = 0;
  } else if (who == "right" || who == "1") {
    r.controller = 1;
  } else {
    throw ParseError("unknown controller '" + who + "'");
  }
  r.position.x = t.number<double>("position");
  r.position.y = t.number<double>("position");
  r.position.z = t.number<double>("position");
  double q[4];
  for (double& c : q) {
    c = t.number<double>("quaternion");
  }
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (std::abs(n - 1.0) > 1e-6) {
    throw ParseError("orientation is not a unit quaternion");
  }
  r.orientation = std::abs(n - 1.0) <= 1e-9 ? UnitQuat::from_stored(q[0], q[1], q[2], q[3])
                                            : UnitQuat::from_components(q[0], q[1], q[2], q[3]);
  const int button = t.number<int>("button");
  if (button != 0 && button != 1) {
    throw ParseError("button must be 0 or 1");
  }
  r.button = button == 1;
  r.jaw = t.number<double>("jaw");
  if (!(r.jaw >= 0.0 && r.jaw <= 1.0)) {
    throw ParseError("jaw outside [0, 1]");
  }
  return r;
}

}  // namespace

std::int64_t record_time(const ReplayRecord& record) {
  return std::visit(
      [](const auto& r) -> std::int64_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, ImuRecord>) {
          return static_cast<std::int64_t>(r.packet.t_us);
        } else {
          return r.t_us;
        }
      },
      record);
}

std::string format_record(const ReplayRecord& record) {
  std::ostringstream out;
  if (const auto* r = std::get_if<ImuRecord>(&record)) {
    const ControllerPacket& p = r->packet;
    out << "imu " << p.t_us << ' ' << int(p.controller_id) << ' ' << p.seq;
    for (float g : p.gyro) {
      out << ' ' << format_float(g);
    }
    for (float a : p.accel) {
      out << ' ' << format_float(a);
    }
    out << ' ' << int(p.buttons) << ' ' << format_float(p.jaw);
  } else if (const auto* s = std::get_if<StereoRecord>(&record)) {
    out << "stereo " << s->t_us << ' ' << s->markers.size();
    for (const auto& [l, r2] : s->markers) {
      out << ' ' << format_number(l.u) << ' ' << format_number(l.v) << ' ' << format_number(r2.u)
          << ' ' << format_number(r2.v);
    }
  } else if (const auto* f = std::get_if<FrameRecord>(&record)) {
    out << "frame " << f->t_us << ' ' << f->left << ' ' << f->right;
  } else if (const auto* p = std::get_if<PoseRecord>(&record)) {
    out << "pose " << p->t_us << ' ' << (p->controller == 0 ? "left" : "right") << ' '
        << format_vec3(p->position) << ' ' << format_quat(p->orientation) << ' '
        << (p->button ? 1 : 0) << ' ' << format_number(p->jaw);
  } else {
    const auto& c = std::get<CommandRecord>(record);
    out << "cmd " << c.t_us << ' ' << task::to_string(c.command);
  }
  return out.str();
}

ReplayRecord parse_record(const std::string& line) {
  Tokens t(line);
  const std::string tag = t.word("record tag");
  ReplayRecord out;
  if (tag == "imu") {
    out = parse_imu(t);
  } else if (tag == "stereo") {
    out = parse_stereo(t);
  } else if (tag == "frame") {
    FrameRecord f;
    f.t_us = timestamp(t);
    f.left = t.word("left frame path");
    f.right = t.word("right frame path");
    out = f;
  } else if (tag == "pose") {
    out = parse_pose(t);
  } else if (tag == "cmd") {
    CommandRecord c;
    c.t_us = timestamp(t);
    const std::string& name = t.word("command");
    const auto cmd = task::session_command_from_string(name);
    if (!cmd) {
      throw ParseError("unknown command '" + name + "'");
    }
    c.command = *cmd;
    out = c;
  } else {
    throw ParseError("unknown record tag '" + tag + "'");
  }
  t.finish();
  return out;
}

ReplayReader::ReplayReader(std::istream& in, std::string source)
    : in_(in), source_(std::move(source)) {}

std::optional<ReplayRecord> ReplayReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      ReplayRecord r = parse_record(line);
      const std::int64_t t = record_time(r);
      if (t < last_t_us_) {
        throw ParseError("timestamp " + std::to_string(t) + " goes back in time");
      }
      last_t_us_ = t;
      return r;
    } catch (const Error& e) {
      throw ParseError(source_ + ":" + std::to_string(line_) + ": " + e.what());
    }
  }
  return std::nullopt;
}

std::vector<ReplayRecord> read_replay(std::istream& in, const std::string& source) {
  ReplayReader reader(in, source);
  std::vector<ReplayRecord> out;
  while (auto r = reader.next()) {
    out.push_back(std::move(*r));
  }
  return out;
}

std::vector<ReplayRecord> load_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  return read_replay(in, path);
}

void write_replay(std::ostream& out, const std::vector<ReplayRecord>& records) {
  std::int64_t last = 0;
  for (const auto& r : records) {
    const std::int64_t t = record_time(r);
    if (t < last) {
      throw Error("replay records must be time-ordered");
    }
    last = t;
    out << format_record(r) << '\n';
  }
}

}  // namespace dex::io
