#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dex/io/packet.hpp"
#include "dex/math/camera.hpp"
#include "dex/math/quat.hpp"
#include "dex/math/vec3.hpp"
#include "dex/task/session.hpp"

namespace dex::io {

// One line per record, first token is the tag:
//   imu    t_us id seq gx gy gz ax ay az buttons jaw
//   stereo t_us n  lu lv ru rv  (n times)
//   frame  t_us left.pgm right.pgm
//   pose   t_us controller px py pz qw qx qy qz button jaw
//   cmd    t_us start|stop|reset
// Blank lines and `#` comments are skipped. Timestamps never decrease.
struct ImuRecord {
  ControllerPacket packet;
};

struct StereoRecord {
  std::int64_t t_us = 0;
  std::vector<std::pair<Pixel, Pixel>> markers;  // left, right
};

// Paths are relative to the replay file's directory unless absolute.
struct FrameRecord {
  std::int64_t t_us = 0;
  std::string left;
  std::string right;
};

// A controller grip pose in world coordinates, bypassing tracking.
struct PoseRecord {
  std::int64_t t_us = 0;
  int controller = 0;
  Vec3 position;
  UnitQuat orientation;
  bool button = false;
  double jaw = 0.0;
};

struct CommandRecord {
  std::int64_t t_us = 0;
  task::SessionCommand command = task::SessionCommand::Start;
};

using ReplayRecord = std::variant<ImuRecord, StereoRecord, FrameRecord, PoseRecord, CommandRecord>;

std::int64_t record_time(const ReplayRecord& record);

// Shortest round-trip text for every number.
std::string format_record(const ReplayRecord& record);
// Throws ParseError naming what is wrong with the line.
ReplayRecord parse_record(const std::string& line);

// Streams records from a replay, enforcing time order.
class ReplayReader {
 public:
  ReplayReader(std::istream& in, std::string source);

  // Empty at end of input. Throws ParseError with "source:line" context.
  std::optional<ReplayRecord> next();
  int line() const { return line_; }

 private:
  std::istream& in_;
  std::string source_;
  int line_ = 0;
  std::int64_t last_t_us_ = 0;
};

std::vector<ReplayRecord> read_replay(std::istream& in, const std::string& source = "replay");
std::vector<ReplayRecord> load_replay(const std::string& path);

// Throws Error if the records are not time-ordered.
void write_replay(std::ostream& out, const std::vector<ReplayRecord>& records);

}  // namespace dex::io
