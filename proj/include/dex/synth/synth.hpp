#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dex/io/config_files.hpp"
#include "dex/io/replay.hpp"
#include "dex/math/error.hpp"
#include "dex/task/metrics.hpp"
#include "dex/tracking/blobs.hpp"

namespace dex::synth {

// A trajectory point fell outside a camera image or behind a camera.
class SynthError : public Error {
 public:
  using Error::Error;
};

struct NoiseSpec {
  double pixel_sigma = 0.0;   // px, added to each projected marker centre
  double gyro_sigma = 0.0;    // rad/s
  double accel_sigma = 0.0;   // m/s^2
  Vec3 gyro_bias;             // rad/s, constant
};

// Scenarios: static, circle, two-circles, peg-session.
struct SynthSpec {
  std::string scenario = "circle";
  std::uint64_t seed = 1;
  NoiseSpec noise;
  double duration_s = 10.0;
  double frame_hz = 60.0;
  double imu_hz = 100.0;
  double circle_hz = 0.5;
  // Emit rendered PGM frame pairs instead of stereo blob records.
  bool render_frames = false;
};

// Truth for one controller at one frame time. The LED is in the tracker frame;
// the grip point and orientation are in the world frame.
struct TruthSample {
  std::int64_t t_us = 0;
  int controller = 0;
  Vec3 led_tracker;
  Vec3 grip_world;
  UnitQuat orientation;
};

struct RenderedFrame {
  std::string name;  // relative path written into the frame record
  tracking::IrFrame image;
};

struct SynthOutput {
  std::vector<io::ReplayRecord> records;
  std::vector<TruthSample> truth;
  std::vector<RenderedFrame> frames;
  // peg-session only: the report the engine produced while the user was driving it.
  std::optional<task::SessionReport> expected_report;
};

// Deterministic in (spec, calibration, scene): identical inputs yield identical output.
SynthOutput synth_session(const SynthSpec& spec, const io::Calibration& calibration,
                          const io::SceneFile& scene = {});

// Gaussian spots (sigma 2 px, peak 255) on a black image.
tracking::IrFrame render_spots(const PinholeCamera& camera, const std::vector<Pixel>& centres,
                               std::int64_t t_us);

void write_truth(std::ostream& out, const std::vector<TruthSample>& truth);
std::vector<TruthSample> parse_truth(std::istream& in);

// Writes session.replay, truth.txt, frames and expected_report.json (peg-session) into dir.
void save_output(const std::string& dir, const SynthOutput& output);

}  // namespace dex::synth
