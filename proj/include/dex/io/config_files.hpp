#pragma once

#include <array>
#include <istream>
#include <ostream>
#include <string>

#include "dex/math/transform.hpp"
#include "dex/task/metrics.hpp"
#include "dex/task/scene.hpp"
#include "dex/tracking/stereo.hpp"

namespace dex::io {

// Stereo intrinsics and extrinsics plus the tracker-to-world placement. The left
// camera is the tracker frame; the default rig looks straight up (camera z along
// world y) with a 4 cm baseline.
struct Calibration {
  tracking::StereoRig rig = tracking::StereoRig::rectified(0.04);
  RigidTransform tracker_to_world = default_tracker_to_world();
  std::array<Vec3, 2> grip_offset{};  // LED to grip point, controller body frame

  static RigidTransform default_tracker_to_world();
  friend bool operator==(const Calibration&, const Calibration&);
};

void write_calibration(std::ostream& out, const Calibration& calib);
Calibration parse_calibration(std::istream& in, const std::string& source = "calibration");
Calibration load_calibration(const std::string& path);
void save_calibration(const std::string& path, const Calibration& calib);

// Task geometry and rules, protocol timing, teleoperation gains and the IMU blend.
struct SceneFile {
  task::SceneConfig scene;
  task::Protocol protocol;
  double translation_scale = 0.5;
  double camera_translation_scale = 1.0;
  double imu_alpha = 0.02;
};

void write_scene_file(std::ostream& out, const SceneFile& file);
SceneFile parse_scene_file(std::istream& in, const std::string& source = "scene");
SceneFile load_scene_file(const std::string& path);

}  // namespace dex::io
