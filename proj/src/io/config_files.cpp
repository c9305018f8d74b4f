#include "dex/io/config_files.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "dex/io/keyvalue.hpp"
#include "dex/math/error.hpp"

namespace dex::io {

namespace {

void write_camera(std::ostream& out, const std::string& name, const PinholeCamera& cam) {
  out << name << ".fx = " << format_number(cam.fx) << '\n'
      << name << ".fy = " << format_number(cam.fy) << '\n'
      << name << ".cx = " << format_number(cam.cx) << '\n'
      << name << ".cy = " << format_number(cam.cy) << '\n'
      << name << ".width = " << cam.width << '\n'
      << name << ".height = " << cam.height << '\n'
      << name << ".distortion = 0\n";
}

PinholeCamera read_camera(const KeyValues& kv, const std::string& name, PinholeCamera cam) {
  cam.fx = kv.number(name + ".fx", cam.fx);
  cam.fy = kv.number(name + ".fy", cam.fy);
  cam.cx = kv.number(name + ".cx", cam.cx);
  cam.cy = kv.number(name + ".cy", cam.cy);
  cam.width = static_cast<int>(kv.integer(name + ".width", cam.width));
  cam.height = static_cast<int>(kv.integer(name + ".height", cam.height));
  if (kv.number(name + ".distortion", 0.0) != 0.0) {
    throw ParseError(name + ".distortion: only distortion-free cameras are supported");
  }
  cam.validate();
  return cam;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  return in;
}

}  // namespace

RigidTransform Calibration::default_tracker_to_world() {
  return {quat_from_axis_angle({1.0, 0.0, 0.0}, -std::numbers::pi / 2), {}};
}

bool operator==(const Calibration& a, const Calibration& b) {
  const auto same = [](const PinholeCamera& x, const PinholeCamera& y) {
    return x.fx == y.fx && x.fy == y.fy && x.cx == y.cx && x.cy == y.cy && x.width == y.width &&
           x.height == y.height && x.pose_in_rig == y.pose_in_rig;
  };
  return same(a.rig.left, b.rig.left) && same(a.rig.right, b.rig.right) &&
         a.tracker_to_world == b.tracker_to_world && a.grip_offset == b.grip_offset;
}

void write_calibration(std::ostream& out, const Calibration& calib) {
  out << "# Stereo tracker calibration. Lengths in metres, quaternions as w x y z.\n";
  write_camera(out, "left", calib.rig.left);
  write_camera(out, "right", calib.rig.right);
  out << "# Right camera pose in the left camera frame.\n"
      << "right.position = " << format_vec3(calib.rig.right.pose_in_rig.translation) << '\n'
      << "right.rotation = " << format_quat(calib.rig.right.pose_in_rig.rotation) << '\n'
      << "tracker_to_world.position = " << format_vec3(calib.tracker_to_world.translation) << '\n'
      << "tracker_to_world.rotation = " << format_quat(calib.tracker_to_world.rotation) << '\n'
      << "grip_offset.left = " << format_vec3(calib.grip_offset[0]) << '\n'
      << "grip_offset.right = " << format_vec3(calib.grip_offset[1]) << '\n';
}

Calibration parse_calibration(std::istream& in, const std::string& source) {
  const KeyValues kv = KeyValues::parse(in, source);
  Calibration c;
  c.rig.left = read_camera(kv, "left", c.rig.left);
  c.rig.right = read_camera(kv, "right", c.rig.right);
  c.rig.right.pose_in_rig.translation =
      kv.vec3("right.position", c.rig.right.pose_in_rig.translation);
  c.rig.right.pose_in_rig.rotation = kv.quat("right.rotation", c.rig.right.pose_in_rig.rotation);
  c.tracker_to_world.translation =
      kv.vec3("tracker_to_world.position", c.tracker_to_world.translation);
  c.tracker_to_world.rotation = kv.quat("tracker_to_world.rotation", c.tracker_to_world.rotation);
  c.grip_offset[0] = kv.vec3("grip_offset.left", c.grip_offset[0]);
  c.grip_offset[1] = kv.vec3("grip_offset.right", c.grip_offset[1]);
  kv.reject_unknown();
  return c;
}

Calibration load_calibration(const std::string& path) {
  auto in = open(path);
  return parse_calibration(in, path);
}

void save_calibration(const std::string& path, const Calibration& calib) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path);
  }
  write_calibration(out, calib);
}

void write_scene_file(std::ostream& out, const SceneFile& f) {
  const task::SceneConfig& s = f.scene;
  const auto pair = [](const auto& a) {
    std::string text;
    for (double v : a) {
      text += (text.empty() ? "" : " ") + format_number(v);
    }
    return text;
  };
  out << "# Peg-transfer scene. Lengths in metres, times in seconds.\n"
      << "peg.height = " << format_number(s.peg_height_m) << '\n'
      << "peg.capture_radius = " << format_number(s.peg_capture_radius_m) << '\n'
      << "peg.columns_x = " << pair(s.peg_columns_x_m) << '\n'
      << "peg.rows_z = " << pair(s.peg_rows_z_m) << '\n'
      << "ring.radius = " << format_number(s.ring_radius_m) << '\n'
      << "ring.rest_height = " << format_number(s.ring_rest_height_m) << '\n'
      << "grasp.radius = " << format_number(s.grasp_radius_m) << '\n'
      << "jaw.close_threshold = " << format_number(s.jaw_close_threshold) << '\n'
      << "jaw.open_threshold = " << format_number(s.jaw_open_threshold) << '\n'
      << "place.height_margin = " << format_number(s.place_height_margin_m) << '\n'
      << "gravity = " << format_number(s.gravity_mps2) << '\n'
      << "respawn_s = " << format_number(static_cast<double>(s.respawn_us) * 1e-6) << '\n'
      << "require_handover = " << (s.require_handover ? "true" : "false") << '\n'
      << "instrument.left.rcm = " << format_vec3(s.rcm_world[0]) << '\n'
      << "instrument.right.rcm = " << format_vec3(s.rcm_world[1]) << '\n'
      << "instrument.home_insertion = " << format_number(s.home_insertion_m) << '\n'
      << "camera.position = " << format_vec3(s.camera.translation) << '\n'
      << "camera.rotation = " << format_quat(s.camera.rotation) << '\n'
      << "ik.damping = " << format_number(s.ik.damping) << '\n'
      << "ik.max_iterations = " << s.ik.max_iterations << '\n'
      << "protocol.familiarization_s = " << format_number(f.protocol.familiarization_s) << '\n'
      << "protocol.trial_s = " << format_number(f.protocol.trial_s) << '\n'
      << "protocol.trials = " << f.protocol.trials << '\n'
      << "protocol.break_s = " << format_number(f.protocol.break_s) << '\n'
      << "teleop.translation_scale = " << format_number(f.translation_scale) << '\n'
      << "teleop.camera_translation_scale = " << format_number(f.camera_translation_scale) << '\n'
      << "imu.alpha = " << format_number(f.imu_alpha) << '\n';
}

SceneFile parse_scene_file(std::istream& in, const std::string& source) {
  const KeyValues kv = KeyValues::parse(in, source);
  SceneFile f;
  task::SceneConfig& s = f.scene;
  s.peg_height_m = kv.number("peg.height", s.peg_height_m);
  s.peg_capture_radius_m = kv.number("peg.capture_radius", s.peg_capture_radius_m);
  const auto cols = kv.numbers("peg.columns_x", 2, {s.peg_columns_x_m[0], s.peg_columns_x_m[1]});
  s.peg_columns_x_m = {cols[0], cols[1]};
  const auto rows =
      kv.numbers("peg.rows_z", 3, {s.peg_rows_z_m[0], s.peg_rows_z_m[1], s.peg_rows_z_m[2]});
  s.peg_rows_z_m = {rows[0], rows[1], rows[2]};
  s.ring_radius_m = kv.number("ring.radius", s.ring_radius_m);
  s.ring_rest_height_m = kv.number("ring.rest_height", s.ring_rest_height_m);
  s.grasp_radius_m = kv.number("grasp.radius", s.grasp_radius_m);
  s.jaw_close_threshold = kv.number("jaw.close_threshold", s.jaw_close_threshold);
  s.jaw_open_threshold = kv.number("jaw.open_threshold", s.jaw_open_threshold);
  s.place_height_margin_m = kv.number("place.height_margin", s.place_height_margin_m);
  s.gravity_mps2 = kv.number("gravity", s.gravity_mps2);
  s.respawn_us =
      std::llround(kv.number("respawn_s", static_cast<double>(s.respawn_us) * 1e-6) * 1e6);
  s.require_handover = kv.boolean("require_handover", s.require_handover);
  s.rcm_world[0] = kv.vec3("instrument.left.rcm", s.rcm_world[0]);
  s.rcm_world[1] = kv.vec3("instrument.right.rcm", s.rcm_world[1]);
  s.home_insertion_m = kv.number("instrument.home_insertion", s.home_insertion_m);
  s.camera.translation = kv.vec3("camera.position", s.camera.translation);
  s.camera.rotation = kv.quat("camera.rotation", s.camera.rotation);
  s.ik.damping = kv.number("ik.damping", s.ik.damping);
  s.ik.max_iterations = static_cast<int>(kv.integer("ik.max_iterations", s.ik.max_iterations));
  f.protocol.familiarization_s =
      kv.number("protocol.familiarization_s", f.protocol.familiarization_s);
  f.protocol.trial_s = kv.number("protocol.trial_s", f.protocol.trial_s);
  f.protocol.trials = static_cast<int>(kv.integer("protocol.trials", f.protocol.trials));
  f.protocol.break_s = kv.number("protocol.break_s", f.protocol.break_s);
  f.translation_scale = kv.number("teleop.translation_scale", f.translation_scale);
  f.camera_translation_scale =
      kv.number("teleop.camera_translation_scale", f.camera_translation_scale);
  f.imu_alpha = kv.number("imu.alpha", f.imu_alpha);
  kv.reject_unknown();
  s.validate();
  f.protocol.validate();
  if (!(f.translation_scale > 0.0) || !(f.camera_translation_scale >= 0.0) ||
      !(f.imu_alpha >= 0.0 && f.imu_alpha <= 1.0) || !(s.ik.damping >= 0.0) ||
      s.ik.max_iterations < 1) {
    throw ParseError(source + ": teleop scales, imu.alpha or ik settings out of range");
  }
  return f;
}

SceneFile load_scene_file(const std::string& path) {
  auto in = open(path);
  return parse_scene_file(in, path);
}

}  // namespace dex::io
