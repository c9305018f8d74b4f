#include "dex/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "dex/engine/engine.hpp"
#include "dex/imu/orientation_filter.hpp"
#include "dex/io/keyvalue.hpp"
#include "dex/io/pgm.hpp"
#include "dex/io/report.hpp"
#include "dex/synth/peg_user.hpp"

namespace dex::synth {

namespace {

constexpr double kSpotSigmaPx = 2.0;

// LED path in the tracker frame and a constant body rate about a fixed start
// orientation, so the exact gyro reading is the body rate itself.
struct Trajectory {
  std::function<Vec3(double)> led;
  UnitQuat start;
  Vec3 body_rate;

  UnitQuat orientation(double t) const {
    const double w = norm(body_rate);
    if (w == 0.0) {
      return start;
    }
    return start * quat_from_axis_angle(body_rate / w, w * t);
  }
};

std::vector<Trajectory> trajectories(const SynthSpec& spec) {
  const double omega = 2.0 * std::numbers::pi * spec.circle_hz;
  const auto circle = [omega](Vec3 centre, double radius, double phase) {
    // Plane tilted 30 degrees from the image plane, so image tracks are ellipses.
    const double tilt = std::numbers::pi / 6.0;
    const Vec3 e1{1.0, 0.0, 0.0};
    const Vec3 e2{0.0, std::cos(tilt), std::sin(tilt)};
    return [=](double t) {
      const double a = phase + omega * t;
      return centre + radius * (std::cos(a) * e1 + std::sin(a) * e2);
    };
  };
  const Vec3 yaw_rate{0.0, omega, 0.0};
  if (spec.scenario == "static") {
    return {
        {[](double) { return Vec3{-0.05, 0.0, 0.35}; }, UnitQuat::identity(), {}},
        {[](double) { return Vec3{0.05, 0.0, 0.35}; }, UnitQuat::identity(), {}},
    };
  }
  if (spec.scenario == "circle") {
    // Starts at the left-most point so the lone marker is labelled Left.
    return {{circle({0.0, 0.0, 0.3}, 0.1, std::numbers::pi), UnitQuat::identity(), yaw_rate}};
  }
  if (spec.scenario == "two-circles") {
    return {
        {circle({-0.07, 0.0, 0.3}, 0.04, std::numbers::pi), UnitQuat::identity(), yaw_rate},
        {circle({0.07, 0.0, 0.3}, 0.04, 0.0), UnitQuat::identity(), -1.0 * yaw_rate},
    };
  }
  throw SynthError("unknown scenario '" + spec.scenario +
                   "' (static, circle, two-circles, peg-session)");
}

std::string frame_name(char side, std::size_t k) {
  std::ostringstream s;
  s << "frames/" << side << std::setw(6) << std::setfill('0') << k << ".pgm";
  return s.str();
}

SynthOutput synth_tracking(const SynthSpec& spec, const io::Calibration& calib) {
  if (!(spec.duration_s > 0.0) || !(spec.frame_hz > 0.0) || !(spec.imu_hz > 0.0) ||
      spec.noise.pixel_sigma < 0.0 || spec.noise.gyro_sigma < 0.0 ||
      spec.noise.accel_sigma < 0.0) {
    throw SynthError("durations, rates and noise levels must be positive");
  }
  const std::vector<Trajectory> paths = trajectories(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  SynthOutput out;
  const auto end_us = static_cast<std::int64_t>(std::llround(spec.duration_s * 1e6));

  std::vector<std::pair<std::int64_t, io::ReplayRecord>> imu;
  const auto imu_period = 1e6 / spec.imu_hz;
  for (std::int64_t k = 0;; ++k) {
    const auto t_us = static_cast<std::int64_t>(std::llround(static_cast<double>(k) * imu_period));
    if (t_us > end_us) {
      break;
    }
    const double t = static_cast<double>(t_us) * 1e-6;
    for (std::size_t c = 0; c < paths.size(); ++c) {
      const UnitQuat q = paths[c].orientation(t);
      const Vec3 gyro = paths[c].body_rate + spec.noise.gyro_bias;
      const Vec3 accel = q.inverse().rotate({0.0, imu::kGravity, 0.0});
      io::ControllerPacket p;
      p.controller_id = static_cast<std::uint8_t>(c);
      p.seq = static_cast<std::uint16_t>(k & 0xFFFF);
      p.t_us = static_cast<std::uint64_t>(t_us);
      const double gs = spec.noise.gyro_sigma;
      const double as = spec.noise.accel_sigma;
      p.gyro = {static_cast<float>(gyro.x + gs * n01(rng)), static_cast<float>(gyro.y + gs * n01(rng)),
                static_cast<float>(gyro.z + gs * n01(rng))};
      p.accel = {static_cast<float>(accel.x + as * n01(rng)),
                 static_cast<float>(accel.y + as * n01(rng)),
                 static_cast<float>(accel.z + as * n01(rng))};
      imu.emplace_back(t_us, io::ImuRecord{p});
    }
  }

  std::vector<std::pair<std::int64_t, io::ReplayRecord>> frames;
  const double frame_period = 1e6 / spec.frame_hz;
  for (std::size_t k = 0;; ++k) {
    const auto t_us =
        static_cast<std::int64_t>(std::llround(static_cast<double>(k) * frame_period));
    if (t_us > end_us) {
      break;
    }
    const double t = static_cast<double>(t_us) * 1e-6;
    io::StereoRecord stereo{t_us, {}};
    std::vector<Pixel> left_px;
    std::vector<Pixel> right_px;
    for (std::size_t c = 0; c < paths.size(); ++c) {
      const Vec3 led = paths[c].led(t);
      const UnitQuat q = paths[c].orientation(t);
      Pixel l;
      Pixel r;
      try {
        l = project(calib.rig.left, led);
        r = project(calib.rig.right, led);
      } catch (const ProjectionError&) {
        throw SynthError("marker " + std::to_string(c) + " is behind a camera at t_us " +
                         std::to_string(t_us));
      }
      if (!calib.rig.left.contains(l) || !calib.rig.right.contains(r)) {
        throw SynthError("marker " + std::to_string(c) + " leaves the camera frustum at t_us " +
                         std::to_string(t_us));
      }
      const double s = spec.noise.pixel_sigma;
      l.u += s * n01(rng);
      l.v += s * n01(rng);
      r.u += s * n01(rng);
      r.v += s * n01(rng);
      stereo.markers.emplace_back(l, r);
      left_px.push_back(l);
      right_px.push_back(r);
      const Vec3 grip = calib.tracker_to_world.apply(led) + q.rotate(calib.grip_offset[c]);
      out.truth.push_back({t_us, static_cast<int>(c), led, grip, q});
    }
    if (spec.render_frames) {
      const std::string ln = frame_name('L', k);
      const std::string rn = frame_name('R', k);
      out.frames.push_back({ln, render_spots(calib.rig.left, left_px, t_us)});
      out.frames.push_back({rn, render_spots(calib.rig.right, right_px, t_us)});
      frames.emplace_back(t_us, io::FrameRecord{t_us, ln, rn});
    } else {
      frames.emplace_back(t_us, stereo);
    }
  }

  // IMU before frames at equal times; each list is already time-ordered.
  std::vector<std::pair<std::int64_t, io::ReplayRecord>> merged;
  std::merge(imu.begin(), imu.end(), frames.begin(), frames.end(), std::back_inserter(merged),
             [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [t, r] : merged) {
    out.records.push_back(std::move(r));
  }
  return out;
}

SynthOutput synth_peg_session(const SynthSpec& spec, const io::Calibration& calib,
                              const io::SceneFile& scene) {
  engine::EngineConfig config;
  config.calibration = calib;
  config.scene = scene;
  engine::Engine eng(config);
  PegUser user(spec.seed);
  SynthOutput out;

  const auto push = [&](const io::ReplayRecord& r) {
    eng.push(r);
    out.records.push_back(r);
  };
  push(io::CommandRecord{0, task::SessionCommand::Start});
  const std::int64_t step = eng.config().scene.scene.step_us;
  for (std::int64_t t = 0;; t += kUserPeriodUs) {
    for (const io::PoseRecord& p : user.act(eng, t)) {
      push(p);
    }
    if (eng.runner().phase().kind == task::PhaseKind::Done) {
      break;
    }
    eng.run_until(t + kUserPeriodUs - step);
  }
  eng.finish();
  out.expected_report = eng.report();
  return out;
}

}  // namespace

tracking::IrFrame render_spots(const PinholeCamera& camera, const std::vector<Pixel>& centres,
                               std::int64_t t_us) {
  tracking::IrFrame f;
  f.t_us = t_us;
  f.width = camera.width;
  f.height = camera.height;
  std::vector<double> acc(static_cast<std::size_t>(f.width) * f.height, 0.0);
  const int reach = static_cast<int>(std::ceil(4.0 * kSpotSigmaPx));
  for (const Pixel& c : centres) {
    // Pixel (col, row) covers [col, col + 1) with its centre at col + 0.5.
    const int c0 = static_cast<int>(std::floor(c.u));
    const int r0 = static_cast<int>(std::floor(c.v));
    for (int row = std::max(0, r0 - reach); row <= std::min(f.height - 1, r0 + reach); ++row) {
      for (int col = std::max(0, c0 - reach); col <= std::min(f.width - 1, c0 + reach); ++col) {
        const double du = col + 0.5 - c.u;
        const double dv = row + 0.5 - c.v;
        acc[static_cast<std::size_t>(row) * f.width + col] +=
            255.0 * std::exp(-(du * du + dv * dv) / (2.0 * kSpotSigmaPx * kSpotSigmaPx));
      }
    }
  }
  f.pixels.resize(acc.size());
  std::transform(acc.begin(), acc.end(), f.pixels.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  });
  return f;
}

SynthOutput synth_session(const SynthSpec& spec, const io::Calibration& calibration,
                          const io::SceneFile& scene) {
  if (spec.scenario == "peg-session") {
    return synth_peg_session(spec, calibration, scene);
  }
  return synth_tracking(spec, calibration);
}

void write_truth(std::ostream& out, const std::vector<TruthSample>& truth) {
  out << "# t_us controller led_x led_y led_z grip_x grip_y grip_z qw qx qy qz\n";
  for (const TruthSample& s : truth) {
    out << s.t_us << ' ' << s.controller << ' ' << io::format_vec3(s.led_tracker) << ' '
        << io::format_vec3(s.grip_world) << ' ' << io::format_quat(s.orientation) << '\n';
  }
}

std::vector<TruthSample> parse_truth(std::istream& in) {
  std::vector<TruthSample> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::istringstream s(line);
    TruthSample t;
    double q[4];
    s >> t.t_us >> t.controller >> t.led_tracker.x >> t.led_tracker.y >> t.led_tracker.z >>
        t.grip_world.x >> t.grip_world.y >> t.grip_world.z >> q[0] >> q[1] >> q[2] >> q[3];
    if (!s) {
      throw ParseError("truth line " + std::to_string(number) + " is malformed");
    }
    t.orientation = UnitQuat::from_components(q[0], q[1], q[2], q[3]);
    out.push_back(t);
  }
  return out;
}

void save_output(const std::string& dir, const SynthOutput& output) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream replay(fs::path(dir) / "session.replay");
    io::write_replay(replay, output.records);
    if (!replay) {
      throw Error("cannot write the replay into " + dir);
    }
  }
  if (!output.truth.empty()) {
    std::ofstream truth(fs::path(dir) / "truth.txt");
    write_truth(truth, output.truth);
  }
  if (!output.frames.empty()) {
    fs::create_directories(fs::path(dir) / "frames");
    for (const RenderedFrame& f : output.frames) {
      io::save_pgm((fs::path(dir) / f.name).string(), f.image);
    }
  }
  if (output.expected_report) {
    io::save_text((fs::path(dir) / "expected_report.json").string(),
                  io::write_report(*output.expected_report));
  }
}

}  // namespace dex::synth
