#include <doctest.h>

#include <cmath>
#include <deque>
#include <sstream>

#include "dex/io/replay.hpp"
#include "dex/synth/synth.hpp"
#include "dex/tracking/pipeline.hpp"

using namespace dex;
using namespace dex::synth;

namespace {

std::string replay_text(const SynthOutput& out) {
  std::ostringstream s;
  io::write_replay(s, out.records);
  return s.str();
}

// Hamilton product and axis-angle exponential written out on the test side.
struct Q {
  double w, x, y, z;
};

Q mul(Q a, Q b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Q exp_rate(double gx, double gy, double gz, double dt) {
  const double w = std::sqrt(gx * gx + gy * gy + gz * gz);
  if (w == 0.0) {
    return {1.0, 0.0, 0.0, 0.0};
  }
  const double h = 0.5 * w * dt;
  const double s = std::sin(h) / w;
  return {std::cos(h), gx * s, gy * s, gz * s};
}

}  // namespace

TEST_CASE("static pose without noise: blobs sit exactly on the projected centroids") {
  SynthSpec spec;
  spec.scenario = "static";
  spec.duration_s = 0.5;
  const io::Calibration calib;
  const auto out = synth_session(spec, calib);
  int frames = 0;
  for (const auto& r : out.records) {
    const auto* st = std::get_if<io::StereoRecord>(&r);
    if (st == nullptr) {
      continue;
    }
    ++frames;
    REQUIRE(st->markers.size() == 2);
    // Left camera at the origin, right camera 4 cm along x, f = 500, c = (320, 240).
    const double xs[2] = {-0.05, 0.05};
    for (int i = 0; i < 2; ++i) {
      const auto& [l, r2] = st->markers[static_cast<std::size_t>(i)];
      CHECK(l.u == doctest::Approx(500.0 * xs[i] / 0.35 + 320.0).epsilon(1e-14));
      CHECK(l.v == doctest::Approx(240.0).epsilon(1e-14));
      CHECK(r2.u == doctest::Approx(500.0 * (xs[i] - 0.04) / 0.35 + 320.0).epsilon(1e-14));
      CHECK(r2.v == l.v);
    }
  }
  CHECK(frames == 31);
}

TEST_CASE("same seed gives byte-identical replays, another seed does not") {
  SynthSpec spec;
  spec.scenario = "two-circles";
  spec.duration_s = 2.0;
  spec.noise.pixel_sigma = 0.3;
  spec.noise.gyro_sigma = 0.01;
  const io::Calibration calib;
  const std::string a = replay_text(synth_session(spec, calib));
  const std::string b = replay_text(synth_session(spec, calib));
  CHECK(a == b);
  spec.seed = 2;
  CHECK(replay_text(synth_session(spec, calib)) != a);
}

TEST_CASE("leaving the frustum names the first bad timestamp") {
  io::Calibration calib;
  // A 320-pixel-wide image cannot contain the 0.1 m circle at 0.3 m.
  calib.rig.left.width = 320;
  calib.rig.left.cx = 160.0;
  calib.rig.right.width = 320;
  calib.rig.right.cx = 160.0;
  SynthSpec spec;
  spec.scenario = "circle";
  try {
    synth_session(spec, calib);
    FAIL("expected a SynthError");
  } catch (const SynthError& e) {
    CHECK(std::string(e.what()).find("t_us 0") != std::string::npos);
  }
  spec.scenario = "spiral";
  CHECK_THROWS_AS(synth_session(spec, io::Calibration{}), SynthError);
}

TEST_CASE("integrating the noiseless gyro stream reproduces the truth within 1e-3 rad") {
  SynthSpec spec;
  spec.scenario = "circle";
  spec.duration_s = 10.0;
  const auto out = synth_session(spec, io::Calibration{});
  Q q{1.0, 0.0, 0.0, 0.0};
  std::int64_t last = -1;
  double g[3] = {0.0, 0.0, 0.0};
  for (const auto& r : out.records) {
    const auto* imu = std::get_if<io::ImuRecord>(&r);
    if (imu == nullptr) {
      continue;
    }
    const auto t = static_cast<std::int64_t>(imu->packet.t_us);
    if (last >= 0) {
      q = mul(q, exp_rate(g[0], g[1], g[2], static_cast<double>(t - last) * 1e-6));
    }
    g[0] = imu->packet.gyro[0];
    g[1] = imu->packet.gyro[1];
    g[2] = imu->packet.gyro[2];
    last = t;

    // Specific force is gravity seen in the body frame.
    const UnitQuat truth_q = UnitQuat::from_components(q.w, q.x, q.y, q.z);
    const Vec3 a{imu->packet.accel[0], imu->packet.accel[1], imu->packet.accel[2]};
    CHECK(norm(truth_q.rotate(a) - Vec3{0.0, 9.81, 0.0}) < 1e-4);
  }
  const TruthSample& end = out.truth.back();
  REQUIRE(end.t_us == 10'000'000);
  CHECK(last == 10'000'000);
  const UnitQuat integrated = UnitQuat::from_components(q.w, q.x, q.y, q.z);
  CHECK(angular_distance(integrated, end.orientation) < 1e-3);
}

TEST_CASE("circle at 0.3 px noise: smoothed RMSE under 2 mm against the window-aligned truth") {
  SynthSpec spec;
  spec.scenario = "circle";
  spec.noise.pixel_sigma = 0.3;
  const io::Calibration calib;
  const auto out = synth_session(spec, calib);
  tracking::TrackingPipeline pipe(calib.rig, {});
  std::deque<Vec3> window;
  std::size_t k = 0;
  double se = 0.0;
  int n = 0;
  for (const auto& r : out.records) {
    const auto* st = std::get_if<io::StereoRecord>(&r);
    if (st == nullptr) {
      continue;
    }
    std::vector<tracking::Blob> left;
    std::vector<tracking::Blob> right;
    for (const auto& [l, r2] : st->markers) {
      left.push_back({l.u, l.v, 1, 255});
      right.push_back({r2.u, r2.v, 1, 255});
    }
    const auto fr = pipe.process(st->t_us, left, right);
    window.push_back(out.truth[k++].led_tracker);
    if (window.size() > 5) {
      window.pop_front();
    }
    Vec3 mean;
    for (const Vec3& w : window) {
      mean = mean + w;
    }
    mean = mean / static_cast<double>(window.size());
    REQUIRE(fr.tracks.tracks[0].status == tracking::TrackStatus::Tracked);
    se += std::pow(norm(fr.tracks.tracks[0].position_smoothed - mean), 2);
    ++n;
  }
  CHECK(n == 601);
  CHECK(std::sqrt(se / n) < 0.002);
}

TEST_CASE("rendered spots are detected within a tenth of a pixel") {
  const io::Calibration calib;
  const std::vector<Pixel> centres{{100.3, 200.7}, {400.55, 120.25}};
  const auto frame = render_spots(calib.rig.left, centres, 0);
  const auto blobs = tracking::detect_blobs(frame);
  REQUIRE(blobs.size() == 2);
  for (const Pixel& c : centres) {
    double best = 1e9;
    for (const auto& b : blobs) {
      // Blob centroids index pixel centres at integer coordinates.
      best = std::min(best, std::hypot(b.u + 0.5 - c.u, b.v + 0.5 - c.v));
    }
    // Thresholding clips the spot tails, which biases the centroid slightly.
    CHECK(best < 0.1);
  }
}

TEST_CASE("truth files round-trip") {
  SynthSpec spec;
  spec.scenario = "two-circles";
  spec.duration_s = 0.2;
  const auto out = synth_session(spec, io::Calibration{});
  std::stringstream s;
  write_truth(s, out.truth);
  const auto back = parse_truth(s);
  REQUIRE(back.size() == out.truth.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].t_us == out.truth[i].t_us);
    CHECK(back[i].led_tracker == out.truth[i].led_tracker);
    CHECK(back[i].grip_world == out.truth[i].grip_world);
  }
}

TEST_CASE("the synthetic user improves: transfers never fall, drops never rise") {
  SynthSpec spec;
  spec.scenario = "peg-session";
  spec.seed = 1;
  const auto out = synth_session(spec, io::Calibration{});
  REQUIRE(out.expected_report.has_value());
  const auto& t = out.expected_report->trials;
  REQUIRE(t.size() == 3);
  for (std::size_t k = 1; k < 3; ++k) {
    CHECK(t[k].transfers >= t[k - 1].transfers);
    CHECK(t[k].drops <= t[k - 1].drops);
  }
  CHECK(t[2].transfers > t[0].transfers);
}
