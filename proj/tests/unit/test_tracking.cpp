#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dex/math/error.hpp"
#include "dex/tracking/pipeline.hpp"

using namespace dex;
using namespace dex::tracking;

namespace {

IrFrame dark_frame(int w = 64, int h = 48) {
  return IrFrame{0, w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)};
}

void paint(IrFrame& f, int col, int row, std::uint8_t value) {
  f.pixels[static_cast<std::size_t>(row) * f.width + col] = value;
}

Blob blob_at(double u, double v) { return Blob{u, v, 9, 255}; }

BlobPair project_pair(const StereoRig& rig, const Vec3& p) {
  const Pixel l = project(rig.left, p);
  const Pixel r = project(rig.right, p);
  return {blob_at(l.u, l.v), blob_at(r.u, r.v)};
}

}  // namespace

TEST_CASE("detect_blobs: uniform square") {
  IrFrame f = dark_frame();
  for (int r = 10; r <= 12; ++r) {
    for (int c = 20; c <= 22; ++c) {
      paint(f, c, r, 255);
    }
  }
  const auto blobs = detect_blobs(f, {128, 3});
  REQUIRE(blobs.size() == 1);
  CHECK(blobs[0].u == 21.0);
  CHECK(blobs[0].v == 11.0);
  CHECK(blobs[0].area == 9);
  CHECK(blobs[0].peak == 255);
}

TEST_CASE("detect_blobs: dark frame yields nothing") {
  CHECK(detect_blobs(dark_frame()).empty());
}

TEST_CASE("detect_blobs: connectivity, weighting, area filter and ordering") {
  IrFrame f = dark_frame();
  // Diagonal chain is one 8-connected component.
  paint(f, 5, 5, 250);
  paint(f, 6, 6, 250);
  paint(f, 7, 7, 250);
  // Two-pixel speck falls under min_area.
  paint(f, 40, 30, 255);
  paint(f, 41, 30, 255);
  // Larger blob with uneven intensity: centroid pulled toward the brighter pixel.
  paint(f, 30, 10, 210);
  paint(f, 31, 10, 250);
  paint(f, 30, 11, 210);
  paint(f, 31, 11, 250);
  const auto blobs = detect_blobs(f, {200, 3});
  REQUIRE(blobs.size() == 2);
  CHECK(blobs[0].area == 4);
  CHECK(blobs[0].u == doctest::Approx((30.0 * 420 + 31.0 * 500) / 920.0));
  CHECK(blobs[0].v == doctest::Approx(10.5));
  CHECK(blobs[1].area == 3);
  CHECK(blobs[1].u == doctest::Approx(6.0));
}

TEST_CASE("detect_blobs: rejects bad threshold or mismatched buffer") {
  IrFrame f = dark_frame();
  CHECK_THROWS_AS(detect_blobs(f, {0, 3}), DomainError);
  CHECK_THROWS_AS(detect_blobs(f, {255, 3}), DomainError);
  f.pixels.pop_back();
  CHECK_THROWS_AS(detect_blobs(f), DomainError);
}

TEST_CASE("property: raising the threshold never grows blob area") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> px(0, 255);
  for (int trial = 0; trial < 50; ++trial) {
    IrFrame f = dark_frame(40, 30);
    for (auto& p : f.pixels) {
      const int v = px(rng);
      p = static_cast<std::uint8_t>(v > 150 ? v : 0);
    }
    int prev_total = std::numeric_limits<int>::max();
    int prev_max = std::numeric_limits<int>::max();
    for (int threshold = 120; threshold <= 250; threshold += 10) {
      const auto blobs = detect_blobs(f, {threshold, 3});
      int total = 0, largest = 0;
      for (const Blob& b : blobs) {
        total += b.area;
        largest = std::max(largest, b.area);
      }
      CHECK(total <= prev_total);
      CHECK(largest <= prev_max);
      prev_total = total;
      prev_max = largest;
    }
  }
}

TEST_CASE("correspond_stereo on the rectified default rig") {
  const StereoRig rig = StereoRig::rectified(0.04);
  SUBCASE("same scanline, positive disparity") {
    const auto m = correspond_stereo({blob_at(370, 240)}, {blob_at(350, 240)}, rig);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].first.u == 370);
    CHECK(m.pairs[0].second.u == 350);
    CHECK_FALSE(m.ambiguous);
  }
  SUBCASE("epipolar violation") {
    CHECK(correspond_stereo({blob_at(370, 240)}, {blob_at(370, 300)}, rig).pairs.empty());
  }
  SUBCASE("negative disparity is not a match") {
    CHECK(correspond_stereo({blob_at(350, 240)}, {blob_at(370, 240)}, rig).pairs.empty());
  }
  SUBCASE("two markers on one scanline keep left/right ordering") {
    const Vec3 a{-0.05, 0.0, 0.35};
    const Vec3 b{0.06, 0.0, 0.33};
    const auto pa = project_pair(rig, a);
    const auto pb = project_pair(rig, b);
    const auto m = correspond_stereo({pa.first, pb.first}, {pb.second, pa.second}, rig);
    REQUIRE(m.pairs.size() == 2);
    CHECK(m.pairs[0].first.u == pa.first.u);
    CHECK(m.pairs[0].second.u == pa.second.u);
    CHECK(m.pairs[1].second.u == pb.second.u);
  }
  SUBCASE("synthetic two-controller scene recovers both pairs") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> x(-0.12, 0.12), y(-0.08, 0.08), z(0.2, 0.5);
    for (int i = 0; i < 200; ++i) {
      const Vec3 a{x(rng), y(rng), z(rng)};
      const Vec3 b{x(rng), y(rng), z(rng)};
      if (std::abs(project(rig.left, a).v - project(rig.left, b).v) < 3.0) {
        continue;  // same scanline: inherently ambiguous for a rectified rig
      }
      const auto pa = project_pair(rig, a);
      const auto pb = project_pair(rig, b);
      const auto m = correspond_stereo({pa.first, pb.first}, {pb.second, pa.second}, rig);
      REQUIRE(m.pairs.size() == 2);
      CHECK(m.pairs[0].second.u == pa.second.u);
      CHECK(m.pairs[1].second.u == pb.second.u);
      CHECK_FALSE(m.ambiguous);
    }
  }
  SUBCASE("more consistent pairs than controllers raises the ambiguity flag") {
    const auto m = correspond_stereo({blob_at(370, 240), blob_at(300, 240)},
                                     {blob_at(350, 240), blob_at(280, 240)}, rig);
    CHECK(m.ambiguous);
    CHECK(m.pairs.size() == 2);
  }
}

TEST_CASE("triangulate_midpoint") {
  const StereoRig rig = StereoRig::rectified(0.04);
  SUBCASE("disparity example") {
    const auto tri = triangulate_midpoint({blob_at(370, 240), blob_at(350, 240)}, rig);
    CHECK(tri.point.x == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(std::abs(tri.point.y) < 1e-15);
    CHECK(tri.point.z == doctest::Approx(1.00).epsilon(1e-12));
    CHECK(tri.gap < 1e-12);
  }
  SUBCASE("identical coordinates give parallel rays") {
    CHECK_THROWS_AS(triangulate_midpoint({blob_at(370, 240), blob_at(370, 240)}, rig),
                    DegenerateGeometryError);
  }
  SUBCASE("large gap is rejected") {
    CHECK_THROWS_AS(triangulate_midpoint({blob_at(370, 240), blob_at(350, 250)}, rig),
                    RejectedObservationError);
  }
}

TEST_CASE("triangulation round trip on noiseless projections") {
  std::mt19937_64 rng(99);
  StereoRig verged = StereoRig::rectified(0.04);
  verged.right.pose_in_rig = {quat_from_axis_angle({0, 1, 0}, -0.08), {0.04, 0.002, -0.001}};
  for (const StereoRig& rig : {StereoRig::rectified(0.04), verged}) {
    std::uniform_real_distribution<double> x(-0.1, 0.1), y(-0.08, 0.08), z(0.2, 0.6);
    double worst = 0.0, worst_gap = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Vec3 p{x(rng), y(rng), z(rng)};
      const auto tri = triangulate_midpoint(project_pair(rig, p), rig);
      worst = std::max(worst, distance(tri.point, p));
      worst_gap = std::max(worst_gap, tri.gap);
    }
    CHECK(worst < 1e-9);
    CHECK(worst_gap < 1e-12);
  }
}

TEST_CASE("epipolar distance is the scanline offset on a rectified rig") {
  const StereoRig rig = StereoRig::rectified(0.04);
  CHECK(epipolar_distance(rig, {370, 240}, {350, 243.5}) == doctest::Approx(3.5));
}

TEST_CASE("moving average") {
  SUBCASE("constant input") {
    MovingAverageFilter f(4);
    const Vec3 c{0.1, -0.3, 0.7};
    for (int i = 0; i < 10; ++i) {
      CHECK(f.push(c) == c);
    }
  }
  SUBCASE("warm-up") {
    MovingAverageFilter f(5);
    f.push({0, 0, 0});
    CHECK(f.push({1, 1, 1}).x == 0.5);
  }
  SUBCASE("step fully replaced after window samples") {
    MovingAverageFilter f(5);
    for (int i = 0; i < 5; ++i) {
      f.push({0, 0, 0});
    }
    for (int i = 1; i <= 5; ++i) {
      const double out = f.push({1, 1, 1}).x;
      if (i < 5) {
        CHECK(out < 1.0);
      } else {
        CHECK(out == 1.0);
      }
    }
  }
  SUBCASE("output stays within the window envelope") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    MovingAverageFilter f(5);
    for (int i = 0; i < 1000; ++i) {
      const Vec3 out = f.push({n(rng) * 1e-3 + 0.1, n(rng), n(rng) * 1e6});
      for (int axis = 0; axis < 3; ++axis) {
        double lo = 1e300, hi = -1e300;
        for (const Vec3& s : f.samples()) {
          lo = std::min(lo, s[axis]);
          hi = std::max(hi, s[axis]);
        }
        CHECK(out[axis] >= lo);
        CHECK(out[axis] <= hi);
      }
    }
  }
  CHECK_THROWS_AS(MovingAverageFilter(0), DomainError);
}

TEST_CASE("track_markers: initial labelling by x order") {
  TrackSet s;
  const std::vector<Vec3> obs{{0.08, 0, 0.3}, {-0.05, 0, 0.3}};
  s = track_markers(s, obs, 0);
  CHECK(s[ControllerId::Left].status == TrackStatus::Tracked);
  CHECK(s[ControllerId::Left].position_raw.x == -0.05);
  CHECK(s[ControllerId::Right].position_raw.x == 0.08);
}

TEST_CASE("track_markers: identities survive 600 frames on two circles") {
  TrackSet s;
  const double dt = 1.0 / 60.0;
  for (int k = 0; k < 600; ++k) {
    const double t = k * dt;
    const Vec3 left{-0.07 + 0.03 * std::cos(2 * std::numbers::pi * 0.5 * t),
                    0.03 * std::sin(2 * std::numbers::pi * 0.5 * t), 0.35};
    const Vec3 right{0.07 + 0.03 * std::cos(2 * std::numbers::pi * 0.4 * t + 1.0), 0.0,
                     0.35 + 0.03 * std::sin(2 * std::numbers::pi * 0.4 * t + 1.0)};
    // Alternate the observation order so labels cannot come from list position.
    const std::vector<Vec3> obs = (k % 2) ? std::vector<Vec3>{right, left} : std::vector<Vec3>{left, right};
    s = track_markers(s, obs, static_cast<std::int64_t>(std::llround(t * 1e6)));
    REQUIRE(s[ControllerId::Left].status == TrackStatus::Tracked);
    REQUIRE(s[ControllerId::Left].position_raw == left);
    REQUIRE(s[ControllerId::Right].position_raw == right);
  }
}

TEST_CASE("track_markers: coasting then lost") {
  TrackSet s;
  const double v = 0.1;  // m/s along x
  std::int64_t t = 0;
  for (int k = 0; k < 10; ++k, t += 10'000) {
    const std::vector<Vec3> obs{{-0.05 + v * t * 1e-6, 0, 0.3}, {0.08, 0, 0.3}};
    s = track_markers(s, obs, t);
  }
  const std::int64_t last = t - 10'000;
  // Left marker disappears.
  for (; t <= last + 100'000; t += 10'000) {
    const std::vector<Vec3> obs{{0.08, 0, 0.3}};
    s = track_markers(s, obs, t);
  }
  const MarkerTrack& left = s[ControllerId::Left];
  CHECK(left.status == TrackStatus::Coasting);
  CHECK(left.position_raw.x == doctest::Approx(-0.05 + v * (t - 10'000) * 1e-6).epsilon(1e-9));
  CHECK(s[ControllerId::Right].status == TrackStatus::Tracked);

  for (; t <= last + 300'000; t += 10'000) {
    const std::vector<Vec3> obs{{0.08, 0, 0.3}};
    s = track_markers(s, obs, t);
  }
  CHECK(s[ControllerId::Left].status == TrackStatus::Lost);

  // Re-acquired on its own side of the live track.
  const std::vector<Vec3> back{{0.08, 0, 0.3}, {-0.02, 0.01, 0.3}};
  s = track_markers(s, back, t);
  CHECK(s[ControllerId::Left].status == TrackStatus::Tracked);
  CHECK(s[ControllerId::Left].position_raw.x == -0.02);
}

TEST_CASE("track_markers: two observations inside one gate flag the frame") {
  TrackSet s;
  s = track_markers(s, std::vector<Vec3>{{-0.05, 0, 0.3}, {0.08, 0, 0.3}}, 0);
  const std::vector<Vec3> crowded{{-0.05, 0.006, 0.3}, {-0.046, 0, 0.3}, {0.08, 0, 0.3}};
  s = track_markers(s, crowded, 16'667);
  CHECK(s.ambiguous);
  CHECK(s[ControllerId::Left].position_raw == Vec3{-0.046, 0, 0.3});
  CHECK(s[ControllerId::Right].position_raw == Vec3{0.08, 0, 0.3});
}

TEST_CASE("pipeline end to end on blob lists") {
  const StereoRig rig = StereoRig::rectified(0.04);
  TrackingPipeline pipe(rig, {});
  const Vec3 a{-0.06, 0.02, 0.3};
  const Vec3 b{0.07, -0.01, 0.32};
  const auto pa = project_pair(rig, a);
  const auto pb = project_pair(rig, b);
  const auto r = pipe.process(0, {pa.first, pb.first}, {pa.second, pb.second});
  CHECK(r.points.size() == 2);
  CHECK(distance(r.tracks[ControllerId::Left].position_raw, a) < 1e-9);
  CHECK(distance(r.tracks[ControllerId::Right].position_raw, b) < 1e-9);
}
