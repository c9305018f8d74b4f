#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dex/imu/orientation_filter.hpp"

using namespace dex;
using namespace dex::imu;
using std::numbers::pi;

namespace {

ImuSample at_rest(std::int64_t t_us, const UnitQuat& truth) {
  return {t_us, {}, truth.inverse().rotate({0, kGravity, 0})};
}

double up_error(const UnitQuat& estimate, const UnitQuat& truth) {
  const double c = dot(world_up_in_body(estimate), world_up_in_body(truth));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

TEST_CASE("init_from_accel") {
  SUBCASE("level") {
    const auto f = init_from_accel({0, {}, {0, 9.81, 0}});
    CHECK(f.q.angle() < 1e-15);
  }
  SUBCASE("axis swap gives a quarter roll toward x") {
    const auto f = init_from_accel({0, {}, {9.81, 0, 0}});
    CHECK(angular_distance(f.q, quat_from_axis_angle({0, 0, 1}, pi / 2)) < 1e-12);
    CHECK(std::abs(heading(f.q)) < 1e-12);
  }
  SUBCASE("30 degree tilt matches the closed form") {
    const auto f = init_from_accel({0, {}, {4.905, 8.496, 0}});
    CHECK(std::abs(tilt_angle(f.q) - std::atan2(4.905, 8.496)) < 1e-6);
    CHECK(tilt_angle(f.q) * 180 / pi == doctest::Approx(30.0).epsilon(1e-4));
    CHECK(std::abs(heading(f.q)) < 1e-12);
  }
  SUBCASE("non-static sample is refused") {
    CHECK_THROWS_AS(init_from_accel({0, {}, {0, 20.0, 0}}), ImuInitError);
    CHECK_THROWS_AS(init_from_accel({0, {}, {0, 1.0, 0}}), ImuInitError);
  }
}

TEST_CASE("filter_step fixed point") {
  OrientationFilter f{UnitQuat::identity(), 0.02, 0};
  for (int k = 1; k <= 100; ++k) {
    f = filter_step(f, {k * 10'000, {}, {0, 9.81, 0}});
  }
  CHECK(f.q == UnitQuat::identity());
}

TEST_CASE("alpha = 0 reduces to pure integration") {
  OrientationFilter f{UnitQuat::identity(), 0.0, 0};
  UnitQuat reference = UnitQuat::identity();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int k = 1; k <= 100; ++k) {
    const ImuSample s{k * 10'000, {pi / 2, 0, 0}, {noise(rng), 9.81 + noise(rng), noise(rng)}};
    f = filter_step(f, s);
    reference = quat_integrate(reference, s.gyro, 0.01);
    REQUIRE(f.q == reference);
  }
  CHECK(angular_distance(f.q, quat_from_axis_angle({1, 0, 0}, pi / 2)) < 1e-3);
}

TEST_CASE("accelerometer spikes outside [0.5 g, 1.5 g] give gyro-only updates") {
  const UnitQuat start = quat_from_axis_angle({0, 0, 1}, 0.4);
  const OrientationFilter on{start, 0.02, 0};
  const OrientationFilter off{start, 0.0, 0};
  const ImuSample spike{10'000, {0.1, -0.2, 0.05}, {0, 3 * 9.81, 0}};
  CHECK(filter_step(on, spike).q == filter_step(off, spike).q);
  const ImuSample freefall{10'000, {0.1, -0.2, 0.05}, {0, 0.2, 0}};
  CHECK(filter_step(on, freefall).q == filter_step(off, freefall).q);
}

TEST_CASE("property: tilt correction leaves heading untouched") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> alpha(0.001, 0.5);
  for (int i = 0; i < 2000; ++i) {
    const UnitQuat q = UnitQuat::from_components(n(rng), n(rng), n(rng), n(rng));
    const Vec3 gyro{n(rng), n(rng), n(rng)};
    const Vec3 accel = normalized(Vec3{n(rng), n(rng), n(rng)}) * 9.81;
    const OrientationFilter f{q, alpha(rng), 0};
    const auto next = filter_step(f, {10'000, gyro, accel});
    const UnitQuat propagated = quat_integrate(q, gyro, 0.01);
    if (tilt_angle(propagated) > pi - 1e-3) {
      continue;  // heading undefined when upside down
    }
    const double dpsi = std::remainder(heading(next.q) - heading(propagated), 2 * pi);
    CHECK(std::abs(dpsi) < 1e-9);
    // And the up vector moved toward the measurement.
    const Vec3 meas = normalized(accel);
    CHECK(dot(world_up_in_body(next.q), meas) >= dot(world_up_in_body(propagated), meas) - 1e-12);
  }
}

TEST_CASE("static 30 degree tilt with noisy sensors converges below 1 degree") {
  const UnitQuat truth = quat_from_axis_angle({0, 0, 1}, pi / 6);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> accel_noise(0.0, 0.05);
  const Vec3 bias{0.01, 0.01, 0.01};
  OrientationFilter f{UnitQuat::identity(), 0.02, 0};
  double worst_after_5s = 0.0;
  for (int k = 1; k <= 2000; ++k) {
    ImuSample s = at_rest(k * 10'000, truth);
    s.gyro = bias;
    s.accel += Vec3{accel_noise(rng), accel_noise(rng), accel_noise(rng)};
    f = filter_step(f, s);
    if (k > 500) {
      worst_after_5s = std::max(worst_after_5s, up_error(f.q, truth));
    }
  }
  CHECK(worst_after_5s * 180 / pi < 1.0);
}

TEST_CASE("quaternion stays unit over a million steps") {
  OrientationFilter f{UnitQuat::identity(), 0.02, 0};
  for (std::int64_t k = 1; k <= 1'000'000; ++k) {
    f = filter_step(f, {k * 10'000, {0.4, -1.1, 0.7}, {0.3, 9.7, -0.2}});
  }
  const UnitQuat q = f.q;
  CHECK(std::abs(std::sqrt(q.w() * q.w() + q.x() * q.x() + q.y() * q.y() + q.z() * q.z()) - 1.0) < 1e-9);
}

TEST_CASE("sample rejection") {
  const OrientationFilter f{UnitQuat::identity(), 0.02, 50'000};
  CHECK_THROWS_AS(filter_step(f, {50'000, {}, {0, 9.81, 0}}), ImuRejectedSample);
  CHECK_THROWS_AS(filter_step(f, {40'000, {}, {0, 9.81, 0}}), ImuRejectedSample);
  CHECK_THROWS_AS(filter_step(f, {200'000, {}, {0, 9.81, 0}}), ImuRejectedSample);
  CHECK_THROWS_AS(filter_step(f, {60'000, {40, 0, 0}, {0, 9.81, 0}}), ImuRejectedSample);
}
