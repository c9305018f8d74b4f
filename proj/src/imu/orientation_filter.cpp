#include "dex/imu/orientation_filter.hpp"

#include <algorithm>
#include <cmath>

namespace dex::imu {

namespace {

constexpr Vec3 kUp{0.0, 1.0, 0.0};

bool accel_usable(const Vec3& accel) {
  const double n = norm(accel);
  return n >= 0.5 * kGravity && n <= 1.5 * kGravity;
}

}  // namespace

Vec3 world_up_in_body(const UnitQuat& q) { return q.inverse().rotate(kUp); }

double tilt_angle(const UnitQuat& q) {
  return std::acos(std::clamp(dot(world_up_in_body(q), kUp), -1.0, 1.0));
}

double heading(const UnitQuat& q) {
  const UnitQuat yaw = q * shortest_arc(world_up_in_body(q), kUp).inverse();
  // yaw is a pure rotation about Y up to rounding.
  return 2.0 * std::atan2(yaw.y(), yaw.w());
}

UnitQuat from_heading_and_up(double heading_rad, const Vec3& up_in_body) {
  return quat_from_axis_angle(kUp, heading_rad) * shortest_arc(up_in_body, kUp);
}

OrientationFilter init_from_accel(const ImuSample& sample, double alpha) {
  const double n = norm(sample.accel);
  if (!(n > 0.5 * kGravity && n < 1.5 * kGravity)) {
    throw ImuInitError("IMU bootstrap needs a quasi-static accelerometer sample");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw DomainError("filter gain alpha must lie in [0, 1)");
  }
  return {from_heading_and_up(0.0, sample.accel / n), alpha, sample.t_us};
}

OrientationFilter filter_step(const OrientationFilter& filter, const ImuSample& sample) {
  if (sample.t_us <= filter.last_t_us) {
    throw ImuRejectedSample("IMU timestamp is not increasing");
  }
  const double dt = static_cast<double>(sample.t_us - filter.last_t_us) * 1e-6;
  if (dt > kMaxStep) {
    throw ImuRejectedSample("IMU sample gap exceeds the maximum integration step");
  }
  if (!is_finite(sample.gyro) || !is_finite(sample.accel) || norm(sample.gyro) >= kMaxGyroRate) {
    throw ImuRejectedSample("IMU sample outside the plausible range");
  }

  OrientationFilter next = filter;
  next.last_t_us = sample.t_us;
  next.q = quat_integrate(filter.q, sample.gyro, dt);
  if (filter.alpha == 0.0 || !accel_usable(sample.accel)) {
    return next;
  }

  const double psi = heading(next.q);
  const Vec3 up_est = world_up_in_body(next.q);
  const Vec3 up_meas = normalized(sample.accel);
  const Vec3 axis = cross(up_est, up_meas);
  const double s = norm(axis);
  if (s < 1e-15) {
    return next;
  }
  const double error = std::atan2(s, dot(up_est, up_meas));
  const Vec3 up_new = quat_from_axis_angle(axis / s, filter.alpha * error).rotate(up_est);
  next.q = from_heading_and_up(psi, up_new);
  return next;
}

}  // namespace dex::imu
