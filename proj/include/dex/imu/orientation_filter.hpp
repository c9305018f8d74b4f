#pragma once

#include <cstdint>

#include "dex/math/error.hpp"
#include "dex/math/quat.hpp"
#include "dex/math/vec3.hpp"

namespace dex::imu {

inline constexpr double kGravity = 9.81;
inline constexpr double kMaxGyroRate = 35.0;  // rad/s
inline constexpr double kMaxStep = 0.1;       // s

struct ImuSample {
  std::int64_t t_us = 0;
  Vec3 gyro;   // rad/s, body frame
  Vec3 accel;  // m/s^2 specific force; reads (0, +g, 0) when level and at rest
};

// Complementary orientation filter state. q maps body to world (Y up).
struct OrientationFilter {
  UnitQuat q;
  double alpha = 0.02;  // fraction of the tilt error removed per accepted sample
  std::int64_t last_t_us = 0;
};

// Bootstrap failed (sample not quasi-static).
class ImuInitError : public Error {
 public:
  using Error::Error;
};

// Sample refused: non-monotonic time, implausible rate, or a gap longer than kMaxStep.
class ImuRejectedSample : public Error {
 public:
  using Error::Error;
};

// Level-and-heading split: q = yaw(heading about world Y) * tilt(body up -> world up).
// The tilt factor is the minimal rotation taking world-up-seen-in-body onto Y.
double heading(const UnitQuat& q);
Vec3 world_up_in_body(const UnitQuat& q);
// Angle between the body's up axis and world up.
double tilt_angle(const UnitQuat& q);
UnitQuat from_heading_and_up(double heading_rad, const Vec3& up_in_body);

// Minimal rotation aligning body up with the measured specific force; heading 0.
// Requires 0.5 g < |accel| < 1.5 g.
OrientationFilter init_from_accel(const ImuSample& sample, double alpha = 0.02);

// Gyro propagation, then (if alpha > 0 and 0.5 g <= |accel| <= 1.5 g) a tilt-only
// correction that moves the estimated up vector a fraction alpha toward the measured
// one. Heading is left exactly as propagated.
OrientationFilter filter_step(const OrientationFilter& filter, const ImuSample& sample);

}  // namespace dex::imu
