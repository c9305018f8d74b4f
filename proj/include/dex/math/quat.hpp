#pragma once

#include <array>
#include <ostream>

#include "dex/math/vec3.hpp"

namespace dex {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Unit quaternion (w, x, y, z), Hamilton convention, stored with w >= 0.
// Every producer renormalizes, so |norm - 1| stays below 1e-9.
class UnitQuat {
 public:
  constexpr UnitQuat() = default;

  // Normalizes (w, x, y, z). Throws DomainError for a zero or non-finite input.
  static UnitQuat from_components(double w, double x, double y, double z);
  // Keeps already-unit components verbatim (after the w >= 0 sign choice) so that
  // serialized quaternions read back bit for bit. Throws DomainError if
  // |norm - 1| > 1e-9.
  static UnitQuat from_stored(double w, double x, double y, double z);
  static constexpr UnitQuat identity() { return UnitQuat{}; }
  // Exponential map: rotation of |v| radians about v / |v|.
  static UnitQuat from_rotation_vector(const Vec3& v);
  static UnitQuat from_matrix(const Mat3& m);

  constexpr double w() const { return w_; }
  constexpr double x() const { return x_; }
  constexpr double y() const { return y_; }
  constexpr double z() const { return z_; }

  UnitQuat inverse() const;
  Vec3 rotate(const Vec3& v) const;
  // Logarithmic map; the returned angle lies in [0, pi].
  Vec3 rotation_vector() const;
  double angle() const;
  Mat3 matrix() const;

  friend UnitQuat operator*(const UnitQuat& a, const UnitQuat& b);
  friend bool operator==(const UnitQuat&, const UnitQuat&) = default;

 private:
  constexpr UnitQuat(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {}

  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

// Rotation of `angle` radians about the unit vector `axis` (|axis| = 1 +- 1e-6).
UnitQuat quat_from_axis_angle(const Vec3& axis, double angle);

// Advances q by the body-frame rotation vector omega * dt (exact for constant omega).
UnitQuat quat_integrate(const UnitQuat& q, const Vec3& omega, double dt);

// Minimal rotation taking direction `from` onto direction `to`.
UnitQuat shortest_arc(const Vec3& from, const Vec3& to);

// Angle of the relative rotation a^-1 b, in [0, pi].
double angular_distance(const UnitQuat& a, const UnitQuat& b);

std::ostream& operator<<(std::ostream& os, const UnitQuat& q);

}  // namespace dex
