#include "dex/math/quat.hpp"

#include <cmath>
#include <numbers>

#include "dex/math/error.hpp"

namespace dex {

UnitQuat UnitQuat::from_components(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!std::isfinite(n) || n < 1e-300) {
    throw DomainError("quaternion components must be finite and non-zero");
  }
  const double s = w < 0.0 ? -1.0 / n : 1.0 / n;
  return UnitQuat(w * s, x * s, y * s, z * s);
}

UnitQuat UnitQuat::from_stored(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-9) {
    throw DomainError("stored quaternion is not unit length");
  }
  return w < 0.0 ? UnitQuat(-w, -x, -y, -z) : UnitQuat(w, x, y, z);
}

UnitQuat UnitQuat::from_rotation_vector(const Vec3& v) {
  const double angle = norm(v);
  const double half = 0.5 * angle;
  // sin(half)/angle, with its series near zero.
  const double k = angle < 1e-8 ? 0.5 - angle * angle / 48.0 : std::sin(half) / angle;
  return from_components(std::cos(half), k * v.x, k * v.y, k * v.z);
}

UnitQuat UnitQuat::from_matrix(const Mat3& m) {
  const double trace = m[0][0] + m[1][1] + m[2][2];
  if (trace > 0.0) {
    const double s = 2.0 * std::sqrt(trace + 1.0);
    return from_components(0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s,
                           (m[1][0] - m[0][1]) / s);
  }
  if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
    const double s = 2.0 * std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]);
    return from_components((m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s,
                           (m[0][2] + m[2][0]) / s);
  }
  if (m[1][1] > m[2][2]) {
    const double s = 2.0 * std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]);
    return from_components((m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s,
                           (m[1][2] + m[2][1]) / s);
  }
  const double s = 2.0 * std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]);
  return from_components((m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s,
                         (m[1][2] + m[2][1]) / s, 0.25 * s);
}

UnitQuat UnitQuat::inverse() const { return UnitQuat(w_, -x_, -y_, -z_); }

Vec3 UnitQuat::rotate(const Vec3& v) const {
  // v' = v + 2w (u x v) + 2 u x (u x v)
  const Vec3 u{x_, y_, z_};
  const Vec3 t = 2.0 * cross(u, v);
  return v + w_ * t + cross(u, t);
}

Vec3 UnitQuat::rotation_vector() const {
  const Vec3 u{x_, y_, z_};
  const double s = norm(u);
  if (s < 1e-12) {
    return 2.0 * u;
  }
  const double angle = 2.0 * std::atan2(s, w_);
  return u * (angle / s);
}

double UnitQuat::angle() const {
  return 2.0 * std::atan2(std::sqrt(x_ * x_ + y_ * y_ + z_ * z_), w_);
}

Mat3 UnitQuat::matrix() const {
  const double ww = w_ * w_, xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
  const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
  const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
  return {{{ww + xx - yy - zz, 2.0 * (xy - wz), 2.0 * (xz + wy)},
           {2.0 * (xy + wz), ww - xx + yy - zz, 2.0 * (yz - wx)},
           {2.0 * (xz - wy), 2.0 * (yz + wx), ww - xx - yy + zz}}};
}

UnitQuat operator*(const UnitQuat& a, const UnitQuat& b) {
  return UnitQuat::from_components(
      a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
      a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
      a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
      a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_);
}

UnitQuat quat_from_axis_angle(const Vec3& axis, double angle) {
  if (std::abs(norm(axis) - 1.0) > 1e-6) {
    throw DomainError("rotation axis must be a unit vector");
  }
  if (!std::isfinite(angle)) {
    throw DomainError("rotation angle must be finite");
  }
  const double s = std::sin(0.5 * angle);
  return UnitQuat::from_components(std::cos(0.5 * angle), axis.x * s, axis.y * s, axis.z * s);
}

UnitQuat quat_integrate(const UnitQuat& q, const Vec3& omega, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw DomainError("integration step must be positive");
  }
  return q * UnitQuat::from_rotation_vector(omega * dt);
}

UnitQuat shortest_arc(const Vec3& from, const Vec3& to) {
  const Vec3 a = normalized(from);
  const Vec3 b = normalized(to);
  const double c = dot(a, b);
  if (c < -1.0 + 1e-12) {
    // Antiparallel: any axis orthogonal to `a` works.
    Vec3 axis = cross(a, Vec3{1.0, 0.0, 0.0});
    if (norm(axis) < 1e-6) {
      axis = cross(a, Vec3{0.0, 1.0, 0.0});
    }
    return quat_from_axis_angle(normalized(axis), std::numbers::pi);
  }
  // Half-way quaternion: (1 + a.b, a x b), normalized.
  const Vec3 axis = cross(a, b);
  return UnitQuat::from_components(1.0 + c, axis.x, axis.y, axis.z);
}

double angular_distance(const UnitQuat& a, const UnitQuat& b) {
  // The product a^-1 a leaves rounding residue in its vector part.
  return a == b ? 0.0 : (a.inverse() * b).angle();
}

std::ostream& operator<<(std::ostream& os, const UnitQuat& q) {
  return os << "(w=" << q.w() << ", x=" << q.x() << ", y=" << q.y() << ", z=" << q.z() << ')';
}

}  // namespace dex
