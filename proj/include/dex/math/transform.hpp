#pragma once

#include <ostream>

#include "dex/math/quat.hpp"
#include "dex/math/vec3.hpp"

namespace dex {

// Rigid motion x -> rotation * x + translation. `a * b` applies b first.
struct RigidTransform {
  UnitQuat rotation;
  Vec3 translation;

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {UnitQuat::identity(), t}; }

  Vec3 apply(const Vec3& point) const { return rotation.rotate(point) + translation; }
  Vec3 apply_direction(const Vec3& dir) const { return rotation.rotate(dir); }

  RigidTransform inverse() const {
    const UnitQuat inv = rotation.inverse();
    return {inv, -inv.rotate(translation)};
  }

  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    return {a.rotation * b.rotation, a.apply(b.translation)};
  }
  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const RigidTransform& t) {
  return os << "{R=" << t.rotation << ", t=" << t.translation << '}';
}

}  // namespace dex
