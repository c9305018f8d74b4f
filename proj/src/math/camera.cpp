#include "dex/math/camera.hpp"

#include "dex/math/error.hpp"

namespace dex {

void PinholeCamera::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) {
    throw DomainError("camera focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw DomainError("camera image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw DomainError("camera principal point must lie inside the image");
  }
}

Pixel project(const PinholeCamera& cam, const Vec3& p_rig) {
  const Vec3 p = cam.pose_in_rig.inverse().apply(p_rig);
  if (!(p.z > 1e-6)) {
    throw ProjectionError("point is behind the camera");
  }
  return {cam.fx * p.x / p.z + cam.cx, cam.fy * p.y / p.z + cam.cy};
}

Ray back_project(const PinholeCamera& cam, const Pixel& px) {
  const Vec3 d_cam{(px.u - cam.cx) / cam.fx, (px.v - cam.cy) / cam.fy, 1.0};
  return {cam.pose_in_rig.translation, normalized(cam.pose_in_rig.apply_direction(d_cam))};
}

}  // namespace dex
