#pragma once

#include "dex/math/transform.hpp"
#include "dex/math/vec3.hpp"

namespace dex {

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

// Ray in the rig frame; direction is unit length.
struct Ray {
  Vec3 origin;
  Vec3 direction;
};

// Distortion-free pinhole camera. Camera frame: x right, y down, z along the optical axis.
// `pose_in_rig` maps camera coordinates into the rig (left camera) frame.
struct PinholeCamera {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  RigidTransform pose_in_rig;

  // Throws DomainError unless fx, fy > 0 and the principal point lies inside the image.
  void validate() const;
  bool contains(const Pixel& px) const {
    return px.u >= 0.0 && px.v >= 0.0 && px.u < width && px.v < height;
  }
};

// Projects a rig-frame point. Throws ProjectionError when z_cam <= 1e-6 m.
Pixel project(const PinholeCamera& cam, const Vec3& p_rig);

// Ray through the pixel centre of projection, expressed in the rig frame.
Ray back_project(const PinholeCamera& cam, const Pixel& px);

}  // namespace dex
