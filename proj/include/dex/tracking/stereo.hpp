#pragma once

#include <utility>
#include <vector>

#include "dex/math/camera.hpp"
#include "dex/math/error.hpp"
#include "dex/tracking/blobs.hpp"

namespace dex::tracking {

// Two calibrated cameras; the left camera defines the rig (tracker) frame, so its
// pose_in_rig is the identity.
struct StereoRig {
  PinholeCamera left;
  PinholeCamera right;

  static StereoRig rectified(double baseline_m, double f_px = 500.0, double cx = 320.0,
                             double cy = 240.0, int width = 640, int height = 480);
};

struct StereoConfig {
  double epipolar_tol_px = 2.0;
  double gap_reject_m = 0.005;
  double min_ray_angle_deg = 0.05;
  // Plausible working volume along the left optical axis.
  double min_depth_m = 0.05;
  double max_depth_m = 2.0;
  int max_controllers = 2;
};

using BlobPair = std::pair<Blob, Blob>;

struct StereoMatch {
  std::vector<BlobPair> pairs;
  bool ambiguous = false;  // more consistent candidate pairs than controllers
};

struct Triangulation {
  Vec3 point;  // tracker frame, metres
  double gap = 0.0;
};

// Rays closer to parallel than min_ray_angle_deg.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

// Common perpendicular longer than gap_reject_m.
class RejectedObservationError : public Error {
 public:
  using Error::Error;
};

// Distance in right-image pixels from `right` to the epipolar line of `left`.
double epipolar_distance(const StereoRig& rig, const Pixel& left, const Pixel& right);

// Midpoint of the common perpendicular between the two back-projected rays.
Triangulation triangulate_midpoint(const BlobPair& pair, const StereoRig& rig,
                                   const StereoConfig& config = {});

// One-to-one left/right association by epipolar consistency and positive depth.
// Among all matchings, prefers the most pairs, then the fewest left/right ordering
// inversions, then the smallest total epipolar distance.
StereoMatch correspond_stereo(const std::vector<Blob>& left, const std::vector<Blob>& right,
                              const StereoRig& rig, const StereoConfig& config = {});

}  // namespace dex::tracking
