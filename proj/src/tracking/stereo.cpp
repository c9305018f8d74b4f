#include "dex/tracking/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace dex::tracking {

namespace {

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        r[i][j] += a[i][k] * b[k][j];
      }
    }
  }
  return r;
}

Mat3 transpose(const Mat3& a) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r[i][j] = a[j][i];
    }
  }
  return r;
}

Mat3 inverse_intrinsics(const PinholeCamera& cam) {
  return {{{1.0 / cam.fx, 0.0, -cam.cx / cam.fx}, {0.0, 1.0 / cam.fy, -cam.cy / cam.fy}, {0.0, 0.0, 1.0}}};
}

// Fundamental matrix with x_right^T F x_left = 0.
Mat3 fundamental(const StereoRig& rig) {
  // Left-camera coordinates to right-camera coordinates: X_r = R X_l + t.
  const RigidTransform left_to_right = rig.right.pose_in_rig.inverse() * rig.left.pose_in_rig;
  const Vec3 t = left_to_right.translation;
  const Mat3 tx{{{0.0, -t.z, t.y}, {t.z, 0.0, -t.x}, {-t.y, t.x, 0.0}}};
  const Mat3 essential = multiply(tx, left_to_right.rotation.matrix());
  return multiply(transpose(inverse_intrinsics(rig.right)),
                  multiply(essential, inverse_intrinsics(rig.left)));
}

struct RayHit {
  Triangulation tri;
  double s_left = 0.0;
  double s_right = 0.0;
};

RayHit intersect(const BlobPair& pair, const StereoRig& rig, const StereoConfig& config) {
  const Ray a = back_project(rig.left, {pair.first.u, pair.first.v});
  const Ray b = back_project(rig.right, {pair.second.u, pair.second.v});
  const Vec3 w0 = a.origin - b.origin;
  const double cos_ab = dot(a.direction, b.direction);
  const double sin_ab = norm(cross(a.direction, b.direction));
  const double min_sin = std::sin(config.min_ray_angle_deg * std::numbers::pi / 180.0);
  if (sin_ab < min_sin) {
    throw DegenerateGeometryError("stereo rays are nearly parallel");
  }
  const double denom = 1.0 - cos_ab * cos_ab;
  const double d = dot(a.direction, w0);
  const double e = dot(b.direction, w0);
  const double s = (cos_ab * e - d) / denom;
  const double t = (e - cos_ab * d) / denom;
  const Vec3 pa = a.origin + s * a.direction;
  const Vec3 pb = b.origin + t * b.direction;
  return {{0.5 * (pa + pb), distance(pa, pb)}, s, t};
}

struct Candidate {
  int left = 0;
  int right = 0;
  double epipolar = 0.0;
};

struct Search {
  const std::vector<Blob>& left;
  const std::vector<Blob>& right;
  const std::vector<Candidate>& candidates;
  std::vector<int> chosen;
  std::vector<int> best;
  std::vector<bool> right_used;
  int best_count = -1;
  int best_inversions = 0;
  double best_cost = 0.0;

  void evaluate() {
    int inversions = 0;
    double cost = 0.0;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const Candidate& ci = candidates[chosen[i]];
      cost += ci.epipolar;
      for (std::size_t j = i + 1; j < chosen.size(); ++j) {
        const Candidate& cj = candidates[chosen[j]];
        const double dl = left[ci.left].u - left[cj.left].u;
        const double dr = right[ci.right].u - right[cj.right].u;
        if (dl * dr < 0.0) {
          ++inversions;
        }
      }
    }
    const int count = static_cast<int>(chosen.size());
    const bool better = count > best_count ||
                        (count == best_count && (inversions < best_inversions ||
                                                 (inversions == best_inversions && cost < best_cost)));
    if (better) {
      best = chosen;
      best_count = count;
      best_inversions = inversions;
      best_cost = cost;
    }
  }

  // Candidates are grouped by ascending left index; `next` walks them in order.
  void run(std::size_t next) {
    evaluate();
    for (std::size_t k = next; k < candidates.size(); ++k) {
      const Candidate& c = candidates[k];
      if (right_used[c.right]) {
        continue;
      }
      right_used[c.right] = true;
      chosen.push_back(static_cast<int>(k));
      // Skip remaining candidates of the same left blob.
      std::size_t skip = k + 1;
      while (skip < candidates.size() && candidates[skip].left == c.left) {
        ++skip;
      }
      run(skip);
      chosen.pop_back();
      right_used[c.right] = false;
    }
  }
};

// Bounds the exhaustive matching search.
constexpr std::size_t kMaxBlobsPerImage = 6;

}  // namespace

StereoRig StereoRig::rectified(double baseline_m, double f_px, double cx, double cy, int width,
                               int height) {
  StereoRig rig;
  rig.left = PinholeCamera{f_px, f_px, cx, cy, width, height, RigidTransform::identity()};
  rig.right = rig.left;
  rig.right.pose_in_rig = RigidTransform::from_translation({baseline_m, 0.0, 0.0});
  return rig;
}

double epipolar_distance(const StereoRig& rig, const Pixel& left, const Pixel& right) {
  const Mat3 f = fundamental(rig);
  const double l0 = f[0][0] * left.u + f[0][1] * left.v + f[0][2];
  const double l1 = f[1][0] * left.u + f[1][1] * left.v + f[1][2];
  const double l2 = f[2][0] * left.u + f[2][1] * left.v + f[2][2];
  const double scale = std::hypot(l0, l1);
  if (scale < 1e-300) {
    return 0.0;
  }
  return std::abs(l0 * right.u + l1 * right.v + l2) / scale;
}

Triangulation triangulate_midpoint(const BlobPair& pair, const StereoRig& rig,
                                   const StereoConfig& config) {
  const RayHit hit = intersect(pair, rig, config);
  if (hit.tri.gap > config.gap_reject_m) {
    throw RejectedObservationError("stereo rays miss each other by more than the gap limit");
  }
  return hit.tri;
}

StereoMatch correspond_stereo(const std::vector<Blob>& left, const std::vector<Blob>& right,
                              const StereoRig& rig, const StereoConfig& config) {
  const std::size_t nl = std::min(left.size(), kMaxBlobsPerImage);
  const std::size_t nr = std::min(right.size(), kMaxBlobsPerImage);

  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < nl; ++i) {
    for (std::size_t j = 0; j < nr; ++j) {
      const double epi = epipolar_distance(rig, {left[i].u, left[i].v}, {right[j].u, right[j].v});
      if (epi > config.epipolar_tol_px) {
        continue;
      }
      std::optional<RayHit> hit;
      try {
        hit = intersect({left[i], right[j]}, rig, config);
      } catch (const DegenerateGeometryError&) {
        continue;
      }
      const double depth = hit->tri.point.z;
      if (hit->s_left <= 0.0 || hit->s_right <= 0.0 || depth < config.min_depth_m ||
          depth > config.max_depth_m) {
        continue;
      }
      candidates.push_back({static_cast<int>(i), static_cast<int>(j), epi});
    }
  }

  StereoMatch match;
  match.ambiguous = static_cast<int>(candidates.size()) > config.max_controllers;

  Search search{left, right, candidates, {}, {}, std::vector<bool>(nr, false)};
  search.run(0);
  for (int k : search.best) {
    const Candidate& c = candidates[k];
    match.pairs.emplace_back(left[c.left], right[c.right]);
  }
  return match;
}

}  // namespace dex::tracking
