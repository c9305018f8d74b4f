#include "dex/tracking/pipeline.hpp"

#include <utility>

namespace dex::tracking {

TrackingPipeline::TrackingPipeline(StereoRig rig, TrackingConfig config)
    : rig_(std::move(rig)), config_(config), tracks_(config.tracker) {
  rig_.left.validate();
  rig_.right.validate();
}

FrameResult TrackingPipeline::process(std::int64_t t_us, const std::vector<Blob>& left,
                                      const std::vector<Blob>& right) {
  FrameResult result;
  result.t_us = t_us;
  const StereoMatch match = correspond_stereo(left, right, rig_, config_.stereo);
  std::vector<Vec3> points;
  for (const BlobPair& pair : match.pairs) {
    try {
      const Triangulation tri = triangulate_midpoint(pair, rig_, config_.stereo);
      result.points.push_back(tri);
      points.push_back(tri.point);
    } catch (const DegenerateGeometryError&) {
      ++result.rejected;
    } catch (const RejectedObservationError&) {
      ++result.rejected;
    }
  }
  tracks_ = track_markers(tracks_, points, t_us, config_.tracker);
  result.ambiguous = match.ambiguous || tracks_.ambiguous;
  result.tracks = tracks_;
  return result;
}

FrameResult TrackingPipeline::process(const IrFrame& left, const IrFrame& right) {
  return process(left.t_us, detect_blobs(left, config_.blobs), detect_blobs(right, config_.blobs));
}

}  // namespace dex::tracking
