#pragma once

#include <cstdint>
#include <vector>

#include "dex/tracking/blobs.hpp"
#include "dex/tracking/stereo.hpp"
#include "dex/tracking/tracker.hpp"

namespace dex::tracking {

struct TrackingConfig {
  BlobDetectorConfig blobs;
  StereoConfig stereo;
  TrackerConfig tracker;
};

struct FrameResult {
  std::int64_t t_us = 0;
  std::vector<Triangulation> points;
  int rejected = 0;        // pairs dropped by the gap or parallel-ray checks
  bool ambiguous = false;  // stereo or track association was ambiguous
  TrackSet tracks;
};

// Per-frame chain: blobs -> stereo pairs -> midpoint triangulation -> tracks.
class TrackingPipeline {
 public:
  TrackingPipeline(StereoRig rig, TrackingConfig config);

  FrameResult process(std::int64_t t_us, const std::vector<Blob>& left,
                      const std::vector<Blob>& right);
  FrameResult process(const IrFrame& left, const IrFrame& right);

  const TrackSet& tracks() const { return tracks_; }
  const StereoRig& rig() const { return rig_; }
  const TrackingConfig& config() const { return config_; }

 private:
  StereoRig rig_;
  TrackingConfig config_;
  TrackSet tracks_;
};

}  // namespace dex::tracking
