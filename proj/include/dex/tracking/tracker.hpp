#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "dex/math/controller.hpp"
#include "dex/math/vec3.hpp"
#include "dex/tracking/smoothing.hpp"

namespace dex::tracking {

enum class TrackStatus { Tracked, Coasting, Lost };

std::string_view to_string(TrackStatus status);

struct TrackerConfig {
  double gate_m = 0.030;
  std::int64_t coast_limit_us = 200'000;
  std::size_t window = 5;
  // Lateral split used to label a lone marker at start-up (tracker-frame x).
  double split_x_m = 0.02;
};

// One LED per controller, so one track per controller.
struct MarkerTrack {
  ControllerId id = ControllerId::Left;
  TrackStatus status = TrackStatus::Lost;
  Vec3 position_raw;       // last measurement, or the coasting prediction
  Vec3 position_smoothed;  // moving average of position_raw
  Vec3 last_measured;
  Vec3 velocity;  // m/s, from consecutive measurements
  std::int64_t last_update_us = 0;
  bool ever_seen = false;
  MovingAverageFilter filter{5};

  bool active() const { return status != TrackStatus::Lost; }
};

struct TrackSet {
  std::array<MarkerTrack, 2> tracks;
  bool ambiguous = false;  // set on the frame that produced this state

  explicit TrackSet(const TrackerConfig& config = {});
  const MarkerTrack& operator[](ControllerId id) const { return tracks[index(id)]; }
  MarkerTrack& operator[](ControllerId id) { return tracks[index(id)]; }
};

// Advances both tracks with one frame of triangulated points (tracker frame).
// Gated nearest-neighbour association; unmatched tracks coast on constant velocity
// for at most coast_limit_us, then become Lost. Labels are assigned on acquisition
// by x-ordering: the marker with the smaller x is the Left controller.
TrackSet track_markers(const TrackSet& previous, std::span<const Vec3> observations,
                       std::int64_t t_us, const TrackerConfig& config = {});

}  // namespace dex::tracking
