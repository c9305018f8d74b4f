#include "dex/tracking/tracker.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

namespace dex::tracking {

std::string_view to_string(TrackStatus status) {
  switch (status) {
    case TrackStatus::Tracked:
      return "tracked";
    case TrackStatus::Coasting:
      return "coasting";
    case TrackStatus::Lost:
      return "lost";
  }
  return "lost";
}

TrackSet::TrackSet(const TrackerConfig& config) {
  for (ControllerId id : {ControllerId::Left, ControllerId::Right}) {
    MarkerTrack& t = tracks[index(id)];
    t.id = id;
    t.filter = MovingAverageFilter(config.window);
  }
}

namespace {

Vec3 predict(const MarkerTrack& t, std::int64_t t_us) {
  const double dt = static_cast<double>(t_us - t.last_update_us) * 1e-6;
  return t.last_measured + t.velocity * dt;
}

void measure(MarkerTrack& t, const Vec3& p, std::int64_t t_us, bool continuing) {
  const double dt = static_cast<double>(t_us - t.last_update_us) * 1e-6;
  t.velocity = (continuing && dt > 0.0) ? (p - t.last_measured) / dt : Vec3{};
  if (!continuing) {
    t.filter.reset();
  }
  t.last_measured = p;
  t.position_raw = p;
  t.position_smoothed = t.filter.push(p);
  t.last_update_us = t_us;
  t.status = TrackStatus::Tracked;
  t.ever_seen = true;
}

}  // namespace

TrackSet track_markers(const TrackSet& previous, std::span<const Vec3> observations,
                       std::int64_t t_us, const TrackerConfig& config) {
  TrackSet next = previous;
  next.ambiguous = false;
  const std::size_t n = observations.size();
  std::vector<bool> used(n, false);

  // Gate the active tracks.
  std::array<std::optional<Vec3>, 2> prediction;
  std::array<std::vector<std::size_t>, 2> gated;
  std::vector<int> gate_hits(n, 0);
  for (int k = 0; k < 2; ++k) {
    const MarkerTrack& t = next.tracks[k];
    if (!t.active()) {
      continue;
    }
    prediction[k] = predict(t, t_us);
    for (std::size_t i = 0; i < n; ++i) {
      if (distance(observations[i], *prediction[k]) <= config.gate_m) {
        gated[k].push_back(i);
        ++gate_hits[i];
      }
    }
    if (gated[k].size() > 1) {
      next.ambiguous = true;
    }
  }
  if (std::any_of(gate_hits.begin(), gate_hits.end(), [](int h) { return h > 1; })) {
    next.ambiguous = true;
  }

  // Joint assignment: most matches, then smallest summed squared distance.
  std::array<std::optional<std::size_t>, 2> assigned;
  int best_count = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  auto options = [&](int k) {
    std::vector<std::optional<std::size_t>> opts{std::nullopt};
    for (std::size_t i : gated[k]) {
      opts.emplace_back(i);
    }
    return opts;
  };
  for (const auto& a0 : options(0)) {
    for (const auto& a1 : options(1)) {
      if (a0 && a1 && *a0 == *a1) {
        continue;
      }
      const int count = (a0 ? 1 : 0) + (a1 ? 1 : 0);
      double cost = 0.0;
      if (a0) {
        const Vec3 d = observations[*a0] - *prediction[0];
        cost += dot(d, d);
      }
      if (a1) {
        const Vec3 d = observations[*a1] - *prediction[1];
        cost += dot(d, d);
      }
      if (count > best_count || (count == best_count && cost < best_cost)) {
        best_count = count;
        best_cost = cost;
        assigned = {a0, a1};
      }
    }
  }

  for (int k = 0; k < 2; ++k) {
    MarkerTrack& t = next.tracks[k];
    if (!t.active()) {
      continue;
    }
    if (assigned[k]) {
      used[*assigned[k]] = true;
      measure(t, observations[*assigned[k]], t_us, true);
    } else if (t_us - t.last_update_us > config.coast_limit_us) {
      t.status = TrackStatus::Lost;
      t.velocity = {};
      t.filter.reset();
    } else {
      t.status = TrackStatus::Coasting;
      t.position_raw = *prediction[k];
      t.position_smoothed = t.filter.push(t.position_raw);
    }
  }

  // Acquire lost tracks from the leftover observations.
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) {
      free.push_back(i);
    }
  }
  MarkerTrack& left = next[ControllerId::Left];
  MarkerTrack& right = next[ControllerId::Right];
  if (!left.active() && !right.active()) {
    if (free.size() >= 2) {
      if (free.size() > 2) {
        next.ambiguous = true;
      }
      // Two widest-apart candidates in x: first and last after sorting.
      std::sort(free.begin(), free.end(), [&](std::size_t a, std::size_t b) {
        return observations[a].x < observations[b].x;
      });
      measure(left, observations[free.front()], t_us, false);
      measure(right, observations[free.back()], t_us, false);
    } else if (free.size() == 1) {
      const Vec3& p = observations[free.front()];
      measure(p.x < config.split_x_m ? left : right, p, t_us, false);
    }
  } else if (!free.empty() && (!left.active() || !right.active())) {
    MarkerTrack& lost = left.active() ? right : left;
    const MarkerTrack& live = left.active() ? left : right;
    // Prefer the leftover on the lost track's side of the live one.
    std::size_t pick = free.front();
    for (std::size_t i : free) {
      const bool on_side = lost.id == ControllerId::Left ? observations[i].x < live.position_raw.x
                                                        : observations[i].x > live.position_raw.x;
      if (on_side) {
        pick = i;
        break;
      }
    }
    measure(lost, observations[pick], t_us, false);
  }
  return next;
}

}  // namespace dex::tracking
