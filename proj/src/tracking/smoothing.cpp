#include "dex/tracking/smoothing.hpp"

#include <algorithm>

#include "dex/math/error.hpp"

namespace dex::tracking {

MovingAverageFilter::MovingAverageFilter(std::size_t window) : window_(window) {
  if (window_ == 0) {
    throw DomainError("moving average window must hold at least one sample");
  }
}

Vec3 MovingAverageFilter::push(const Vec3& sample) {
  if (buffer_.size() == window_) {
    buffer_.pop_front();
  }
  buffer_.push_back(sample);
  return mean();
}

Vec3 MovingAverageFilter::mean() const {
  if (buffer_.empty()) {
    return {};
  }
  Vec3 sum;
  Vec3 lo = buffer_.front();
  Vec3 hi = buffer_.front();
  for (const Vec3& s : buffer_) {
    sum += s;
    lo = {std::min(lo.x, s.x), std::min(lo.y, s.y), std::min(lo.z, s.z)};
    hi = {std::max(hi.x, s.x), std::max(hi.y, s.y), std::max(hi.z, s.z)};
  }
  const Vec3 m = sum / static_cast<double>(buffer_.size());
  // The mean is clamped to the per-axis sample envelope.
  return {std::clamp(m.x, lo.x, hi.x), std::clamp(m.y, lo.y, hi.y), std::clamp(m.z, lo.z, hi.z)};
}

}  // namespace dex::tracking
