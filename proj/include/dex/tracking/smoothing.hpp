#pragma once

#include <cstddef>
#include <deque>

#include "dex/math/vec3.hpp"

namespace dex::tracking {

// Arithmetic mean over the most recent `window` samples. Before the window fills,
// averages whatever has arrived.
class MovingAverageFilter {
 public:
  explicit MovingAverageFilter(std::size_t window = 5);

  // Pushes a sample (evicting the oldest when full) and returns the new mean.
  Vec3 push(const Vec3& sample);
  Vec3 mean() const;
  void reset() { buffer_.clear(); }

  std::size_t window() const { return window_; }
  std::size_t size() const { return buffer_.size(); }
  const std::deque<Vec3>& samples() const { return buffer_; }

 private:
  std::size_t window_;
  std::deque<Vec3> buffer_;
};

}  // namespace dex::tracking
