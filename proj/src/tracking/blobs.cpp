#include "dex/tracking/blobs.hpp"

#include <algorithm>
#include <utility>

#include "dex/math/error.hpp"

namespace dex::tracking {

std::vector<Blob> detect_blobs(const IrFrame& frame, const BlobDetectorConfig& config) {
  if (config.threshold <= 0 || config.threshold >= 255) {
    throw DomainError("blob threshold must lie in (0, 255)");
  }
  if (frame.pixels.size() != static_cast<std::size_t>(frame.width) * frame.height) {
    throw DomainError("frame pixel count does not match its dimensions");
  }

  std::vector<std::uint8_t> visited(frame.pixels.size(), 0);
  std::vector<std::pair<int, int>> stack;
  std::vector<Blob> blobs;

  for (int row = 0; row < frame.height; ++row) {
    for (int col = 0; col < frame.width; ++col) {
      const std::size_t seed = static_cast<std::size_t>(row) * frame.width + col;
      if (visited[seed] || frame.pixels[seed] < config.threshold) {
        continue;
      }
      double sum_i = 0.0, sum_u = 0.0, sum_v = 0.0;
      int area = 0, peak = 0;
      visited[seed] = 1;
      stack.assign(1, {col, row});
      while (!stack.empty()) {
        const auto [c, r] = stack.back();
        stack.pop_back();
        const int intensity = frame.at(c, r);
        sum_i += intensity;
        sum_u += intensity * static_cast<double>(c);
        sum_v += intensity * static_cast<double>(r);
        ++area;
        peak = std::max(peak, intensity);
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int nc = c + dc, nr = r + dr;
            if (nc < 0 || nr < 0 || nc >= frame.width || nr >= frame.height) {
              continue;
            }
            const std::size_t idx = static_cast<std::size_t>(nr) * frame.width + nc;
            if (!visited[idx] && frame.pixels[idx] >= config.threshold) {
              visited[idx] = 1;
              stack.emplace_back(nc, nr);
            }
          }
        }
      }
      if (area >= config.min_area) {
        blobs.push_back({sum_u / sum_i, sum_v / sum_i, area, peak});
      }
    }
  }

  std::stable_sort(blobs.begin(), blobs.end(),
                   [](const Blob& a, const Blob& b) { return a.area > b.area; });
  return blobs;
}

}  // namespace dex::tracking
