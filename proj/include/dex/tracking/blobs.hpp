#pragma once

#include <cstdint>
#include <vector>

namespace dex::tracking {

// 8-bit grayscale IR image, row-major.
struct IrFrame {
  std::int64_t t_us = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int col, int row) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

struct Blob {
  double u = 0.0;  // intensity-weighted centroid, column
  double v = 0.0;  // intensity-weighted centroid, row
  int area = 0;
  int peak = 0;
};

struct BlobDetectorConfig {
  int threshold = 200;
  int min_area = 3;
};

// Binary threshold (pixel >= threshold), 8-connected labelling, intensity-weighted
// centroids. Components smaller than min_area are discarded. Sorted by descending area.
std::vector<Blob> detect_blobs(const IrFrame& frame, const BlobDetectorConfig& config = {});

}  // namespace dex::tracking
