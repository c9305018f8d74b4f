#pragma once

#include <algorithm>

#include "dex/math/transform.hpp"

namespace dex {

// Desired world pose of an instrument tip plus a jaw command (0 open, 1 closed).
struct TipTarget {
  int instrument_id = 0;
  RigidTransform pose;
  double jaw_command = 0.0;

  void clamp_jaw() { jaw_command = std::clamp(jaw_command, 0.0, 1.0); }
  friend bool operator==(const TipTarget&, const TipTarget&) = default;
};

}  // namespace dex
