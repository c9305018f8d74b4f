#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "dex/math/quat.hpp"
#include "dex/math/vec3.hpp"
#include "dex/teleop/tip_target.hpp"

namespace dex::task {

// Piecewise-linear tip motions and jaw steps for both instruments, in seconds
// from the start of a trial. Lines:
//   start <L|R> x y z
//   move <L|R> t0 t1 x y z
//   jaw <L|R> t command
struct ScriptMove {
  std::int64_t t0_us = 0;
  std::int64_t t1_us = 0;
  Vec3 to;
};

struct ScriptJaw {
  std::int64_t t_us = 0;
  double command = 0.0;
};

struct TaskScript {
  std::array<Vec3, 2> start;
  std::array<std::vector<ScriptMove>, 2> moves;  // ordered, non-overlapping
  std::array<std::vector<ScriptJaw>, 2> jaw;     // ordered

  Vec3 position_at(int instrument, std::int64_t t_us) const;
  double jaw_at(int instrument, std::int64_t t_us) const;
  std::int64_t end_us() const;

  // Targets at t_us with the given fixed tip orientations.
  std::array<TipTarget, 2> targets_at(std::int64_t t_us,
                                      const std::array<UnitQuat, 2>& orientation) const;
};

// Throws ParseError naming the offending line.
TaskScript parse_task_script(std::istream& in);
TaskScript load_task_script(const std::string& path);

}  // namespace dex::task
