#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "dex/engine/engine.hpp"

namespace dex::synth {

// How well the synthetic user performs in one phase. Noise is a low-pass random
// walk added to the commanded tip position; hesitation is an exponentially
// distributed pause before each reach; every `slip_every`-th carry is let go
// in mid-air.
struct Skill {
  double noise_m = 0.0;
  double hesitation_s = 0.0;
  double speed_mps = 0.1;
  int slip_every = 0;  // 0: never
};

// Interval between the user's controller updates.
inline constexpr std::int64_t kUserPeriodUs = 20'000;

// Skill by phase: index 0 for familiarization and trial 1, then one entry per trial.
// Noise and hesitation shrink, speed grows and slips get rarer.
std::vector<Skill> default_learning_curve();

// A closed-loop user that watches the scene and moves the controllers so that
// rings travel across the board with a mid-air handover. It works in tip space
// and converts tip targets into controller poses through the current teleop anchors.
class PegUser {
 public:
  PegUser(std::uint64_t seed, std::vector<Skill> curve = default_learning_curve());

  // Pose records for both controllers at t_us, given the engine state after the
  // last tick.
  std::vector<io::PoseRecord> act(const engine::Engine& engine, std::int64_t t_us);

 private:
  struct Step {
    std::array<std::optional<Vec3>, 2> to;  // tip targets reached at the end of the step
    std::array<std::optional<double>, 2> jaw;  // set at the start of the step
    double duration_s = 0.0;
    enum class Check { None, PickerHolds, ReceiverHolds } check = Check::None;
  };

  void plan(const task::PegScene& scene);
  void restart(const task::PegScene& scene);
  const Skill& skill() const;

  std::mt19937_64 rng_;
  std::vector<Skill> curve_;
  task::Phase phase_;
  bool started_ = false;
  std::deque<Step> steps_;
  bool entered_ = false;
  std::int64_t step_start_us_ = 0;
  std::int64_t now_us_ = 0;
  std::array<Vec3, 2> from_{};
  std::array<Vec3, 2> tip_{};  // commanded tip position before noise
  std::array<double, 2> jaw_{0.0, 0.0};
  std::array<Vec3, 2> noise_{};
  std::array<Vec3, 2> controller_home_{};
  int carries_ = 0;
  int direction_ = 0;  // 0 moves rings left to right, 1 right to left
  int picker_ = 0;
  int ring_ = -1;
};

}  // namespace dex::synth
