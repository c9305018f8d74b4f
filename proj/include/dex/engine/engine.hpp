#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "dex/imu/orientation_filter.hpp"
#include "dex/io/config_files.hpp"
#include "dex/io/replay.hpp"
#include "dex/task/session.hpp"
#include "dex/teleop/teleop.hpp"
#include "dex/tracking/pipeline.hpp"

namespace dex::engine {

// Latest state of one controller's IMU link.
struct ImuChannel {
  std::optional<imu::OrientationFilter> filter;
  std::optional<std::int64_t> last_t_us;
  bool button = false;
  double jaw = 0.0;
  int rejected = 0;  // packets refused by the time-order check or the filter
};

// Raw-input half of the engine: stereo observations through the tracking pipeline,
// IMU packets through the orientation filters, fused into controller grip poses.
class TrackingFrontEnd {
 public:
  TrackingFrontEnd(io::Calibration calibration, tracking::TrackingConfig config,
                   double imu_alpha, std::string frame_dir = ".");

  void apply(const io::ImuRecord& record);
  const tracking::FrameResult& apply(const io::StereoRecord& record);
  const tracking::FrameResult& apply(const io::FrameRecord& record);

  // Grip poses for controllers that are tracked (or coasting) and have an
  // initialised orientation filter.
  teleop::PosePair poses(std::int64_t t_us) const;

  const ImuChannel& imu(int controller) const { return imu_[controller]; }
  const tracking::TrackSet& tracks() const { return pipeline_.tracks(); }
  const tracking::FrameResult& last_frame() const { return last_frame_; }
  const io::Calibration& calibration() const { return calibration_; }

 private:
  io::Calibration calibration_;
  tracking::TrackingPipeline pipeline_;
  double imu_alpha_;
  std::string frame_dir_;
  std::array<ImuChannel, 2> imu_;
  tracking::FrameResult last_frame_;
};

struct EngineConfig {
  io::Calibration calibration;
  io::SceneFile scene;
  tracking::TrackingConfig tracking;
  std::string frame_dir = ".";
  // Issue a Start command before the first tick.
  bool auto_start = false;
};

// What one tick did, for observers such as the live service.
struct TickSummary {
  std::int64_t t_us = 0;
  task::Phase phase;
  task::TickResult result;
  task::EventLog teleop_events;  // mode changes, stamped like recorded events
  teleop::TeleopOutput output;
};

// Fixed-step engine. Tick k runs at t_k = (k + 1) * step: it applies every input
// record with t <= t_k, then the teleoperation step, then one session tick. Pose
// records drive a controller directly; imu, stereo and frame records go through the
// tracking front end. The most recent source to update a controller wins.
class Engine {
 public:
  explicit Engine(EngineConfig config);

  // Records must arrive in time order; throws Error otherwise. Ticks strictly
  // before the record's time run first.
  void push(const io::ReplayRecord& record);

  // Runs every tick with t_k <= t_us.
  void run_until(std::int64_t t_us);

  // Input is exhausted: an unfinished session runs to its end, trials in progress
  // or still ahead flagged truncated.
  void finish();

  std::int64_t now_us() const { return ticks_ * step_us_; }
  std::int64_t next_tick_us() const { return (ticks_ + 1) * step_us_; }
  std::int64_t ticks() const { return ticks_; }

  const task::SessionRunner& runner() const { return runner_; }
  const teleop::TeleopState& teleop() const { return teleop_; }
  const teleop::TeleopOutput& output() const { return output_; }
  const TrackingFrontEnd& front_end() const { return front_end_; }
  const EngineConfig& config() const { return config_; }
  task::SessionReport report() const { return runner_.report(); }

  void set_observer(std::function<void(const TickSummary&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  struct ControllerInput {
    std::optional<teleop::ControllerPose> pose;
    bool button = false;
    double jaw = 0.0;
  };

  void tick();
  void apply(const io::ReplayRecord& record);
  void command(task::SessionCommand command, TickSummary* summary);
  void refresh_from_front_end(std::int64_t t_us);
  void rehome();

  EngineConfig config_;
  std::int64_t step_us_;
  TrackingFrontEnd front_end_;
  task::SessionRunner runner_;
  teleop::TeleopState teleop_;
  teleop::TeleopOutput output_;
  std::array<ControllerInput, 2> input_;
  std::array<bool, 2> raw_source_{false, false};
  std::int64_t ticks_ = 0;
  std::int64_t last_record_us_ = 0;
  task::TickResult pending_;  // command results awaiting the next tick summary
  std::function<void(const TickSummary&)> observer_;
};

}  // namespace dex::engine
