#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "dex/math/controller.hpp"
#include "dex/math/error.hpp"
#include "dex/math/transform.hpp"
#include "dex/teleop/tip_target.hpp"
#include "dex/tracking/tracker.hpp"

namespace dex::teleop {

struct ControllerPose {
  ControllerId id = ControllerId::Left;
  Vec3 position;  // world, at the grip point
  UnitQuat orientation;
  Vec3 grip_offset;  // body frame, LED to grip
  std::int64_t t_us = 0;

  RigidTransform transform() const { return {orientation, position}; }
};

class StalePoseError : public Error {
 public:
  using Error::Error;
};

// World pose of the grip point: calibrated LED position plus the rotated lever arm.
// Throws StalePoseError when the track is Lost.
ControllerPose fuse_pose(const tracking::MarkerTrack& track, const UnitQuat& orientation,
                         const RigidTransform& tracker_to_world, const Vec3& grip_offset,
                         std::int64_t t_us);

enum class ControllerMode { Engaged, Clutched };
enum class GlobalMode { Normal, CameraAdjust };

std::string_view to_string(ControllerMode mode);
std::string_view to_string(GlobalMode mode);

struct Buttons {
  bool left = false;
  bool right = false;

  bool held(ControllerId id) const { return id == ControllerId::Left ? left : right; }
  friend bool operator==(const Buttons&, const Buttons&) = default;
};

struct Anchor {
  RigidTransform controller;
  RigidTransform tip;
};

struct CameraAnchor {
  Vec3 midpoint;
  Vec3 span;  // right minus left
  RigidTransform camera;
};

struct TeleopState {
  std::array<ControllerMode, 2> mode{ControllerMode::Engaged, ControllerMode::Engaged};
  GlobalMode global = GlobalMode::Normal;
  // Empty until an engaged controller has a pose to anchor against.
  std::array<std::optional<Anchor>, 2> anchors;
  std::array<RigidTransform, 2> tips;
  std::array<double, 2> jaw{0.0, 0.0};
  // Empty when camera mode was entered without both poses.
  std::optional<CameraAnchor> camera_anchor;
  RigidTransform camera;
  double translation_scale = 0.5;
  double camera_translation_scale = 1.0;

  ControllerMode operator[](ControllerId id) const { return mode[index(id)]; }
};

using PosePair = std::array<std::optional<ControllerPose>, 2>;

// Held button clutches its controller; both held enters camera mode and captures
// the camera anchors from `poses`. A controller that returns to Engaged anchors
// on its current pose and current tip.
TeleopState update_mode(const TeleopState& state, Buttons buttons, const PosePair& poses);

// Tip pose commanded by an engaged, anchored controller. Translation is scaled,
// rotation is applied one to one in the world frame.
TipTarget map_motion(const TeleopState& state, const ControllerPose& pose);

// Minimum hand separation below which the camera rotation stays frozen.
inline constexpr double kMinCameraSpan = 0.01;

// Camera pose for the current hand pair in camera mode: the world is grabbed at
// the entry midpoint, rotated by the shortest arc from the entry span to the
// current span and shifted by the scaled midpoint motion.
RigidTransform camera_adjust(const TeleopState& state, const ControllerPose& left,
                             const ControllerPose& right);

// One tick of the full teleoperation state: modes, then tip targets and camera.
// Targets hold their value while clutched, in camera mode, or without a pose.
struct TeleopOutput {
  std::array<TipTarget, 2> targets;
  RigidTransform camera;
};

struct TeleopInput {
  PosePair poses;
  Buttons buttons;
  std::array<double, 2> jaw{0.0, 0.0};
};

TeleopOutput teleop_step(TeleopState& state, const TeleopInput& input);

}  // namespace dex::teleop
