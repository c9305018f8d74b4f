#include "dex/teleop/teleop.hpp"

#include <algorithm>

namespace dex::teleop {

namespace {

constexpr std::array<ControllerId, 2> kControllers{ControllerId::Left, ControllerId::Right};

std::optional<CameraAnchor> capture_camera(const TeleopState& state, const PosePair& poses) {
  if (!poses[0] || !poses[1]) {
    return std::nullopt;
  }
  const Vec3 l = poses[0]->position;
  const Vec3 r = poses[1]->position;
  return CameraAnchor{0.5 * (l + r), r - l, state.camera};
}

}  // namespace

std::string_view to_string(ControllerMode mode) {
  return mode == ControllerMode::Engaged ? "engaged" : "clutched";
}

std::string_view to_string(GlobalMode mode) {
  return mode == GlobalMode::Normal ? "normal" : "camera";
}

ControllerPose fuse_pose(const tracking::MarkerTrack& track, const UnitQuat& orientation,
                         const RigidTransform& tracker_to_world, const Vec3& grip_offset,
                         std::int64_t t_us) {
  if (!track.active()) {
    throw StalePoseError("controller " + std::string(to_string(track.id)) + " is not tracked");
  }
  ControllerPose pose;
  pose.id = track.id;
  pose.position = tracker_to_world.apply(track.position_smoothed) + orientation.rotate(grip_offset);
  pose.orientation = orientation;
  pose.grip_offset = grip_offset;
  pose.t_us = t_us;
  return pose;
}

TeleopState update_mode(const TeleopState& state, Buttons buttons, const PosePair& poses) {
  TeleopState next = state;
  const bool camera = buttons.left && buttons.right;
  if (camera && state.global != GlobalMode::CameraAdjust) {
    next.camera_anchor = capture_camera(state, poses);
  }
  if (!camera) {
    next.camera_anchor.reset();
  }
  next.global = camera ? GlobalMode::CameraAdjust : GlobalMode::Normal;

  for (ControllerId id : kControllers) {
    const int i = index(id);
    const ControllerMode mode = buttons.held(id) ? ControllerMode::Clutched : ControllerMode::Engaged;
    if (mode == ControllerMode::Clutched) {
      next.anchors[i].reset();
    } else if (state.mode[i] == ControllerMode::Clutched) {
      next.anchors[i].reset();
      if (poses[i]) {
        next.anchors[i] = Anchor{poses[i]->transform(), state.tips[i]};
      }
    }
    next.mode[i] = mode;
  }
  return next;
}

TipTarget map_motion(const TeleopState& state, const ControllerPose& pose) {
  const int i = index(pose.id);
  if (state.mode[i] != ControllerMode::Engaged || !state.anchors[i]) {
    throw DomainError("motion mapping needs an engaged, anchored controller");
  }
  const Anchor& anchor = *state.anchors[i];
  TipTarget target;
  target.instrument_id = i;
  target.pose.translation =
      anchor.tip.translation +
      state.translation_scale * (pose.position - anchor.controller.translation);
  // An unrotated controller leaves the anchored tip orientation bit for bit.
  target.pose.rotation =
      pose.orientation == anchor.controller.rotation
          ? anchor.tip.rotation
          : pose.orientation * anchor.controller.rotation.inverse() * anchor.tip.rotation;
  target.jaw_command = state.jaw[i];
  target.clamp_jaw();
  return target;
}

RigidTransform camera_adjust(const TeleopState& state, const ControllerPose& left,
                             const ControllerPose& right) {
  if (state.global != GlobalMode::CameraAdjust || !state.camera_anchor) {
    throw DomainError("camera adjustment needs camera mode with captured anchors");
  }
  const CameraAnchor& a = *state.camera_anchor;
  const Vec3 m = 0.5 * (left.position + right.position);
  const Vec3 v = right.position - left.position;
  UnitQuat r = UnitQuat::identity();
  if (norm(v) >= kMinCameraSpan && norm(a.span) >= kMinCameraSpan) {
    r = shortest_arc(a.span, v);
  }
  const Vec3 delta = state.camera_translation_scale * (m - a.midpoint);
  // Grab motion x -> r (x - m0) + m0 + delta.
  const RigidTransform grab{r, a.midpoint + delta - r.rotate(a.midpoint)};
  return grab.inverse() * a.camera;
}

TeleopOutput teleop_step(TeleopState& state, const TeleopInput& input) {
  state = update_mode(state, input.buttons, input.poses);
  for (ControllerId id : kControllers) {
    const int i = index(id);
    if (state.mode[i] == ControllerMode::Engaged) {
      state.jaw[i] = std::clamp(input.jaw[i], 0.0, 1.0);
    }
    if (state.mode[i] != ControllerMode::Engaged) {
      continue;
    }
    if (!input.poses[i]) {
      state.anchors[i].reset();
      continue;
    }
    if (!state.anchors[i]) {
      // First pose after start-up or after the track was lost.
      state.anchors[i] = Anchor{input.poses[i]->transform(), state.tips[i]};
    }
    state.tips[i] = map_motion(state, *input.poses[i]).pose;
  }
  if (state.global == GlobalMode::CameraAdjust && state.camera_anchor && input.poses[0] &&
      input.poses[1]) {
    state.camera = camera_adjust(state, *input.poses[0], *input.poses[1]);
  }

  TeleopOutput out;
  for (ControllerId id : kControllers) {
    const int i = index(id);
    out.targets[i] = TipTarget{i, state.tips[i], state.jaw[i]};
  }
  out.camera = state.camera;
  return out;
}

}  // namespace dex::teleop
