// Virtual hand controllers driven by mouse, keyboard and gamepad.
import {
  add,
  identityQuat,
  quatFromAxisAngle,
  quatMul,
  quatNormalize,
  rotate,
  scale,
  type Pose,
  type Vec3,
} from "./math.js";
import type { InputMessage, Side } from "./protocol.js";

export interface Gains {
  translation_m_per_px: number;
  rotation_rad_per_px: number;
  depth_m_per_wheel_px: number;
  stick_m_per_s: number;
}

export const defaultGains = (): Gains => ({
  translation_m_per_px: 0.0005,
  rotation_rad_per_px: 0.005,
  depth_m_per_wheel_px: 0.0002,
  stick_m_per_s: 0.2,
});

// Time for the jaw to ramp fully open or fully closed.
export const JAW_RAMP_MS = 150;
// Inputs per controller are spaced by at least this much.
export const MIN_INPUT_INTERVAL_MS = 10;

export interface VirtualController {
  id: Side;
  pose: Pose;
  button: boolean;
  jaw: number; // 0 open, 1 closed
  closing: boolean; // jaw key held
}

export function makeController(id: Side, position: Vec3): VirtualController {
  return { id, pose: { p: position, q: identityQuat() }, button: false, jaw: 0, closing: false };
}

// Camera right, down and forward axes in world coordinates.
export function cameraAxes(camera: Pose): { right: Vec3; down: Vec3; forward: Vec3 } {
  return {
    right: rotate(camera.q, [1, 0, 0]),
    down: rotate(camera.q, [0, 1, 0]),
    forward: rotate(camera.q, [0, 0, 1]),
  };
}

// Drag moves the grip in the camera image plane; with the rotate modifier it
// turns the grip about the camera's down (dx) and right (dy) axes instead.
export function mouseMove(
  c: VirtualController,
  dx: number,
  dy: number,
  rotateModifier: boolean,
  camera: Pose,
  gains: Gains,
): void {
  const axes = cameraAxes(camera);
  if (rotateModifier) {
    const yaw = quatFromAxisAngle(axes.down, dx * gains.rotation_rad_per_px);
    const pitch = quatFromAxisAngle(axes.right, -dy * gains.rotation_rad_per_px);
    c.pose.q = quatNormalize(quatMul(quatMul(pitch, yaw), c.pose.q));
    return;
  }
  const g = gains.translation_m_per_px;
  c.pose.p = add(c.pose.p, add(scale(axes.right, dx * g), scale(axes.down, dy * g)));
}

// Positive wheel delta pushes the grip away from the viewer.
export function wheel(c: VirtualController, delta: number, camera: Pose, gains: Gains): void {
  c.pose.p = add(c.pose.p, scale(cameraAxes(camera).forward, delta * gains.depth_m_per_wheel_px));
}

// Stick deflection in [-1, 1] integrated as a velocity over dt seconds.
export function stick(
  c: VirtualController,
  sx: number,
  sy: number,
  dtS: number,
  camera: Pose,
  gains: Gains,
): void {
  const axes = cameraAxes(camera);
  const v = gains.stick_m_per_s * dtS;
  c.pose.p = add(c.pose.p, add(scale(axes.right, sx * v), scale(axes.down, sy * v)));
}

// Moves the jaw toward closed while the key is held and toward open otherwise.
export function advanceJaw(c: VirtualController, dtMs: number): void {
  const step = dtMs / JAW_RAMP_MS;
  c.jaw = Math.min(1, Math.max(0, c.jaw + (c.closing ? step : -step)));
}

// Stamps input messages: at most one per MIN_INPUT_INTERVAL_MS per controller,
// with strictly increasing t_us per controller.
export class InputEmitter {
  private lastUs = new Map<Side, number>();
  private lastSentMs = new Map<Side, number>();

  due(id: Side, nowMs: number): boolean {
    const last = this.lastSentMs.get(id);
    return last === undefined || nowMs - last >= MIN_INPUT_INTERVAL_MS;
  }

  emit(c: VirtualController, nowMs: number): InputMessage | null {
    if (!this.due(c.id, nowMs)) {
      return null;
    }
    const t = Math.max(Math.round(nowMs * 1000), (this.lastUs.get(c.id) ?? -1) + 1);
    this.lastUs.set(c.id, t);
    this.lastSentMs.set(c.id, nowMs);
    return {
      type: "input",
      t_us: t,
      controller: c.id,
      pose: { p: [...c.pose.p], q: quatNormalize(c.pose.q) },
      button: c.button,
      jaw: c.jaw,
    };
  }
}
