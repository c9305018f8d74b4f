// Viewing setup: the camera pose mirrored from snapshots, mono or red/cyan anaglyph.
import { add, rotate, scale, type Pose, type Vec3 } from "./math.js";

export interface ViewConfig {
  mode: "mono" | "anaglyph";
  eye_separation: number; // metres
  focal_px: number;
}

export const defaultView = (): ViewConfig => ({ mode: "mono", eye_separation: 0.065, focal_px: 900 });

export interface EyePass {
  eye: "center" | "left" | "right";
  pose: Pose;
  color: string;
}

// Anaglyph eyes sit at -/+ eye_separation / 2 along the camera's right axis.
export function eyePasses(camera: Pose, view: ViewConfig): EyePass[] {
  if (view.mode === "mono") {
    return [{ eye: "center", pose: camera, color: "#e8e8e8" }];
  }
  const right = rotate(camera.q, [1, 0, 0]);
  const half = view.eye_separation / 2;
  return [
    { eye: "left", pose: { p: add(camera.p, scale(right, -half)), q: camera.q }, color: "#ff0000" },
    { eye: "right", pose: { p: add(camera.p, scale(right, half)), q: camera.q }, color: "#00ffff" },
  ];
}

// Pinhole projection into a width x height canvas; null behind the camera.
export function project(
  eye: Pose,
  world: Vec3,
  view: ViewConfig,
  width: number,
  height: number,
): [number, number] | null {
  const rel: Vec3 = [world[0] - eye.p[0], world[1] - eye.p[1], world[2] - eye.p[2]];
  const c = rotate([eye.q[0], -eye.q[1], -eye.q[2], -eye.q[3]], rel);
  if (c[2] <= 1e-6) {
    return null;
  }
  return [width / 2 + (view.focal_px * c[0]) / c[2], height / 2 + (view.focal_px * c[1]) / c[2]];
}
