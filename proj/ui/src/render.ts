// Canvas drawing of the board, pegs, rings and both instruments.
import { chainFrames } from "./fk.js";
import { add, rotate, type Pose, type Vec3 } from "./math.js";
import type { RingState, SceneDescription, State } from "./protocol.js";
import { eyePasses, project, type EyePass, type ViewConfig } from "./view.js";

// The part of CanvasRenderingContext2D this module draws with.
export interface Canvas2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalCompositeOperation: GlobalCompositeOperation;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
}

export const RING_COLORS: Record<RingState, string> = {
  on_peg: "#4caf50",
  grasped: "#ffd54f",
  grasped_both: "#ff9800",
  falling: "#f44336",
  respawning: "#9e9e9e",
};

const INSTRUMENT_COLORS = ["#64b5f6", "#ba68c8"];
const RING_SEGMENTS = 20;

function polyline(
  ctx: Canvas2D,
  eye: Pose,
  points: Vec3[],
  view: ViewConfig,
  w: number,
  h: number,
  closed: boolean,
): void {
  ctx.beginPath();
  let started = false;
  for (const p of points) {
    const s = project(eye, p, view, w, h);
    if (s === null) {
      started = false;
      continue;
    }
    if (started) {
      ctx.lineTo(s[0], s[1]);
    } else {
      ctx.moveTo(s[0], s[1]);
      started = true;
    }
  }
  if (closed) {
    ctx.closePath();
  }
  ctx.stroke();
}

function boardOutline(scene: SceneDescription): Vec3[] {
  let minX = Infinity, maxX = -Infinity, minZ = Infinity, maxZ = -Infinity;
  for (const peg of scene.pegs) {
    minX = Math.min(minX, peg.base[0]);
    maxX = Math.max(maxX, peg.base[0]);
    minZ = Math.min(minZ, peg.base[2]);
    maxZ = Math.max(maxZ, peg.base[2]);
  }
  const m = 0.03;
  return [
    [minX - m, 0, minZ - m],
    [maxX + m, 0, minZ - m],
    [maxX + m, 0, maxZ + m],
    [minX - m, 0, maxZ + m],
  ];
}

function ringPoints(pose: Pose, radius: number): Vec3[] {
  const pts: Vec3[] = [];
  for (let i = 0; i < RING_SEGMENTS; ++i) {
    const a = (2 * Math.PI * i) / RING_SEGMENTS;
    pts.push(add(pose.p, rotate(pose.q, [radius * Math.cos(a), 0, radius * Math.sin(a)])));
  }
  return pts;
}

// Draws one pass per eye and returns the passes drawn. Anaglyph passes are
// single-coloured and added onto a black background.
export function renderScene(
  ctx: Canvas2D,
  width: number,
  height: number,
  scene: SceneDescription,
  state: State,
  view: ViewConfig,
): EyePass[] {
  const passes = eyePasses(state.camera, view);
  ctx.globalCompositeOperation = "source-over";
  ctx.fillStyle = "#000000";
  ctx.fillRect(0, 0, width, height);
  const mono = view.mode === "mono";
  ctx.globalCompositeOperation = mono ? "source-over" : "lighter";
  for (const pass of passes) {
    const color = (c: string) => (mono ? c : pass.color);
    ctx.lineWidth = 1;
    ctx.strokeStyle = color("#5d4037");
    polyline(ctx, pass.pose, boardOutline(scene), view, width, height, true);
    ctx.strokeStyle = color("#bdbdbd");
    for (const peg of scene.pegs) {
      const top = add(peg.base, [0, scene.peg_height_m, 0]);
      polyline(ctx, pass.pose, [peg.base, top], view, width, height, false);
    }
    ctx.lineWidth = 2;
    for (const ring of state.rings) {
      ctx.strokeStyle = color(RING_COLORS[ring.state]);
      polyline(ctx, pass.pose, ringPoints(ring.pose, scene.ring_radius_m), view, width, height, true);
    }
    state.instruments.forEach((inst, i) => {
      const description = scene.instruments[i];
      const points = chainFrames(description, inst.joints).map((f) => f.p);
      ctx.strokeStyle = color(inst.ik_ok ? INSTRUMENT_COLORS[i] : "#f44336");
      polyline(ctx, pass.pose, points, view, width, height, false);
    });
  }
  ctx.globalCompositeOperation = "source-over";
  return passes;
}
