// Forward kinematics driven by the chain string from the welcome message, so the
// drawn instrument follows the same joint order and axes as the server.
import { compose, quatFromAxisAngle, type Pose, type Vec3 } from "./math.js";
import type { InstrumentDescription } from "./protocol.js";

export type ChainStep =
  | { kind: "rot"; axis: Vec3; joint: number }
  | { kind: "shift"; joint: number }
  | { kind: "tip" };

const AXES: Record<string, Vec3> = { x: [1, 0, 0], y: [0, 1, 0], z: [0, 0, 1] };

// Parses e.g. "Ry(q1) Rx(q2) Tz(q3) Rz(q4) Rx(q5) Ry(q6) Tz(tip_length)".
export function parseChain(chain: string): ChainStep[] {
  const steps: ChainStep[] = [];
  for (const token of chain.trim().split(/\s+/)) {
    const m = /^([RT])([xyz])\((q(\d+)|tip_length)\)$/.exec(token);
    if (!m) {
      throw new Error(`bad chain step '${token}'`);
    }
    const [, op, axis, arg, index] = m;
    if (arg === "tip_length") {
      if (op !== "T" || axis !== "z") {
        throw new Error("the tip offset must be Tz(tip_length)");
      }
      steps.push({ kind: "tip" });
    } else if (op === "R") {
      steps.push({ kind: "rot", axis: AXES[axis], joint: Number(index) - 1 });
    } else {
      if (axis !== "z") {
        throw new Error("prismatic joints slide along z");
      }
      steps.push({ kind: "shift", joint: Number(index) - 1 });
    }
  }
  return steps;
}

// Frame after every step, starting with the remote centre of motion.
export function chainFrames(instrument: InstrumentDescription, joints: number[]): Pose[] {
  let frame: Pose = instrument.rcm;
  const frames: Pose[] = [frame];
  for (const step of parseChain(instrument.chain)) {
    let local: Pose;
    if (step.kind === "rot") {
      local = { p: [0, 0, 0], q: quatFromAxisAngle(step.axis, joints[step.joint]) };
    } else if (step.kind === "shift") {
      local = { p: [0, 0, joints[step.joint]], q: [1, 0, 0, 0] };
    } else {
      local = { p: [0, 0, instrument.tip_length_m], q: [1, 0, 0, 0] };
    }
    frame = compose(frame, local);
    frames.push(frame);
  }
  return frames;
}

export function tipPose(instrument: InstrumentDescription, joints: number[]): Pose {
  const frames = chainFrames(instrument, joints);
  return frames[frames.length - 1];
}
