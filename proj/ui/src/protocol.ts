// Message shapes of the /session WebSocket; schema/messages.schema.json is authoritative.
import type { Pose, Vec3 } from "./math.js";

export type Side = "left" | "right";
export type PhaseKind = "idle" | "familiarization" | "trial" | "break" | "done";

export interface Phase {
  kind: PhaseKind;
  trial: number;
  elapsed_us?: number;
}

export interface InstrumentDescription {
  id: Side;
  rcm: Pose;
  limits: [number, number][];
  tip_length_m: number;
  jaw_max_rad: number;
  chain: string;
}

export interface SceneDescription {
  peg_height_m: number;
  peg_capture_radius_m: number;
  ring_radius_m: number;
  translation_scale: number;
  pegs: { id: number; name: string; side: Side; base: Vec3 }[];
  instruments: InstrumentDescription[];
  camera: Pose;
}

export interface Welcome {
  type: "welcome";
  role: string;
  input: "poses" | "raw";
  tick_hz: number;
  snapshot_hz: number;
  protocol: { familiarization_s: number; trial_s: number; trials: number; break_s: number };
  scene: SceneDescription;
}

export type RingState = "on_peg" | "grasped" | "grasped_both" | "falling" | "respawning";

export interface InstrumentState {
  id: Side;
  joints: number[];
  tip: Pose;
  jaw: number;
  jaw_closed: boolean;
  ik_ok: boolean;
}

export interface LiveMetrics {
  remaining_us: number;
  transfers: number;
  drops: number;
  avg_transfer_time_s: number | null;
  total_path_length_m: number;
}

export interface State {
  type: "state";
  t_us: number;
  phase: Phase;
  instruments: InstrumentState[];
  rings: { id: number; state: RingState; peg: number; holder: number; pose: Pose }[];
  camera: Pose;
  mode: { global: "normal" | "camera"; left: "engaged" | "clutched"; right: "engaged" | "clutched" };
  live: LiveMetrics;
}

export interface EventMessage {
  type: "event";
  t_us: number;
  kind: string;
  data: {
    phase?: Phase;
    phase_t_us?: number;
    ring?: number;
    instrument?: number;
    peg?: number;
    value?: number;
  };
}

export interface Metrics {
  type: "metrics";
  trial: number;
  duration_s: number;
  transfers: number;
  drops: number;
  avg_transfer_time_s: number | null;
  path_length_m: { left: number; right: number };
  total_path_length_m: number;
  truncated: boolean;
}

export interface Haptic {
  type: "haptic";
  controller: Side;
  amplitude: number;
  duration_ms: number;
}

export interface ErrorMessage {
  type: "error";
  code: "protocol" | "malformed" | "invalid" | "order" | "mode";
  message: string;
}

export type ServerMessage = Welcome | State | EventMessage | Metrics | Haptic | ErrorMessage;

export interface InputMessage {
  type: "input";
  t_us: number;
  controller: Side;
  pose: Pose;
  button: boolean;
  jaw: number;
}

export type TrialCommand = "start" | "stop" | "reset";

export function parseServerMessage(text: string): ServerMessage {
  const m = JSON.parse(text) as { type?: unknown };
  switch (m.type) {
    case "welcome":
    case "state":
    case "event":
    case "metrics":
    case "haptic":
    case "error":
      return m as ServerMessage;
    default:
      throw new Error(`unknown message type ${String(m.type)}`);
  }
}
