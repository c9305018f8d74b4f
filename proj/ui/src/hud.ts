// HUD text. Every figure is copied from server messages.
import type { Metrics, Phase, State } from "./protocol.js";

export interface HudModel {
  phase: string;
  timer: string;
  transfersDrops: string;
  timePerTransfer: string;
  distance: string;
  lastTrial: string;
}

export function formatTimer(us: number): string {
  const total = Math.ceil(Math.max(0, us) / 1e6);
  const m = Math.floor(total / 60);
  const s = total % 60;
  return `${m}:${String(s).padStart(2, "0")}`;
}

export function phaseLabel(p: Phase): string {
  switch (p.kind) {
    case "idle":
      return "Idle: press Enter to start";
    case "familiarization":
      return "Familiarization";
    case "trial":
      return `Trial ${p.trial}`;
    case "break":
      return `Break after trial ${p.trial}`;
    case "done":
      return "Session complete";
  }
}

export function hudModel(state: State, lastMetrics: Metrics | null): HudModel {
  const live = state.live;
  return {
    phase: phaseLabel(state.phase),
    timer: formatTimer(live.remaining_us),
    transfersDrops: `${live.transfers} / ${live.drops}`,
    timePerTransfer:
      live.avg_transfer_time_s === null ? "-" : `${live.avg_transfer_time_s.toFixed(1)} s`,
    distance: `${live.total_path_length_m.toFixed(2)} m`,
    lastTrial:
      lastMetrics === null
        ? ""
        : `Trial ${lastMetrics.trial}: ${lastMetrics.transfers} transfers, ${lastMetrics.drops} drops`,
  };
}
