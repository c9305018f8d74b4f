// Browser entry point: DOM wiring, input devices and the render loop.
import {
  InputEmitter,
  advanceJaw,
  defaultGains,
  makeController,
  mouseMove,
  stick,
  wheel,
  type Gains,
  type VirtualController,
} from "./controller.js";
import { hudModel } from "./hud.js";
import type { Pose } from "./math.js";
import type { Side } from "./protocol.js";
import { renderScene } from "./render.js";
import { SessionClient, type SocketLike } from "./session.js";
import { defaultView } from "./view.js";

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const canvas = $<HTMLCanvasElement>("scene");
const ctx = canvas.getContext("2d")!;
const banner = $("banner");
const flash = $("flash");
const status = $("status");

const gains: Gains = defaultGains();
const view = defaultView();
const controllers: Record<Side, VirtualController> = {
  left: makeController("left", [-0.12, 0.25, 0.25]),
  right: makeController("right", [0.12, 0.25, 0.25]),
};
let active: Side = "left";
let rotateHeld = false;
const emitter = new InputEmitter();
const dirty = new Set<Side>(["left", "right"]);

const url = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/session`;
const session = new SessionClient(new WebSocket(url) as unknown as SocketLike, {
  welcome: (w) => {
    status.textContent = `connected (${w.input} input, ${w.snapshot_hz} Hz snapshots)`;
  },
  haptic: (h) => {
    flash.style.opacity = String(0.2 + 0.6 * h.amplitude);
    flash.className = h.controller;
    setTimeout(() => (flash.style.opacity = "0"), h.duration_ms);
  },
  error: (e) => {
    status.textContent = `server: ${e.code}: ${e.message}`;
  },
  closed: (code) => {
    status.textContent = `disconnected (${code})`;
  },
});

function camera(): Pose {
  return session.latest?.state.camera ?? session.welcome?.scene.camera ?? { p: [0, 0, 0], q: [1, 0, 0, 0] };
}

function markDirty(id: Side): void {
  dirty.add(id);
}

// ---- settings panel --------------------------------------------------------

for (const key of Object.keys(gains) as (keyof Gains)[]) {
  const input = document.querySelector<HTMLInputElement>(`input[name="${key}"]`);
  if (input) {
    input.value = String(gains[key]);
    input.addEventListener("change", () => {
      const v = Number(input.value);
      if (Number.isFinite(v) && v > 0) {
        gains[key] = v;
      } else {
        input.value = String(gains[key]);
      }
    });
  }
}

// ---- mouse and keyboard ----------------------------------------------------

canvas.addEventListener("click", () => canvas.requestPointerLock());
document.addEventListener("mousemove", (e) => {
  if (document.pointerLockElement !== canvas) {
    return;
  }
  mouseMove(controllers[active], e.movementX, e.movementY, rotateHeld, camera(), gains);
  markDirty(active);
});
canvas.addEventListener(
  "wheel",
  (e) => {
    e.preventDefault();
    wheel(controllers[active], e.deltaY, camera(), gains);
    markDirty(active);
  },
  { passive: false },
);

function onKey(e: KeyboardEvent, down: boolean): void {
  if (e.target instanceof HTMLInputElement) {
    return;
  }
  const c = controllers[active];
  switch (e.code) {
    case "ShiftLeft":
    case "ShiftRight":
      rotateHeld = down;
      return;
    case "Space":
      c.button = down;
      markDirty(active);
      break;
    case "KeyC":
      controllers.left.button = down;
      controllers.right.button = down;
      markDirty("left");
      markDirty("right");
      break;
    case "KeyJ":
      c.closing = down;
      break;
    case "Tab":
      if (down) {
        active = active === "left" ? "right" : "left";
        $("active").textContent = active;
      }
      break;
    case "Enter":
      if (down) session.sendTrial("start");
      break;
    case "KeyS":
      if (down) session.sendTrial("stop");
      break;
    case "KeyR":
      if (down) session.sendTrial("reset");
      break;
    case "KeyA":
      if (down) view.mode = view.mode === "mono" ? "anaglyph" : "mono";
      break;
    default:
      return;
  }
  e.preventDefault();
}
document.addEventListener("keydown", (e) => !e.repeat && onKey(e, true));
document.addEventListener("keyup", (e) => onKey(e, false));

// ---- gamepad ---------------------------------------------------------------

const DEADZONE = 0.12;
const dz = (v: number) => (Math.abs(v) < DEADZONE ? 0 : v);

function pollGamepad(dtMs: number): void {
  const pad = navigator.getGamepads?.().find((p) => p !== null);
  if (!pad) {
    return;
  }
  const sides: [Side, number, number, number, number][] = [
    ["left", 0, 1, 6, 4],
    ["right", 2, 3, 7, 5],
  ];
  for (const [side, ax, ay, trigger, shoulder] of sides) {
    const c = controllers[side];
    const sx = dz(pad.axes[ax] ?? 0);
    const sy = dz(pad.axes[ay] ?? 0);
    if (sx !== 0 || sy !== 0) {
      stick(c, sx, sy, dtMs / 1000, camera(), gains);
      markDirty(side);
    }
    c.closing = (pad.buttons[trigger]?.value ?? 0) > 0.5;
    const held = pad.buttons[shoulder]?.pressed ?? false;
    if (held !== c.button) {
      c.button = held;
      markDirty(side);
    }
  }
}

// ---- loops -----------------------------------------------------------------

let lastTick = performance.now();
setInterval(() => {
  const now = performance.now();
  const dt = now - lastTick;
  lastTick = now;
  pollGamepad(dt);
  for (const side of ["left", "right"] as Side[]) {
    const c = controllers[side];
    const before = c.jaw;
    advanceJaw(c, dt);
    if (c.jaw !== before) {
      markDirty(side);
    }
    if (dirty.has(side) && session.connected) {
      const m = emitter.emit(c, now);
      if (m) {
        session.sendInput(m);
        dirty.delete(side);
      }
    }
  }
}, 10);

function frame(): void {
  const w = canvas.clientWidth;
  const h = canvas.clientHeight;
  if (canvas.width !== w || canvas.height !== h) {
    canvas.width = w;
    canvas.height = h;
  }
  view.focal_px = 1.2 * Math.max(w, h);
  const cell = session.latest;
  if (cell && session.welcome) {
    renderScene(ctx, w, h, session.welcome.scene, cell.state, view);
    const hud = hudModel(cell.state, session.lastMetrics);
    $("phase").textContent = hud.phase;
    $("timer").textContent = hud.timer;
    $("transfers").textContent = hud.transfersDrops;
    $("per-transfer").textContent = hud.timePerTransfer;
    $("distance").textContent = hud.distance;
    $("last-trial").textContent = hud.lastTrial;
    $("mode").textContent = `${cell.state.mode.global} / L ${cell.state.mode.left} / R ${cell.state.mode.right}`;
  }
  banner.hidden = !session.welcome || !session.stale();
  $("view-mode").textContent = view.mode;
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
