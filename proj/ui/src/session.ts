// Connection to /session. Incoming snapshots land in a single latest-snapshot
// cell that the render loop reads at its own pace.
import {
  parseServerMessage,
  type ErrorMessage,
  type EventMessage,
  type Haptic,
  type InputMessage,
  type Metrics,
  type State,
  type TrialCommand,
  type Welcome,
} from "./protocol.js";

// A snapshot older than this marks the connection degraded.
export const STALE_AFTER_MS = 250;

// The subset of the WebSocket API used here; browsers and the `ws` package both fit.
export interface SocketLike {
  readonly readyState: number;
  send(data: string): void;
  close(code?: number): void;
  onopen: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: { code: number }) => void) | null;
  onerror: ((ev: unknown) => void) | null;
}

export interface SnapshotCell {
  state: State;
  receivedMs: number;
}

export interface SessionHandlers {
  welcome?: (w: Welcome) => void;
  state?: (s: State) => void;
  event?: (e: EventMessage) => void;
  metrics?: (m: Metrics) => void;
  haptic?: (h: Haptic) => void;
  error?: (e: ErrorMessage) => void;
  closed?: (code: number) => void;
}

const OPEN = 1;

export class SessionClient {
  welcome: Welcome | null = null;
  latest: SnapshotCell | null = null;
  lastMetrics: Metrics | null = null;
  snapshots = 0;
  private readonly socket: SocketLike;

  constructor(
    socket: SocketLike,
    private readonly handlers: SessionHandlers = {},
    private readonly now: () => number = () => performance.now(),
    role = "trainer",
  ) {
    this.socket = socket;
    socket.onopen = () => socket.send(JSON.stringify({ type: "hello", role }));
    socket.onmessage = (ev) => this.receive(String(ev.data));
    socket.onclose = (ev) => this.handlers.closed?.(ev.code);
  }

  get connected(): boolean {
    return this.welcome !== null && this.socket.readyState === OPEN;
  }

  stale(nowMs: number = this.now()): boolean {
    return this.latest === null || nowMs - this.latest.receivedMs > STALE_AFTER_MS;
  }

  sendInput(message: InputMessage): void {
    this.send(message);
  }

  sendTrial(cmd: TrialCommand): void {
    this.send({ type: "trial", cmd });
  }

  close(): void {
    this.socket.close(1000);
  }

  private send(message: object): void {
    if (this.connected) {
      this.socket.send(JSON.stringify(message));
    }
  }

  private receive(text: string): void {
    const m = parseServerMessage(text);
    switch (m.type) {
      case "welcome":
        this.welcome = m;
        this.handlers.welcome?.(m);
        break;
      case "state":
        this.latest = { state: m, receivedMs: this.now() };
        ++this.snapshots;
        this.handlers.state?.(m);
        break;
      case "event":
        this.handlers.event?.(m);
        break;
      case "metrics":
        this.lastMetrics = m;
        this.handlers.metrics?.(m);
        break;
      case "haptic":
        this.handlers.haptic?.(m);
        break;
      case "error":
        this.handlers.error?.(m);
        break;
    }
  }
}
