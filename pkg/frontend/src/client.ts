// Transport-agnostic teaching client: mirrors the service's state machine
// so the UI can never emit a message that is invalid for its displayed
// state, conflates clicks into rate-limited gaze updates, and folds every
// server message into one idempotently re-renderable view state.

import { depthAt, pixelDepthToWorld, type Snapshot } from "./geometry.js";
import {
  MessageStamper,
  parseServerMessage,
  type Envelope,
  type ServerMessage,
  type SessionState,
  type Vec3,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
}

export interface ViewState {
  connection: "connecting" | "open" | "closed";
  session: SessionState;
  /** present exactly while an object is proposed */
  bbox: { min: Vec3; max: Vec3 } | null;
  progress: number;
  /** completion banner payload after record_done */
  completedFrames: number | null;
  failureReason: string | null;
  hint: string | null;
  lastError: { code: string; message: string } | null;
}

const GAZE_MIN_INTERVAL_MS = 1000 / 30; // at most 30 gaze updates per second

// states in which each outbound message type is legal on the server
const GAZE_OK: ReadonlySet<SessionState> = new Set(["gaze_tracking", "object_proposed", "done"]);

export interface ClientOptions {
  now?: () => number;
  /** optional eye-tracker-style jitter added to each gaze point (meters) */
  jitter?: () => Vec3;
  onChange?: (view: ViewState) => void;
}

export class TeachClient {
  readonly view: ViewState = {
    connection: "connecting",
    session: "idle",
    bbox: null,
    progress: 0,
    completedFrames: null,
    failureReason: null,
    hint: null,
    lastError: null,
  };

  private socket: SocketLike;
  private snapshot: Snapshot;
  private stamper = new MessageStamper();
  private lastServerSeq = 0;
  private lastGazeSentAt = -Infinity;
  private readonly now: () => number;
  private readonly jitter?: () => Vec3;
  private readonly onChange?: (view: ViewState) => void;

  constructor(socket: SocketLike, snapshot: Snapshot, options: ClientOptions = {}) {
    this.socket = socket;
    this.snapshot = snapshot;
    this.now = options.now ?? (() => Date.now());
    this.jitter = options.jitter;
    this.onChange = options.onChange;
  }

  // ------------------------------------------------------------ user input

  /** Click at spectator pixel (u, v): lift through the depth snapshot and
   * send a gaze update. Returns false (with a hint) when the click lands
   * on no surface, arrives too fast, or the state forbids gazing. */
  clickToGaze(u: number, v: number): boolean {
    if (this.view.connection !== "open" || !GAZE_OK.has(this.view.session)) return false;
    const t = this.now();
    if (t - this.lastGazeSentAt < GAZE_MIN_INTERVAL_MS) return false;
    const z = depthAt(this.snapshot, u, v);
    if (z <= 0) {
      this.update({ hint: "no surface under the cursor" });
      return false;
    }
    let p = pixelDepthToWorld(u, v, z, this.snapshot.intrinsics, this.snapshot.pose);
    if (this.jitter) {
      const j = this.jitter();
      p = [p[0] + j[0], p[1] + j[1], p[2] + j[2]];
    }
    this.lastGazeSentAt = t;
    this.send("gaze_update", { x_m: p[0], y_m: p[1], z_m: p[2] });
    this.update({ hint: null });
    return true;
  }

  /** Confirm the proposed object (legal only while one is proposed). */
  select(): boolean {
    if (this.view.connection !== "open" || this.view.session !== "object_proposed") return false;
    this.send("select_object", {});
    return true;
  }

  /** Submit the class name (legal only while naming; empty names blocked
   * client-side with a hint). */
  submitClass(name: string): boolean {
    if (this.view.connection !== "open" || this.view.session !== "naming") return false;
    if (!name.trim()) {
      this.update({ hint: "class name must not be empty" });
      return false;
    }
    this.send("provide_class", { name: name.trim() });
    this.update({ hint: null, progress: 0, completedFrames: null });
    return true;
  }

  /** Abort the running recording. */
  cancel(): boolean {
    if (this.view.connection !== "open" || this.view.session !== "recording") return false;
    this.send("cancel", {});
    return true;
  }

  // ------------------------------------------------------------- transport

  handleOpen(): void {
    this.update({ connection: "open" });
  }

  /** Attach a fresh socket after a drop; the view resyncs from the next
   * state_changed the server sends. */
  reconnect(socket: SocketLike): void {
    this.socket = socket;
    this.stamper = new MessageStamper();
    this.lastServerSeq = 0;
    this.update({ connection: "connecting" });
  }

  handleClose(): void {
    this.update({ connection: "closed" });
  }

  handleRaw(raw: string): void {
    const msg = parseServerMessage(raw);
    if (!msg) return;
    if (msg.seq <= this.lastServerSeq) return; // stale or duplicate
    this.lastServerSeq = msg.seq;
    this.apply(msg);
  }

  // -------------------------------------------------------------- internals

  private send(type: string, payload: Record<string, unknown>): void {
    const envelope: Envelope = this.stamper.next(type, payload);
    this.socket.send(JSON.stringify(envelope));
  }

  private apply(msg: ServerMessage): void {
    switch (msg.kind) {
      case "state_changed": {
        const patch: Partial<ViewState> = { session: msg.state };
        if (msg.state !== "object_proposed") patch.bbox = null;
        if (msg.state === "failed") patch.failureReason = msg.reason ?? "failed";
        if (msg.state === "recording") {
          patch.progress = 0;
          patch.completedFrames = null;
        }
        this.update(patch);
        break;
      }
      case "bbox3d":
        this.update({ bbox: { min: msg.min, max: msg.max }, hint: null });
        break;
      case "no_object":
        this.update({ hint: "nothing selectable under the gaze" });
        break;
      case "record_progress":
        this.update({ progress: msg.fraction });
        break;
      case "record_done":
        this.update({ completedFrames: msg.frameCount, progress: 1 });
        break;
      case "error":
        this.update({ lastError: { code: msg.code, message: msg.message } });
        break;
    }
  }

  private update(patch: Partial<ViewState>): void {
    Object.assign(this.view, patch);
    // the bbox overlay exists exactly while an object is proposed
    if (this.view.session !== "object_proposed") this.view.bbox = null;
    this.onChange?.({ ...this.view });
  }
}
