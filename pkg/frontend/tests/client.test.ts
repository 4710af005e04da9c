import { describe, expect, it } from "vitest";

import { TeachClient, type SocketLike, type ViewState } from "../src/client.js";
import type { Snapshot } from "../src/geometry.js";
import type { SessionState } from "../src/protocol.js";

// Spectator camera one meter above the ground looking straight down; a
// 5 cm-tall object occupies pixel rows 10..19, cols 30..39; pixels in
// rows 0..4, cols 0..4 have no depth return at all.
function makeSnapshot(): Snapshot {
  const width = 64;
  const height = 48;
  const depth = new Float32Array(width * height).fill(1.0);
  for (let r = 10; r < 20; r++) for (let c = 30; c < 40; c++) depth[r * width + c] = 0.95;
  for (let r = 0; r < 5; r++) for (let c = 0; c < 5; c++) depth[r * width + c] = 0;
  return {
    intrinsics: { fx: 100, fy: 100, cx: 32, cy: 24, width, height },
    pose: { translation: [0, 0, 1], rotationWxyz: [0, Math.SQRT1_2, Math.SQRT1_2, 0] },
    depth,
    rgbPngB64: "",
  };
}

const ON_OBJECT: [number, number] = [35, 15];
const ON_GROUND: [number, number] = [10, 40];
const NO_SURFACE: [number, number] = [2, 2];

class Recorder implements SocketLike {
  sent: { type: string; payload: Record<string, unknown>; seq: number; at: number }[] = [];
  constructor(private clock: () => number) {}
  send(data: string): void {
    const env = JSON.parse(data);
    this.sent.push({ type: env.type, payload: env.payload, seq: env.seq, at: this.clock() });
  }
}

function makeClient(opts: { jitter?: () => [number, number, number] } = {}) {
  let time = 0;
  const clock = () => time;
  const socket = new Recorder(clock);
  const views: ViewState[] = [];
  const client = new TeachClient(socket, makeSnapshot(), {
    now: clock,
    jitter: opts.jitter,
    onChange: (v) => views.push(v),
  });
  client.handleOpen();
  let serverSeq = 0;
  const fromServer = (type: string, payload: Record<string, unknown> = {}, seq?: number) => {
    if (seq === undefined) seq = ++serverSeq;
    else serverSeq = Math.max(serverSeq, seq);
    client.handleRaw(JSON.stringify({ v: 1, seq, type, payload }));
  };
  fromServer("state_changed", { state: "gaze_tracking" });
  return { client, socket, views, fromServer, advance: (ms: number) => (time += ms) };
}

describe("click to gaze", () => {
  it("sends a gaze update computed from the depth snapshot", () => {
    const { client, socket } = makeClient();
    expect(client.clickToGaze(...ON_OBJECT)).toBe(true);
    expect(socket.sent).toHaveLength(1);
    const p = socket.sent[0].payload as { x_m: number; y_m: number; z_m: number };
    expect(socket.sent[0].type).toBe("gaze_update");
    expect(p.z_m).toBeCloseTo(0.05, 6); // ground at 0, object top at 5 cm (float32 depth)
  });

  it("applies the optional jitter", () => {
    const { client, socket } = makeClient({ jitter: () => [0.001, -0.002, 0.003] });
    client.clickToGaze(...ON_GROUND);
    const p = socket.sent[0].payload as { x_m: number; y_m: number; z_m: number };
    expect(p.z_m).toBeCloseTo(0.003, 9);
  });

  it("shows a hint and sends nothing for a no-surface click", () => {
    const { client, socket } = makeClient();
    expect(client.clickToGaze(...NO_SURFACE)).toBe(false);
    expect(socket.sent).toHaveLength(0);
    expect(client.view.hint).toMatch(/no surface/);
  });

  it("throttles to at most 30 messages per second", () => {
    const { client, socket, advance } = makeClient();
    for (let i = 0; i < 100; i++) {
      client.clickToGaze(...ON_OBJECT);
      advance(10); // clicking at 100 Hz
    }
    expect(socket.sent.length).toBeLessThanOrEqual(31);
    for (let i = 1; i < socket.sent.length; i++) {
      expect(socket.sent[i].at - socket.sent[i - 1].at).toBeGreaterThanOrEqual(1000 / 30 - 1e-9);
    }
  });
});

describe("state gating", () => {
  it("walks the happy path and blocks everything else", () => {
    const { client, socket, fromServer } = makeClient();
    expect(client.select()).toBe(false); // nothing proposed yet
    expect(client.submitClass("mug")).toBe(false);
    expect(client.cancel()).toBe(false);

    client.clickToGaze(...ON_OBJECT);
    fromServer("state_changed", { state: "object_proposed" });
    fromServer("bbox3d", { min_m: [0, 0, 0], max_m: [0.1, 0.1, 0.05] });
    expect(client.view.bbox).not.toBeNull();

    expect(client.select()).toBe(true);
    fromServer("state_changed", { state: "naming" });
    expect(client.view.bbox).toBeNull(); // overlay only while proposed
    expect(client.clickToGaze(...ON_OBJECT)).toBe(false); // gaze ignored while naming

    expect(client.submitClass("   ")).toBe(false);
    expect(client.view.hint).toMatch(/empty/);
    expect(client.submitClass("mug")).toBe(true);
    fromServer("state_changed", { state: "recording" });
    expect(client.clickToGaze(...ON_OBJECT)).toBe(false);
    expect(client.select()).toBe(false);

    fromServer("record_progress", { fraction: 0.5 });
    expect(client.view.progress).toBe(0.5);
    fromServer("record_done", { frame_count: 42 });
    fromServer("state_changed", { state: "done" });
    expect(client.view.completedFrames).toBe(42);

    // from done, the next gaze is legal again
    expect(client.clickToGaze(...ON_OBJECT)).toBe(false); // throttled (same tick)
    const types = socket.sent.map((m) => m.type);
    expect(types).toEqual(["gaze_update", "select_object", "provide_class"]);
  });

  it("allows cancel only while recording", () => {
    const { client, socket, fromServer } = makeClient();
    client.clickToGaze(...ON_OBJECT);
    fromServer("state_changed", { state: "object_proposed" });
    fromServer("bbox3d", { min_m: [0, 0, 0], max_m: [0.1, 0.1, 0.05] });
    client.select();
    fromServer("state_changed", { state: "naming" });
    client.submitClass("mug");
    fromServer("state_changed", { state: "recording" });
    expect(client.cancel()).toBe(true);
    fromServer("state_changed", { state: "failed", reason: "cancelled" });
    expect(client.view.failureReason).toBe("cancelled");
    expect(client.cancel()).toBe(false); // terminal
    expect(socket.sent.map((m) => m.type)).toContain("cancel");
  });
});

describe("server message handling", () => {
  it("drops stale and duplicate sequence numbers", () => {
    const { client, fromServer } = makeClient();
    fromServer("record_progress", { fraction: 0.4 }, 10);
    fromServer("record_progress", { fraction: 0.1 }, 9); // stale: ignored
    fromServer("record_progress", { fraction: 0.4 }, 10); // duplicate: ignored
    expect(client.view.progress).toBe(0.4);
  });

  it("re-renders idempotently from repeated state messages", () => {
    const { client, fromServer } = makeClient();
    fromServer("state_changed", { state: "object_proposed" });
    fromServer("bbox3d", { min_m: [0, 0, 0], max_m: [1, 1, 1] });
    const before = JSON.stringify(client.view);
    fromServer("state_changed", { state: "object_proposed" });
    fromServer("bbox3d", { min_m: [0, 0, 0], max_m: [1, 1, 1] });
    expect(JSON.stringify(client.view)).toBe(before);
  });

  it("resyncs after a reconnect from the next state_changed", () => {
    const { client, fromServer } = makeClient();
    fromServer("state_changed", { state: "object_proposed" });
    client.handleClose();
    expect(client.view.connection).toBe("closed");
    const socket2 = new Recorder(() => 0);
    client.reconnect(socket2);
    client.handleOpen();
    // fresh server sequence numbering after reconnect
    client.handleRaw(JSON.stringify({ v: 1, seq: 1, type: "state_changed",
                                      payload: { state: "gaze_tracking" } }));
    expect(client.view.session).toBe("gaze_tracking");
    expect(client.view.connection).toBe("open");
  });

  it("surfaces error payloads without changing the session state", () => {
    const { client, fromServer } = makeClient();
    fromServer("error", { code: "busy", message: "another client is connected" });
    expect(client.view.lastError?.code).toBe("busy");
    expect(client.view.session).toBe("gaze_tracking");
  });
});

// ----------------------------------------------------------------- monkey run

type MockState = SessionState;

/** Server-side transition semantics, used to judge every client send. */
class MockServer {
  state: MockState = "gaze_tracking";
  violations: string[] = [];
  private seq = 0;
  private remaining = 0;
  private lastClientSeq = 0;

  constructor(private deliver: (raw: string) => void) {}

  private emit(type: string, payload: Record<string, unknown> = {}) {
    this.seq += 1;
    this.deliver(JSON.stringify({ v: 1, seq: this.seq, type, payload }));
  }

  start() {
    this.emit("state_changed", { state: this.state });
  }

  receive(raw: string) {
    const env = JSON.parse(raw);
    if (typeof env.seq !== "number" || env.seq <= this.lastClientSeq) {
      this.violations.push(`bad client seq ${env.seq}`);
      return;
    }
    this.lastClientSeq = env.seq;
    switch (env.type) {
      case "gaze_update": {
        if (!["gaze_tracking", "object_proposed", "done"].includes(this.state)) {
          this.violations.push(`gaze_update while ${this.state}`);
          return;
        }
        if (this.state === "done") {
          this.state = "gaze_tracking";
          this.emit("state_changed", { state: this.state });
        }
        const onObject = env.payload.z_m > 0.01; // objects stand above the ground
        if (onObject) {
          this.state = "object_proposed";
          this.emit("state_changed", { state: this.state });
          this.emit("bbox3d", { min_m: [0, 0, 0], max_m: [0.1, 0.1, 0.05] });
        } else {
          if (this.state !== "gaze_tracking") {
            this.state = "gaze_tracking";
            this.emit("state_changed", { state: this.state });
          }
          this.emit("no_object", {});
        }
        break;
      }
      case "select_object":
        if (this.state !== "object_proposed") {
          this.violations.push(`select_object while ${this.state}`);
          return;
        }
        this.state = "naming";
        this.emit("state_changed", { state: this.state });
        break;
      case "provide_class":
        if (this.state !== "naming") {
          this.violations.push(`provide_class while ${this.state}`);
          return;
        }
        if (typeof env.payload.name !== "string" || !env.payload.name.trim()) {
          this.violations.push("empty class name reached the server");
          return;
        }
        this.state = "recording";
        this.remaining = 5;
        this.emit("state_changed", { state: this.state });
        break;
      case "cancel":
        if (this.state !== "recording") {
          this.violations.push(`cancel while ${this.state}`);
          return;
        }
        this.state = "failed";
        this.remaining = 0;
        this.emit("state_changed", { state: this.state, reason: "cancelled" });
        // a fresh mock takes over after failure in the monkey loop
        break;
      default:
        this.violations.push(`unknown client type ${env.type}`);
    }
  }

  /** time passing: recording progresses one step */
  tick() {
    if (this.state === "recording" && this.remaining > 0) {
      this.remaining -= 1;
      this.emit("record_progress", { fraction: (5 - this.remaining) / 5 });
      if (this.remaining === 0) {
        this.emit("record_done", { frame_count: 5 });
        this.state = "done";
        this.emit("state_changed", { state: this.state });
      }
    }
  }
}

describe("monkey session", () => {
  it("never emits a state-invalid message across five simulated minutes", () => {
    let time = 0;
    const clock = () => time;
    let rng = 12345;
    const rand = () => {
      // deterministic LCG so failures reproduce
      rng = (rng * 1103515245 + 12345) % 2147483648;
      return rng / 2147483648;
    };

    const pendingToClient: string[] = [];
    const server = new MockServer((raw) => pendingToClient.push(raw));
    const client = new TeachClient(
      { send: (raw) => server.receive(raw) },
      makeSnapshot(),
      { now: clock },
    );
    client.handleOpen();
    server.start();

    const names = ["mug", "", "   ", "stapler", "x"];
    let actions = 0;
    while (time < 5 * 60 * 1000) {
      while (pendingToClient.length) client.handleRaw(pendingToClient.shift()!);
      const roll = rand();
      if (roll < 0.55) {
        const u = Math.floor(rand() * 64);
        const v = Math.floor(rand() * 48);
        client.clickToGaze(u, v);
      } else if (roll < 0.7) {
        client.select();
      } else if (roll < 0.85) {
        client.submitClass(names[Math.floor(rand() * names.length)]);
      } else if (roll < 0.95) {
        client.cancel();
      } else {
        server.tick();
      }
      actions += 1;
      time += 5 + rand() * 115; // 5-120 ms between monkey actions
      if (server.state === "failed") {
        // operator restarts the session; client resyncs via state_changed
        server.state = "gaze_tracking";
        server.start();
      }
    }
    while (pendingToClient.length) client.handleRaw(pendingToClient.shift()!);

    expect(actions).toBeGreaterThan(2000);
    expect(server.violations).toEqual([]);
  });
});
