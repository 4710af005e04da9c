// Wire protocol (version 1): JSON envelopes with per-direction strictly
// increasing sequence numbers, one message per WebSocket text frame.

export const PROTOCOL_VERSION = 1;

export type SessionState =
  | "idle"
  | "gaze_tracking"
  | "object_proposed"
  | "naming"
  | "recording"
  | "done"
  | "failed";

export interface Envelope {
  v: number;
  seq: number;
  type: string;
  payload: Record<string, unknown>;
}

export type ServerMessage =
  | { kind: "state_changed"; seq: number; state: SessionState; reason?: string }
  | { kind: "bbox3d"; seq: number; min: Vec3; max: Vec3 }
  | { kind: "no_object"; seq: number }
  | { kind: "record_progress"; seq: number; fraction: number }
  | { kind: "record_done"; seq: number; frameCount: number }
  | { kind: "error"; seq: number; code: string; message: string };

export type Vec3 = [number, number, number];

const SESSION_STATES = new Set([
  "idle",
  "gaze_tracking",
  "object_proposed",
  "naming",
  "recording",
  "done",
  "failed",
]);

function vec3(value: unknown): Vec3 | null {
  if (!Array.isArray(value) || value.length !== 3) return null;
  if (!value.every((x) => typeof x === "number" && Number.isFinite(x))) return null;
  return [value[0], value[1], value[2]];
}

/** Decode one server frame; null for anything malformed or unknown. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const env = data as Partial<Envelope>;
  if (env.v !== PROTOCOL_VERSION || typeof env.seq !== "number" || typeof env.type !== "string")
    return null;
  const payload = (env.payload ?? {}) as Record<string, unknown>;
  const seq = env.seq;
  switch (env.type) {
    case "state_changed": {
      const state = payload["state"];
      if (typeof state !== "string" || !SESSION_STATES.has(state)) return null;
      const reason = typeof payload["reason"] === "string" ? (payload["reason"] as string) : undefined;
      return { kind: "state_changed", seq, state: state as SessionState, reason };
    }
    case "bbox3d": {
      const min = vec3(payload["min_m"]);
      const max = vec3(payload["max_m"]);
      if (!min || !max) return null;
      return { kind: "bbox3d", seq, min, max };
    }
    case "no_object":
      return { kind: "no_object", seq };
    case "record_progress": {
      const fraction = payload["fraction"];
      if (typeof fraction !== "number") return null;
      return { kind: "record_progress", seq, fraction };
    }
    case "record_done": {
      const count = payload["frame_count"];
      if (typeof count !== "number") return null;
      return { kind: "record_done", seq, frameCount: count };
    }
    case "error": {
      const code = payload["code"];
      const message = payload["message"];
      if (typeof code !== "string" || typeof message !== "string") return null;
      return { kind: "error", seq, code, message };
    }
    default:
      return null;
  }
}

/** Stamps outbound envelopes with this client's sequence numbers. */
export class MessageStamper {
  private seq = 0;

  next(type: string, payload: Record<string, unknown> = {}): Envelope {
    this.seq += 1;
    return { v: PROTOCOL_VERSION, seq: this.seq, type, payload };
  }
}
