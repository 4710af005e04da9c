// Just enough camera math for the spectator view: lifting a clicked pixel
// to a 3D world point via the depth snapshot, and projecting 3D boxes back
// into the image for the overlay.
//
// Conventions match the service: camera +z forward, +x right, +y down;
// pixel (i, j) samples continuous image coordinates (u, v) = (i, j);
// a pose is camera-to-world with a wxyz unit quaternion.

import type { Vec3 } from "./protocol.js";

export interface Intrinsics {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  width: number;
  height: number;
}

export interface CameraPose {
  translation: Vec3;
  rotationWxyz: [number, number, number, number];
}

export type Mat3 = [Vec3, Vec3, Vec3];

export function quatToMatrix(q: [number, number, number, number]): Mat3 {
  const [w, x, y, z] = q;
  return [
    [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
    [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
    [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
  ];
}

function matVec(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
    m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
    m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
  ];
}

function matTVec(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
    m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
    m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
  ];
}

/** Back-project pixel (u, v) with z-depth (meters) into the world frame. */
export function pixelDepthToWorld(
  u: number,
  v: number,
  zDepth: number,
  k: Intrinsics,
  pose: CameraPose,
): Vec3 {
  const cam: Vec3 = [(zDepth * (u - k.cx)) / k.fx, (zDepth * (v - k.cy)) / k.fy, zDepth];
  const world = matVec(quatToMatrix(pose.rotationWxyz), cam);
  return [
    world[0] + pose.translation[0],
    world[1] + pose.translation[1],
    world[2] + pose.translation[2],
  ];
}

/** Project a world point to pixels; null when at or behind the camera. */
export function projectWorldPoint(p: Vec3, k: Intrinsics, pose: CameraPose): [number, number] | null {
  const rel: Vec3 = [
    p[0] - pose.translation[0],
    p[1] - pose.translation[1],
    p[2] - pose.translation[2],
  ];
  const cam = matTVec(quatToMatrix(pose.rotationWxyz), rel);
  if (cam[2] <= 1e-6) return null;
  return [(k.fx * cam[0]) / cam[2] + k.cx, (k.fy * cam[1]) / cam[2] + k.cy];
}

export interface PixelRect {
  u0: number;
  v0: number;
  u1: number;
  v1: number;
}

/** Pixel rect covering a world-frame axis-aligned box (its 8 projected
 * corners); null when every corner is behind the camera. */
export function projectBoxOutline(
  min: Vec3,
  max: Vec3,
  k: Intrinsics,
  pose: CameraPose,
): PixelRect | null {
  let u0 = Infinity;
  let v0 = Infinity;
  let u1 = -Infinity;
  let v1 = -Infinity;
  for (const x of [min[0], max[0]])
    for (const y of [min[1], max[1]])
      for (const z of [min[2], max[2]]) {
        const uv = projectWorldPoint([x, y, z], k, pose);
        if (!uv) continue;
        u0 = Math.min(u0, uv[0]);
        v0 = Math.min(v0, uv[1]);
        u1 = Math.max(u1, uv[0]);
        v1 = Math.max(v1, uv[1]);
      }
  if (!Number.isFinite(u0)) return null;
  return { u0, v0, u1, v1 };
}

// ------------------------------------------------------------- snapshot data

export interface Snapshot {
  intrinsics: Intrinsics;
  pose: CameraPose;
  /** row-major z-depth in meters, 0 = no surface */
  depth: Float32Array;
  rgbPngB64: string;
}

function base64ToBytes(b64: string): Uint8Array {
  if (typeof atob === "function") {
    const bin = atob(b64);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }
  // node (tests)
  return new Uint8Array(Buffer.from(b64, "base64"));
}

/** Decode the service's GET /snapshot payload. */
export function decodeSnapshot(data: {
  rgb_png_b64: string;
  depth_mm_le_b64: string;
  intrinsics: Record<string, number>;
  camera_pose: { translation_m: number[]; rotation_wxyz: number[] };
}): Snapshot {
  const k: Intrinsics = {
    fx: data.intrinsics["fx_px"],
    fy: data.intrinsics["fy_px"],
    cx: data.intrinsics["cx_px"],
    cy: data.intrinsics["cy_px"],
    width: data.intrinsics["width_px"],
    height: data.intrinsics["height_px"],
  };
  const bytes = base64ToBytes(data.depth_mm_le_b64);
  const mm = new Uint16Array(bytes.buffer, bytes.byteOffset, bytes.byteLength / 2);
  const depth = new Float32Array(mm.length);
  for (let i = 0; i < mm.length; i++) depth[i] = mm[i] / 1000;
  return {
    intrinsics: k,
    pose: {
      translation: data.camera_pose.translation_m as Vec3,
      rotationWxyz: data.camera_pose.rotation_wxyz as [number, number, number, number],
    },
    depth,
    rgbPngB64: data.rgb_png_b64,
  };
}

/** Depth at integer pixel (meters); 0 means no surface under the pixel. */
export function depthAt(snapshot: Snapshot, u: number, v: number): number {
  const col = Math.round(u);
  const row = Math.round(v);
  const { width, height } = snapshot.intrinsics;
  if (col < 0 || row < 0 || col >= width || row >= height) return 0;
  return snapshot.depth[row * width + col];
}
