import { describe, expect, it } from "vitest";

import {
  decodeSnapshot,
  depthAt,
  pixelDepthToWorld,
  projectBoxOutline,
  projectWorldPoint,
  quatToMatrix,
  type CameraPose,
  type Intrinsics,
} from "../src/geometry.js";

const K: Intrinsics = { fx: 100, fy: 100, cx: 32, cy: 24, width: 64, height: 48 };
const IDENTITY: CameraPose = { translation: [0, 0, 0], rotationWxyz: [1, 0, 0, 0] };

// camera one meter up, looking straight down, with world -y as camera up:
// camera x -> world (0,-1,0), y -> (-1,0,0), z -> (0,0,-1)
const DOWN: CameraPose = {
  translation: [0, 0, 1],
  rotationWxyz: [0, Math.SQRT1_2, Math.SQRT1_2, 0],
};

describe("quatToMatrix", () => {
  it("maps the identity quaternion to the identity matrix", () => {
    expect(quatToMatrix([1, 0, 0, 0])).toEqual([
      [1, 0, 0],
      [0, 1, 0],
      [0, 0, 1],
    ]);
  });

  it("encodes a 90-degree z rotation", () => {
    const m = quatToMatrix([Math.SQRT1_2, 0, 0, Math.SQRT1_2]);
    expect(m[0][0]).toBeCloseTo(0, 12);
    expect(m[1][0]).toBeCloseTo(1, 12);
    expect(m[0][1]).toBeCloseTo(-1, 12);
  });
});

describe("pixelDepthToWorld", () => {
  it("lifts the principal point along the optical axis", () => {
    expect(pixelDepthToWorld(32, 24, 2.0, K, IDENTITY)).toEqual([0, 0, 2]);
  });

  it("uses u = fx*x/z + cx in reverse", () => {
    const [x, y, z] = pixelDepthToWorld(42, 24, 2.0, K, IDENTITY);
    expect(x).toBeCloseTo(0.2, 12); // (42-32)/100 * 2
    expect(y).toBeCloseTo(0, 12);
    expect(z).toBe(2);
  });

  it("applies the camera pose", () => {
    const p = pixelDepthToWorld(32, 24, 1.0, K, DOWN);
    expect(p[0]).toBeCloseTo(0, 9);
    expect(p[1]).toBeCloseTo(0, 9);
    expect(p[2]).toBeCloseTo(0, 9); // one meter straight down hits the ground
  });

  it("round-trips with projectWorldPoint", () => {
    for (const [u, v, z] of [
      [10.5, 40.25, 0.8],
      [0, 0, 2.5],
      [63, 47, 1.1],
    ]) {
      const world = pixelDepthToWorld(u, v, z, K, DOWN);
      const uv = projectWorldPoint(world, K, DOWN);
      expect(uv).not.toBeNull();
      expect(uv![0]).toBeCloseTo(u, 9);
      expect(uv![1]).toBeCloseTo(v, 9);
    }
  });
});

describe("projectWorldPoint", () => {
  it("returns null behind the camera", () => {
    expect(projectWorldPoint([0, 0, -1], K, IDENTITY)).toBeNull();
    expect(projectWorldPoint([0, 0, 2], K, DOWN)).toBeNull(); // above a down-looking camera
  });
});

describe("projectBoxOutline", () => {
  it("covers the projections of all eight corners", () => {
    const rect = projectBoxOutline([-0.1, -0.1, 0], [0.1, 0.1, 0.1], K, DOWN);
    expect(rect).not.toBeNull();
    for (const x of [-0.1, 0.1])
      for (const y of [-0.1, 0.1])
        for (const z of [0, 0.1]) {
          const uv = projectWorldPoint([x, y, z], K, DOWN)!;
          expect(uv[0]).toBeGreaterThanOrEqual(rect!.u0 - 1e-9);
          expect(uv[0]).toBeLessThanOrEqual(rect!.u1 + 1e-9);
          expect(uv[1]).toBeGreaterThanOrEqual(rect!.v0 - 1e-9);
          expect(uv[1]).toBeLessThanOrEqual(rect!.v1 + 1e-9);
        }
  });

  it("is null when the box is entirely behind the camera", () => {
    expect(projectBoxOutline([-1, -1, 2], [1, 1, 3], K, DOWN)).toBeNull();
  });
});

describe("decodeSnapshot / depthAt", () => {
  it("decodes little-endian millimeter depth and indexes row-major", () => {
    const mm = new Uint16Array([0, 1500, 2000, 65535, 1, 999]); // 3x2 image
    const b64 = Buffer.from(mm.buffer).toString("base64");
    const snap = decodeSnapshot({
      rgb_png_b64: "",
      depth_mm_le_b64: b64,
      intrinsics: { fx_px: 10, fy_px: 10, cx_px: 1, cy_px: 1, width_px: 3, height_px: 2 },
      camera_pose: { translation_m: [0, 0, 0], rotation_wxyz: [1, 0, 0, 0] },
    });
    expect(depthAt(snap, 0, 0)).toBe(0);
    expect(depthAt(snap, 1, 0)).toBeCloseTo(1.5, 6);
    expect(depthAt(snap, 0, 1)).toBeCloseTo(65.535, 4); // float32 storage
    expect(depthAt(snap, 2, 1)).toBeCloseTo(0.999, 6);
    // clicks off the image report no surface
    expect(depthAt(snap, -1, 0)).toBe(0);
    expect(depthAt(snap, 3, 0)).toBe(0);
  });
});
