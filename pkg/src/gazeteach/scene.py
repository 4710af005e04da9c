"""Synthetic tabletop world with a ray-cast depth camera and ground-truth labels.

The world is an infinite ground plane at z = 0 plus box / sphere / cylinder
primitives, each carrying an object id, class name and color. Rendering
casts one ray per pixel center and resolves the nearest analytic hit, so
the per-pixel id map is exact ground truth. Depth images store z-depth
(distance along the optical axis) in meters as float32, 0 = no return.

Rays are kept unnormalized with camera-frame z component 1, so the ray
parameter of a hit *is* its z-depth; sensor noise specified along the ray
is rescaled per pixel accordingly.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from gazeteach.geometry import (
    CameraIntrinsics,
    PointCloud,
    Pose,
    UnitQuaternion,
    invert,
    look_at,
)

_HIT_EPS = 1e-6  # minimum ray parameter for a valid hit (meters of z-depth)
_MAX_PRIMITIVES = 120  # renderer packs primitive slots into an int8 map

BOX = "box"
SPHERE = "sphere"
CYLINDER = "cylinder"
SHAPES = (BOX, SPHERE, CYLINDER)


class SceneError(ValueError):
    """Invalid scene description."""


@dataclass(frozen=True)
class Primitive:
    """One rigid shape; local frame centered at the shape's centroid.

    dimensions: box (sx, sy, sz) full extents; sphere (radius,);
    cylinder (radius, height), axis along local +z.
    """

    shape: str
    dimensions: tuple[float, ...]
    pose: Pose  # object frame -> world
    object_id: int
    class_name: str
    color: tuple[float, float, float] = (0.7, 0.7, 0.7)
    dropout: float = 0.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise SceneError(f"unknown shape {self.shape!r}, expected one of {SHAPES}")
        expected = {BOX: 3, SPHERE: 1, CYLINDER: 2}[self.shape]
        dims = tuple(float(d) for d in self.dimensions)
        if len(dims) != expected:
            raise SceneError(f"{self.shape} needs {expected} dimension(s), got {dims}")
        if any(d <= 0 for d in dims):
            raise SceneError(f"dimensions must be positive, got {dims}")
        if self.object_id < 0:
            raise SceneError("object_id must be >= 0")
        if not 0.0 <= self.dropout <= 1.0:
            raise SceneError("dropout must be in [0, 1]")
        object.__setattr__(self, "dimensions", dims)
        object.__setattr__(self, "color", tuple(float(c) for c in self.color))

    def bounding_radius(self) -> float:
        if self.shape == BOX:
            return 0.5 * math.sqrt(sum(d * d for d in self.dimensions))
        if self.shape == SPHERE:
            return self.dimensions[0]
        r, h = self.dimensions
        return math.sqrt(r * r + 0.25 * h * h)

    def min_world_z(self) -> float:
        """Lowest world z of the shape (support point along -z)."""
        rot = self.pose.rotation.to_matrix()
        tz = self.pose.translation[2]
        if self.shape == BOX:
            half = 0.5 * np.asarray(self.dimensions)
            return float(tz - np.abs(rot[2, :]) @ half)
        if self.shape == SPHERE:
            return float(tz - self.dimensions[0])
        r, h = self.dimensions
        az = abs(rot[2, 2])
        return float(tz - 0.5 * h * az - r * math.sqrt(max(0.0, 1.0 - az * az)))


@dataclass(frozen=True)
class Scene:
    """Ground plane at z = 0 plus primitives resting on or above it."""

    primitives: tuple[Primitive, ...]
    rng_seed: int = 0
    ground_color: tuple[float, float, float] = (0.45, 0.42, 0.38)
    light_direction: tuple[float, float, float] = (0.3, -0.2, 1.0)
    ambient: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        if len(self.primitives) > _MAX_PRIMITIVES:
            raise SceneError(f"scenes support at most {_MAX_PRIMITIVES} primitives")
        ids = [p.object_id for p in self.primitives]
        if len(set(ids)) != len(ids):
            raise SceneError(f"object ids must be unique within a scene, got {ids}")
        for p in self.primitives:
            if p.min_world_z() < -1e-6:
                raise SceneError(
                    f"primitive {p.object_id} ({p.class_name}) dips below the ground "
                    f"(min z = {p.min_world_z():.4f} m)"
                )

    def primitive(self, object_id: int) -> Primitive:
        for p in self.primitives:
            if p.object_id == object_id:
                return p
        raise SceneError(f"no primitive with object_id {object_id}")


@dataclass(frozen=True)
class DepthImage:
    """Per-pixel z-depth in meters (0 = no return) plus the object-id map.

    id_map is -1 for ground and sky; it reflects true visibility and is not
    affected by depth noise or dropout.
    """

    depth: np.ndarray
    id_map: np.ndarray

    def __post_init__(self):
        if self.depth.shape != self.id_map.shape:
            raise SceneError("depth and id_map dimensions differ")

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]


# --------------------------------------------------------------- ray casting


@functools.lru_cache(maxsize=8)
def _pixel_ray_grid(k: CameraIntrinsics):
    """Unnormalized camera-frame ray directions per pixel, plus 1/|dir|.

    Direction for pixel (row j, col i) is ((i-cx)/fx, (j-cy)/fy, 1), whose
    camera z component is 1; shared read-only across renders.
    """
    i = (np.arange(k.width, dtype=np.float32) - np.float32(k.cx)) / np.float32(k.fx)
    j = (np.arange(k.height, dtype=np.float32) - np.float32(k.cy)) / np.float32(k.fy)
    v = np.empty((k.height, k.width, 3), dtype=np.float32)
    v[..., 0] = i[None, :]
    v[..., 1] = j[:, None]
    v[..., 2] = 1.0
    inv_norm = 1.0 / np.sqrt(v[..., 0] ** 2 + v[..., 1] ** 2 + 1.0)
    v2 = v.reshape(-1, 3)
    v2.setflags(write=False)
    inv_norm.setflags(write=False)
    return v2, inv_norm


def _intersect_sphere(o, d, radius):
    a = np.einsum("ij,ij->i", d, d)
    b = d @ o
    c = float(o @ o) - radius * radius
    disc = b * b - a * c
    hit = disc >= 0
    sq = np.sqrt(np.where(hit, disc, 0.0))
    s1 = (-b - sq) / a
    s2 = (-b + sq) / a
    s = np.where(s1 > _HIT_EPS, s1, s2)
    hit &= s > _HIT_EPS
    return s, hit, None


def _safe_inv(d):
    tiny = d.dtype.type(1e-30)
    return 1.0 / np.where(np.abs(d) < tiny, np.where(d < 0, -tiny, tiny), d)


def _intersect_box(o, d, extents):
    half = (0.5 * np.asarray(extents)).astype(d.dtype)
    inv = _safe_inv(d)
    t1 = (-half - o) * inv
    t2 = (half - o) * inv
    tmin = np.minimum(t1, t2)
    tmax = np.maximum(t1, t2)
    s_enter = np.max(tmin, axis=1)
    s_exit = np.min(tmax, axis=1)
    hit = (s_exit >= s_enter) & (s_exit > _HIT_EPS)
    inside = s_enter <= _HIT_EPS
    s = np.where(inside, s_exit, s_enter)
    return s, hit, (tmin, tmax, inside)


def _intersect_cylinder(o, d, radius, height):
    half = d.dtype.type(0.5 * height)
    r2 = d.dtype.type(radius * radius)
    a = d[:, 0] ** 2 + d[:, 1] ** 2
    b = o[0] * d[:, 0] + o[1] * d[:, 1]
    c = d.dtype.type(o[0] ** 2 + o[1] ** 2) - r2
    disc = b * b - a * c
    side_ok = (disc >= 0) & (a > 1e-20)
    sq = np.sqrt(np.where(side_ok, disc, 0.0))
    inv_a = 1.0 / np.where(a > 1e-20, a, 1.0)

    candidates = []
    for sgn in (-1.0, 1.0):
        s = (-b + d.dtype.type(sgn) * sq) * inv_a
        z = o[2] + s * d[:, 2]
        ok = side_ok & (s > _HIT_EPS) & (np.abs(z) <= half)
        candidates.append(np.where(ok, s, np.inf))
    inv_dz = _safe_inv(d[:, 2])
    for zcap in (half, -half):
        s = (zcap - o[2]) * inv_dz
        x = o[0] + s * d[:, 0]
        y = o[1] + s * d[:, 1]
        ok = (s > _HIT_EPS) & (x * x + y * y <= r2)
        candidates.append(np.where(ok, s, np.inf))

    stack = np.stack(candidates, axis=0)
    which = np.argmin(stack, axis=0).astype(np.int8)
    s = stack[which, np.arange(stack.shape[1])]
    hit = np.isfinite(s)
    return np.where(hit, s, 0.0), hit, which


def _intersect_local(prim: Primitive, o_local, d_local):
    """Ray parameters, hit mask, and shape-specific data for lazy normals."""
    if prim.shape == SPHERE:
        return _intersect_sphere(o_local, d_local, prim.dimensions[0])
    if prim.shape == BOX:
        return _intersect_box(o_local, d_local, prim.dimensions)
    return _intersect_cylinder(o_local, d_local, prim.dimensions[0], prim.dimensions[1])


def _normals_local(prim: Primitive, o, d, s, aux, idx):
    """Local-frame surface normals for the selected ray subset only."""
    ds = d[idx]
    ss = s[idx][:, None]
    if prim.shape == SPHERE:
        return (o[None, :] + ss * ds) / prim.dimensions[0]
    if prim.shape == BOX:
        tmin, tmax, inside = aux
        ins = inside[idx]
        axis = np.where(ins, np.argmin(tmax[idx], axis=1), np.argmax(tmin[idx], axis=1))
        rows = np.arange(len(ds))
        sign = np.where(ins, 1.0, -1.0) * np.sign(ds[rows, axis])
        normals = np.zeros_like(ds)
        normals[rows, axis] = sign
        return normals
    which = aux[idx]
    radius = prim.dimensions[0]
    p = o[None, :] + ss * ds
    normals = np.zeros_like(ds)
    side = which < 2
    normals[side, 0] = p[side, 0] / radius
    normals[side, 1] = p[side, 1] / radius
    normals[which == 2, 2] = 1.0
    normals[which == 3, 2] = -1.0
    return normals


def _screen_rect(c_cam, radius, k: CameraIntrinsics):
    """Conservative pixel rectangle covering a camera-frame bounding sphere.

    Returns (r0, r1, c0, c1) or None when fully behind the camera; the full
    image when the sphere crosses the camera plane.
    """
    zc = c_cam[2]
    if zc + radius <= _HIT_EPS:
        return None
    if zc - radius <= 1e-6:
        return 0, k.height, 0, k.width
    lo = c_cam - radius
    hi = c_cam + radius
    corners_u = [k.fx * x / z + k.cx for x in (lo[0], hi[0]) for z in (lo[2], hi[2])]
    corners_v = [k.fy * y / z + k.cy for y in (lo[1], hi[1]) for z in (lo[2], hi[2])]
    return _clip_rect(min(corners_u), max(corners_u), min(corners_v), max(corners_v), k)


def _clip_rect(u_min, u_max, v_min, v_max, k: CameraIntrinsics):
    c0 = max(0, int(math.floor(u_min)))
    c1 = min(k.width, int(math.ceil(u_max)) + 1)
    r0 = max(0, int(math.floor(v_min)))
    r1 = min(k.height, int(math.ceil(v_max)) + 1)
    if r0 >= r1 or c0 >= c1:
        return None
    return r0, r1, c0, c1


def _local_corners(prim: Primitive):
    """Vertices of the shape's local bounding box (None for spheres)."""
    if prim.shape == SPHERE:
        return None
    if prim.shape == BOX:
        hx, hy, hz = (0.5 * d for d in prim.dimensions)
    else:
        r, h = prim.dimensions
        hx = hy = r
        hz = 0.5 * h
    return np.array(
        [(sx * hx, sy * hy, sz * hz) for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
    )


def _primitive_rect(prim: Primitive, origin, rot, k: CameraIntrinsics):
    """Tight conservative pixel rect: projected convex hull of the local
    bbox corners when fully in front (projection of a convex solid lies in
    the hull of its projected vertices), else the bounding-sphere rect."""
    c_cam = rot.T @ (prim.pose.translation - origin)
    corners = _local_corners(prim)
    if corners is not None:
        cam_corners = (prim.pose.apply(corners) - origin) @ rot
        z = cam_corners[:, 2]
        if np.all(z > 1e-6):
            u = k.fx * cam_corners[:, 0] / z + k.cx
            v = k.fy * cam_corners[:, 1] / z + k.cy
            return _clip_rect(u.min() - 1, u.max() + 1, v.min() - 1, v.max() + 1, k)
    return _screen_rect(c_cam, prim.bounding_radius(), k)


def _raycast(scene: Scene, camera: Pose, k: CameraIntrinsics, want_rgb: bool):
    """Nearest-hit z-depth (0 = sky), slot map (0 sky, 1 ground, 2+i
    primitive i) and, when requested, the flat-shaded RGB image.

    Ground shading is constant per frame, so the RGB base image is one LUT
    gather; Lambert factors are computed only for pixels a primitive wins.
    """
    v, _ = _pixel_ray_grid(k)
    rot = camera.rotation.to_matrix()
    origin = camera.translation

    light = np.asarray(scene.light_direction, dtype=np.float64)
    light = light / np.linalg.norm(light)

    # ground plane: z-depth = -origin_z / (world dz of the unnormalized ray)
    dzv = (v @ rot[2].astype(np.float32)).reshape(k.height, k.width)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.float32(-origin[2]) / dzv
    ground = z > _HIT_EPS
    np.copyto(z, np.float32(np.inf), where=~ground)
    # ground mask doubles as the slot buffer (0 sky, 1 ground); primitive
    # slots are written over it, which caps scenes at _MAX_PRIMITIVES
    slot = ground.view(np.int8)

    rgb = None
    if want_rgb:
        ground_shade = scene.ambient + (1.0 - scene.ambient) * max(0.0, float(light[2]))
        lut = np.zeros((2, 3), dtype=np.float32)
        lut[1] = np.asarray(scene.ground_color) * ground_shade
        lut8 = (np.clip(lut, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
        rgb = lut8[slot]

    rot32 = rot.astype(np.float32)
    for idx, prim in enumerate(scene.primitives):
        rect = _primitive_rect(prim, origin, rot, k)
        if rect is None:
            continue
        r0, r1, c0, c1 = rect
        v_rect = v.reshape(k.height, k.width, 3)[r0:r1, c0:c1].reshape(-1, 3)

        # cheap float32 bounding-sphere prefilter (radius padded so float32
        # rounding can never reject a true hit)
        d32 = v_rect @ rot32.T
        o_rel = (origin - prim.pose.translation).astype(np.float32)
        a = np.einsum("ij,ij->i", d32, d32)
        b = d32 @ o_rel
        pad = np.float32(prim.bounding_radius() + 1e-4)
        disc = b * b - a * (o_rel @ o_rel - pad * pad)
        far_root = (-b + np.sqrt(np.maximum(disc, 0.0))) / a
        cand = np.flatnonzero((disc >= 0) & (far_root > _HIT_EPS))
        if len(cand) == 0:
            continue

        prot = prim.pose.rotation.to_matrix()
        if prim.shape == BOX:
            # slab arithmetic is cancellation-free, so boxes run in float32
            # straight from the prefilter directions
            o_local = (prot.T @ (origin - prim.pose.translation)).astype(np.float32)
            d_local = d32[cand] @ prot.astype(np.float32)
        else:
            # quadratics cancel catastrophically near tangency: float64
            o_local = prot.T @ (origin - prim.pose.translation)
            d_local = v_rect[cand].astype(np.float64) @ rot.T @ prot
        s, hit, aux = _intersect_local(prim, o_local, d_local)

        zview = z[r0:r1, c0:c1]
        closer = hit & (s < zview.reshape(-1)[cand])
        if not np.any(closer):
            continue
        closer2d = np.zeros(zview.shape, dtype=bool)
        closer2d.reshape(-1)[cand[closer]] = True
        zview[closer2d] = s[closer].astype(np.float32)
        slot[r0:r1, c0:c1][closer2d] = idx + 2
        if want_rgb:
            n_local = _normals_local(prim, o_local, d_local, s, aux, closer)
            lam = scene.ambient + (1.0 - scene.ambient) * np.maximum(
                0.0, (n_local @ prot.T) @ light
            )
            shaded = np.clip(np.asarray(prim.color) * lam[:, None], 0.0, 1.0)
            rgb[r0:r1, c0:c1][closer2d] = (shaded * 255.0 + 0.5).astype(np.uint8)
    np.copyto(z, np.float32(0.0), where=np.isinf(z))
    return z, slot, rgb


def _slot_to_ids(scene: Scene, slot: np.ndarray) -> np.ndarray:
    lut = np.full(len(scene.primitives) + 2, -1, dtype=np.int32)
    for i, p in enumerate(scene.primitives):
        lut[i + 2] = p.object_id
    return lut[slot]


def _apply_depth_effects(scene, slot, z, k, noise_sigma, seed):
    """Seeded along-the-ray Gaussian noise plus per-primitive dropout.

    Mutates and returns z (freshly allocated by the ray cast)."""
    if noise_sigma <= 0 and not any(p.dropout > 0 for p in scene.primitives):
        return z
    rng = np.random.default_rng(seed)
    _, inv_norm = _pixel_ray_grid(k)
    if noise_sigma > 0:
        noise = rng.standard_normal(z.shape, dtype=np.float32)
        noise *= inv_norm
        noise *= np.float32(noise_sigma)
        np.add(z, noise, out=z, where=z > 0)
        np.maximum(z, np.float32(0.0), out=z)
    for i, prim in enumerate(scene.primitives):
        if prim.dropout > 0:
            mask = (slot == i + 2) & (rng.random(z.shape) < prim.dropout)
            z[mask] = 0.0
    return z


def render_frame(
    scene: Scene,
    camera: Pose,
    k: CameraIntrinsics,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> tuple[np.ndarray, DepthImage]:
    """RGB image and depth image from a single shared ray-cast pass."""
    z, slot, rgb = _raycast(scene, camera, k, want_rgb=True)
    depth = _apply_depth_effects(scene, slot, z, k, noise_sigma, seed)
    return rgb, DepthImage(depth, _slot_to_ids(scene, slot))


def render_depth(
    scene: Scene,
    camera: Pose,
    k: CameraIntrinsics,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> DepthImage:
    """Depth + id map only (no shading pass)."""
    z, slot, _ = _raycast(scene, camera, k, want_rgb=False)
    depth = _apply_depth_effects(scene, slot, z, k, noise_sigma, seed)
    return DepthImage(depth, _slot_to_ids(scene, slot))


def render_rgb(scene: Scene, camera: Pose, k: CameraIntrinsics) -> np.ndarray:
    """Flat-shaded RGB with the same visibility as the depth pass."""
    rgb, _ = render_frame(scene, camera, k)
    return rgb


def depth_to_cloud(d: DepthImage, k: CameraIntrinsics, camera: Pose) -> PointCloud:
    """Back-project every valid pixel into the camera pose's world frame."""
    v, _ = _pixel_ray_grid(k)
    flat_depth = d.depth.reshape(-1)
    valid = flat_depth > 0
    pts_cam = flat_depth[valid, None].astype(np.float64) * v[valid].astype(np.float64)
    pts_world = camera.apply(pts_cam)
    ids = d.id_map.reshape(-1)[valid].astype(np.int64)
    return PointCloud(pts_world, ids, camera.to_frame)


def sample_gaze(scene: Scene, object_id: int, jitter_sigma: float = 0.0, seed: int = 0):
    """A gaze point on the primitive's upward-facing surface, plus jitter.

    The surface point is where a vertical ray dropped onto the primitive's
    center first hits it; deterministic for a fixed seed.
    """
    prim = scene.primitive(object_id)
    top = prim.pose.translation + np.array([0.0, 0.0, prim.bounding_radius() + 1.0])
    prot = prim.pose.rotation.to_matrix()
    o_local = prot.T @ (top - prim.pose.translation)
    d_local = (prot.T @ np.array([0.0, 0.0, -1.0])).reshape(1, 3)
    s, hit, _ = _intersect_local(prim, o_local, d_local)
    if not hit[0]:
        raise SceneError(f"vertical ray misses primitive {object_id}; non-convex pose?")
    point = top + float(s[0]) * np.array([0.0, 0.0, -1.0])
    if jitter_sigma > 0:
        rng = np.random.default_rng(seed)
        point = point + rng.normal(scale=jitter_sigma, size=3)
    return point


# ------------------------------------------------------------- scene file I/O


def scene_to_dict(scene: Scene) -> dict:
    prims = []
    for p in scene.primitives:
        prims.append(
            {
                "shape": p.shape,
                "dimensions_m": list(p.dimensions),
                "position_m": [float(x) for x in p.pose.translation],
                "rotation_wxyz": [float(x) for x in p.pose.rotation.as_wxyz()],
                "object_id": p.object_id,
                "class_name": p.class_name,
                "color": list(p.color),
                "dropout": p.dropout,
            }
        )
    return {
        "version": 1,
        "seed": scene.rng_seed,
        "ground_color": list(scene.ground_color),
        "light_direction": list(scene.light_direction),
        "ambient": scene.ambient,
        "primitives": prims,
    }


def scene_from_dict(data: dict) -> Scene:
    if not isinstance(data, dict) or "primitives" not in data:
        raise SceneError("scene description must be a mapping with a 'primitives' list")
    prims = []
    for entry in data["primitives"]:
        try:
            rotation = UnitQuaternion(*entry.get("rotation_wxyz", (1.0, 0.0, 0.0, 0.0)))
            if "yaw_deg" in entry:
                rotation = UnitQuaternion.from_axis_angle((0, 0, 1), math.radians(entry["yaw_deg"]))
            pose = Pose(
                np.asarray(entry["position_m"], dtype=float),
                rotation,
                from_frame=f"object_{entry['object_id']}",
                to_frame="world",
            )
            prims.append(
                Primitive(
                    shape=entry["shape"],
                    dimensions=tuple(entry["dimensions_m"]),
                    pose=pose,
                    object_id=int(entry["object_id"]),
                    class_name=str(entry["class_name"]),
                    color=tuple(entry.get("color", (0.7, 0.7, 0.7))),
                    dropout=float(entry.get("dropout", 0.0)),
                )
            )
        except KeyError as missing:
            raise SceneError(f"primitive entry missing required key {missing}") from None
    return Scene(
        primitives=tuple(prims),
        rng_seed=int(data.get("seed", 0)),
        ground_color=tuple(data.get("ground_color", (0.45, 0.42, 0.38))),
        light_direction=tuple(data.get("light_direction", (0.3, -0.2, 1.0))),
        ambient=float(data.get("ambient", 0.25)),
    )


def save_scene(scene: Scene, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(scene_to_dict(scene), fh, sort_keys=False)


def load_scene(path) -> Scene:
    with open(path) as fh:
        return scene_from_dict(yaml.safe_load(fh))


# --------------------------------------------------------- random scene maker

_CLASS_POOL = (
    ("block", BOX),
    ("ball", SPHERE),
    ("can", CYLINDER),
    ("brick", BOX),
    ("puck", CYLINDER),
    ("orb", SPHERE),
)

_PALETTE = (
    (0.82, 0.18, 0.14),
    (0.16, 0.45, 0.80),
    (0.20, 0.65, 0.25),
    (0.85, 0.65, 0.13),
    (0.55, 0.25, 0.70),
    (0.90, 0.45, 0.55),
)


def random_tabletop_scene(
    seed: int,
    n_objects: int | None = None,
    region: float = 0.42,
    min_gap: float = 0.06,
) -> Scene:
    """Seeded scene of 3-6 primitives resting on the table, pairwise separated."""
    rng = np.random.default_rng(seed)
    if n_objects is None:
        n_objects = int(rng.integers(3, 7))
    prims: list[Primitive] = []
    placed: list[tuple[np.ndarray, float]] = []
    for i in range(n_objects):
        name, shape = _CLASS_POOL[i % len(_CLASS_POOL)]
        if shape == BOX:
            dims = tuple(rng.uniform([0.06, 0.05, 0.04], [0.14, 0.11, 0.09]))
            height = dims[2]
        elif shape == SPHERE:
            dims = (float(rng.uniform(0.028, 0.05)),)
            height = 2 * dims[0]
        else:
            dims = (float(rng.uniform(0.028, 0.055)), float(rng.uniform(0.05, 0.12)))
            height = dims[1]
        radius_xy = Primitive(
            shape, dims, Pose.identity("world"), 10_000 + i, name
        ).bounding_radius()

        for _ in range(200):
            xy = rng.uniform(-region, region, size=2)
            if all(
                np.linalg.norm(xy - prev_xy) >= radius_xy + prev_r + min_gap
                for prev_xy, prev_r in placed
            ):
                break
        else:
            continue  # no room left; scene simply gets fewer objects
        placed.append((xy, radius_xy))

        yaw = float(rng.uniform(0, 2 * np.pi)) if shape != SPHERE else 0.0
        pose = Pose(
            np.array([xy[0], xy[1], height / 2 if shape != SPHERE else dims[0]]),
            UnitQuaternion.from_axis_angle((0, 0, 1), yaw),
            from_frame=f"object_{i}",
            to_frame="world",
        )
        prims.append(
            Primitive(
                shape=shape,
                dimensions=dims,
                pose=pose,
                object_id=i,
                class_name=name,
                color=_PALETTE[i % len(_PALETTE)],
            )
        )
    return Scene(primitives=tuple(prims), rng_seed=seed)


# ----------------------------------------------------------- default cameras


def default_scene_intrinsics() -> CameraIntrinsics:
    return CameraIntrinsics(fx=525.0, fy=525.0, cx=320.0, cy=240.0, width=640, height=480)


def default_wrist_intrinsics() -> CameraIntrinsics:
    return CameraIntrinsics(fx=1390.0, fy=1390.0, cx=960.0, cy=540.0, width=1920, height=1080)


def default_scene_camera() -> Pose:
    """Body camera looking at the table center from one side, about 45 deg down."""
    return look_at(eye=(-0.95, 0.0, 0.95), target=(0.0, 0.0, 0.0))
