"""Rigid-body transforms, pinhole projection and bounding volumes.

Conventions used throughout the package:

  World frame (right-handed):
    +z up, ground plane at z = 0.

  Camera frame (right-handed, standard computer vision):
    +z forward along the optical axis, +x right, +y down,
    so that +x/+y align with the pixel u/v axes.

  Pixels:
    u grows to the right, v grows downward. A pixel at row j, column i
    samples the continuous image coordinates (u, v) = (i, j); the
    principal point (cx, cy) therefore lands on a pixel center.

  Poses:
    A Pose maps point coordinates expressed in ``from_frame`` into
    coordinates expressed in ``to_frame``:  p_to = R @ p_from + t.
    "Camera pose" means the camera-to-world transform (its translation is
    the camera position in the world).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Points closer to the image plane than this (in meters) count as behind
# the camera; avoids division blowup without discarding valid close points.
Z_EPS = 1e-6


class FrameMismatchError(ValueError):
    """Operands refer to different coordinate frames."""


class EmptyCloudError(ValueError):
    """Operation requires a non-empty point cloud."""


def _as_vec3(value) -> np.ndarray:
    v = np.asarray(value, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"vector components must be finite, got {v}")
    return v


@dataclass(frozen=True)
class UnitQuaternion:
    """Unit quaternion (w, x, y, z); normalized on construction."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)
        if not math.isfinite(n) or n < 1e-12:
            raise ValueError(f"cannot normalize quaternion with norm {n}")
        # skip the division when already unit to the last ulp; keeps
        # normalization idempotent so serialized values round-trip bit-exact
        if abs(n - 1.0) < 1e-12:
            n = 1.0
        object.__setattr__(self, "w", float(self.w) / n)
        object.__setattr__(self, "x", float(self.x) / n)
        object.__setattr__(self, "y", float(self.y) / n)
        object.__setattr__(self, "z", float(self.z) / n)

    @staticmethod
    def identity() -> "UnitQuaternion":
        return UnitQuaternion(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis, angle_rad: float) -> "UnitQuaternion":
        a = _as_vec3(axis)
        n = np.linalg.norm(a)
        if n < 1e-12:
            raise ValueError("rotation axis must be non-zero")
        a = a / n
        h = 0.5 * angle_rad
        s = math.sin(h)
        return UnitQuaternion(math.cos(h), s * a[0], s * a[1], s * a[2])

    @staticmethod
    def from_matrix(m) -> "UnitQuaternion":
        """Convert an orthonormal 3x3 rotation matrix (branch on largest diagonal)."""
        m = np.asarray(m, dtype=np.float64)
        t = np.trace(m)
        if t > 0:
            s = math.sqrt(t + 1.0) * 2.0
            return UnitQuaternion(
                0.25 * s,
                (m[2, 1] - m[1, 2]) / s,
                (m[0, 2] - m[2, 0]) / s,
                (m[1, 0] - m[0, 1]) / s,
            )
        if m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
            s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
            return UnitQuaternion(
                (m[2, 1] - m[1, 2]) / s,
                0.25 * s,
                (m[0, 1] + m[1, 0]) / s,
                (m[0, 2] + m[2, 0]) / s,
            )
        if m[1, 1] > m[2, 2]:
            s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
            return UnitQuaternion(
                (m[0, 2] - m[2, 0]) / s,
                (m[0, 1] + m[1, 0]) / s,
                0.25 * s,
                (m[1, 2] + m[2, 1]) / s,
            )
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        return UnitQuaternion(
            (m[1, 0] - m[0, 1]) / s,
            (m[0, 2] + m[2, 0]) / s,
            (m[1, 2] + m[2, 1]) / s,
            0.25 * s,
        )

    def to_matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ],
            dtype=np.float64,
        )

    def multiply(self, other: "UnitQuaternion") -> "UnitQuaternion":
        """Hamilton product self * other (renormalized by construction)."""
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return UnitQuaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def conjugate(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    def rotate(self, points: np.ndarray) -> np.ndarray:
        """Rotate an (N, 3) array (or a single 3-vector) of points."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.to_matrix().T

    def dot(self, other: "UnitQuaternion") -> float:
        return self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z

    def angle_to(self, other: "UnitQuaternion") -> float:
        """Geodesic angle (radians) between the two rotations."""
        d = min(1.0, abs(self.dot(other)))
        return 2.0 * math.acos(d)

    def as_wxyz(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=np.float64)


@dataclass(frozen=True)
class Pose:
    """Rigid transform mapping coordinates in from_frame to to_frame."""

    translation: np.ndarray
    rotation: UnitQuaternion
    from_frame: str = "a"
    to_frame: str = "b"

    def __post_init__(self):
        object.__setattr__(self, "translation", _as_vec3(self.translation))

    @staticmethod
    def identity(frame: str = "a") -> "Pose":
        return Pose(np.zeros(3), UnitQuaternion.identity(), frame, frame)

    def to_matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        m = np.eye(4)
        m[:3, :3] = self.rotation.to_matrix()
        m[:3, 3] = self.translation
        return m

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map (N, 3) points (or one 3-vector) from from_frame to to_frame."""
        return self.rotation.rotate(points) + self.translation

    @property
    def position(self) -> np.ndarray:
        return self.translation


def compose(a: Pose, b: Pose) -> Pose:
    """Chain two poses: b is applied first, then a (matrix product a @ b).

    The result maps b.from_frame into a.to_frame; requires that b lands in
    the frame a maps from.
    """
    if a.from_frame != b.to_frame:
        raise FrameMismatchError(
            f"cannot compose: first pose maps from {a.from_frame!r} "
            f"but second pose maps to {b.to_frame!r}"
        )
    rotation = a.rotation.multiply(b.rotation)
    translation = a.rotation.rotate(b.translation) + a.translation
    return Pose(translation, rotation, b.from_frame, a.to_frame)


def invert(p: Pose) -> Pose:
    """Inverse transform; frames swapped."""
    rot_inv = p.rotation.conjugate()
    return Pose(-rot_inv.rotate(p.translation), rot_inv, p.to_frame, p.from_frame)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole model: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside "
                f"{self.width}x{self.height} image"
            )

    def scaled(self, width: int, height: int) -> "CameraIntrinsics":
        """Same field of view at a different resolution."""
        sx = width / self.width
        sy = height / self.height
        return CameraIntrinsics(self.fx * sx, self.fy * sy, self.cx * sx, self.cy * sy, width, height)


@dataclass(frozen=True)
class PointCloud:
    """3D points in a named frame, optionally with per-point object ids.

    ``object_ids`` carry synthetic ground truth (-1 = background) and are
    propagated unchanged through geometric operations.
    """

    points: np.ndarray
    object_ids: np.ndarray | None = None
    frame: str = "world"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        object.__setattr__(self, "points", pts)
        if self.object_ids is not None:
            ids = np.asarray(self.object_ids, dtype=np.int64).reshape(-1)
            if len(ids) != len(pts):
                raise ValueError(
                    f"object_ids length {len(ids)} != points length {len(pts)}"
                )
            object.__setattr__(self, "object_ids", ids)

    def __len__(self) -> int:
        return len(self.points)

    @staticmethod
    def empty(frame: str = "world") -> "PointCloud":
        return PointCloud(np.zeros((0, 3)), np.zeros(0, dtype=np.int64), frame)

    def select(self, index) -> "PointCloud":
        """Sub-cloud by boolean mask or index array; ids preserved."""
        ids = self.object_ids[index] if self.object_ids is not None else None
        return PointCloud(self.points[index], ids, self.frame)


@dataclass(frozen=True)
class Aabb3:
    """Axis-aligned box in 3D, min <= max componentwise."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "min", _as_vec3(self.min))
        object.__setattr__(self, "max", _as_vec3(self.max))
        if np.any(self.min > self.max):
            raise ValueError(f"invalid box: min {self.min} > max {self.max}")

    def diagonal(self) -> float:
        return float(np.linalg.norm(self.max - self.min))

    def center(self) -> np.ndarray:
        return 0.5 * (self.min + self.max)

    def extents(self) -> np.ndarray:
        return self.max - self.min


@dataclass(frozen=True)
class Roi2D:
    """Axis-aligned pixel box, x_min <= x_max and y_min <= y_max."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        for name in ("x_min", "y_min", "x_max", "y_max"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(
                f"invalid ROI ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def area(self) -> float:
        return self.width * self.height

    def clipped(self, width: int, height: int) -> "Roi2D":
        return Roi2D(
            min(max(self.x_min, 0.0), float(width)),
            min(max(self.y_min, 0.0), float(height)),
            min(max(self.x_max, 0.0), float(width)),
            min(max(self.y_max, 0.0), float(height)),
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def transform_cloud(cloud: PointCloud, p: Pose) -> PointCloud:
    """Map every point by p; object ids preserved, frame renamed."""
    if cloud.frame != p.from_frame:
        raise FrameMismatchError(
            f"cloud is in frame {cloud.frame!r} but pose maps from {p.from_frame!r}"
        )
    return PointCloud(p.apply(cloud.points), cloud.object_ids, p.to_frame)


def project_point(p, k: CameraIntrinsics, z_eps: float = Z_EPS):
    """Project one camera-frame point to pixel coordinates.

    Returns (u, v) for points in front of the camera, None for points at or
    behind the z_eps cutoff.
    """
    x, y, z = _as_vec3(p)
    if z <= z_eps:
        return None
    return (k.fx * x / z + k.cx, k.fy * y / z + k.cy)


def project_points(points: np.ndarray, k: CameraIntrinsics, z_eps: float = Z_EPS):
    """Vectorized projection of (N, 3) camera-frame points.

    Returns (uv, valid): uv is (N, 2) with NaN where invalid, valid is a
    boolean mask of points in front of the camera.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    z = pts[:, 2]
    valid = z > z_eps
    uv = np.full((len(pts), 2), np.nan)
    uv[valid, 0] = k.fx * pts[valid, 0] / z[valid] + k.cx
    uv[valid, 1] = k.fy * pts[valid, 1] / z[valid] + k.cy
    return uv, valid


def project_cloud_roi(
    cloud: PointCloud, k: CameraIntrinsics, clip: bool = True, z_eps: float = Z_EPS
) -> Roi2D | None:
    """Axis-aligned pixel bbox over all projections of a camera-frame cloud.

    Returns None when no point projects (empty cloud or everything behind
    the camera). When clip is set the box is intersected with the image
    bounds [0, width] x [0, height].
    """
    if len(cloud) == 0:
        return None
    uv, valid = project_points(cloud.points, k, z_eps)
    if not np.any(valid):
        return None
    uv = uv[valid]
    roi = Roi2D(
        float(np.min(uv[:, 0])),
        float(np.min(uv[:, 1])),
        float(np.max(uv[:, 0])),
        float(np.max(uv[:, 1])),
    )
    if clip:
        roi = roi.clipped(k.width, k.height)
    return roi


def aabb_of(cloud: PointCloud) -> Aabb3:
    """Componentwise min/max box over a non-empty cloud."""
    if len(cloud) == 0:
        raise EmptyCloudError("cannot compute bounding box of an empty cloud")
    return Aabb3(cloud.points.min(axis=0), cloud.points.max(axis=0))


def look_at(eye, target, up_hint=(0.0, 0.0, 1.0), frame: str = "world") -> Pose:
    """Camera-to-world pose with the +z axis pointing from eye toward target.

    up_hint is the world direction the camera's up (-y axis) should lean
    toward; it must not be parallel to the view direction.
    """
    eye = _as_vec3(eye)
    target = _as_vec3(target)
    up_hint = _as_vec3(up_hint)

    forward = target - eye
    dist = np.linalg.norm(forward)
    if dist <= 1e-9:
        raise ValueError("look_at target coincides with eye")
    z_axis = forward / dist

    # x (camera right) is orthogonal to both the view direction and world up
    x_axis = np.cross(-up_hint, z_axis)
    nx = np.linalg.norm(x_axis)
    if nx < 1e-9:
        raise ValueError("up_hint is parallel to the view direction")
    x_axis = x_axis / nx
    y_axis = np.cross(z_axis, x_axis)  # camera down

    rot = np.column_stack([x_axis, y_axis, z_axis])
    return Pose(eye, UnitQuaternion.from_matrix(rot), from_frame="camera", to_frame=frame)
