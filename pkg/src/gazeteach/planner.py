"""Partial-circle recording trajectory around a segmented object.

The camera orbits the object's 3D bounding-box center on a sphere: the
orbit radius is twice the bbox diagonal, floored by a safety distance (the
caller passes twice its camera-to-end-effector offset), and every pose
looks at the center from a fixed elevation angle, 45 degrees above the
horizontal by default. Poses outside the arm's reach are dropped and the
longest contiguous reachable arc is kept, wrapping across 0 azimuth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gazeteach.geometry import Aabb3, Pose, look_at

DEFAULT_ELEVATION = math.pi / 4
DEFAULT_SAMPLES = 300


class PlanningError(ValueError):
    """No usable trajectory exists for the request."""


@dataclass(frozen=True)
class WorkspaceModel:
    """Reachability as a horizontal annulus around the arm base plus a
    height band; no joint-space kinematics."""

    base_position: np.ndarray
    min_reach: float
    max_reach: float
    min_height: float
    max_height: float

    def __post_init__(self):
        object.__setattr__(self, "base_position", np.asarray(self.base_position, dtype=float).reshape(3))
        if not 0 <= self.min_reach < self.max_reach:
            raise ValueError(f"need 0 <= min_reach < max_reach, got {self.min_reach}, {self.max_reach}")
        if not self.min_height < self.max_height:
            raise ValueError(f"need min_height < max_height, got {self.min_height}, {self.max_height}")

    def reachable(self, positions: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(positions)
        horiz = np.linalg.norm(pts[:, :2] - self.base_position[:2], axis=1)
        return (
            (horiz >= self.min_reach)
            & (horiz <= self.max_reach)
            & (pts[:, 2] >= self.min_height)
            & (pts[:, 2] <= self.max_height)
        )

    @staticmethod
    def unbounded() -> "WorkspaceModel":
        return WorkspaceModel(np.zeros(3), 0.0, 1e9, -1e9, 1e9)


@dataclass(frozen=True)
class OrbitPlan:
    """All sampled poses plus which ones are reachable and which contiguous
    arc of them the recording will actually visit."""

    center: np.ndarray
    radius: float
    elevation: float
    azimuths: np.ndarray
    poses: tuple[Pose, ...]
    reachable_mask: np.ndarray
    retained_indices: np.ndarray

    @property
    def retained_poses(self) -> list[Pose]:
        return [self.poses[i] for i in self.retained_indices]


def orbit_radius(bbox: Aabb3, safety_min: float) -> float:
    """Twice the bbox diagonal, never below the safety floor."""
    if safety_min < 0:
        raise ValueError(f"safety_min must be >= 0, got {safety_min}")
    return max(2.0 * bbox.diagonal(), safety_min)


def _longest_true_arc(mask: np.ndarray) -> np.ndarray:
    """Indices of the longest circular run of True, wrap-around allowed;
    ties broken by the smallest starting index."""
    n = len(mask)
    if not mask.any():
        return np.array([], dtype=int)
    if mask.all():
        return np.arange(n)
    doubled = np.concatenate([mask, mask])
    best_start, best_len = 0, 0
    run = 0
    for i in range(2 * n):
        if doubled[i]:
            run += 1
            start = i - run + 1
            # cap at n and consider only runs that begin in the first copy
            if start < n:
                length = min(run, n)
                if length > best_len:
                    best_len, best_start = length, start
        else:
            run = 0
    return (best_start + np.arange(best_len)) % n


def plan_orbit(
    bbox: Aabb3,
    n_samples: int = DEFAULT_SAMPLES,
    elevation: float = DEFAULT_ELEVATION,
    safety_min: float = 0.0,
    workspace: WorkspaceModel | None = None,
) -> OrbitPlan:
    """Uniform azimuth ring of look-at poses around the bbox center.

    Every pose sits at the orbit radius from the center at the given
    elevation and points its optical axis at the center. Raises when no
    sampled pose is reachable.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if workspace is None:
        workspace = WorkspaceModel.unbounded()
    center = bbox.center()
    radius = orbit_radius(bbox, safety_min)
    if radius <= 0:
        raise PlanningError("degenerate orbit: zero radius and no safety floor")

    azimuths = 2.0 * math.pi * np.arange(n_samples) / n_samples
    offsets = np.stack(
        [
            radius * math.cos(elevation) * np.cos(azimuths),
            radius * math.cos(elevation) * np.sin(azimuths),
            np.full(n_samples, radius * math.sin(elevation)),
        ],
        axis=1,
    )
    positions = center + offsets
    poses = tuple(look_at(pos, center) for pos in positions)
    reachable = workspace.reachable(positions)
    retained = _longest_true_arc(reachable)
    if len(retained) == 0:
        raise PlanningError("object out of reach: no orbit pose inside the workspace")
    return OrbitPlan(
        center=center,
        radius=radius,
        elevation=elevation,
        azimuths=azimuths,
        poses=poses,
        reachable_mask=reachable,
        retained_indices=retained,
    )


def plan_to_text(plan: OrbitPlan) -> str:
    """Human-readable pose listing for inspection."""
    lines = [
        f"orbit center [{plan.center[0]:.4f} {plan.center[1]:.4f} {plan.center[2]:.4f}] m, "
        f"radius {plan.radius:.4f} m, elevation {math.degrees(plan.elevation):.1f} deg",
        f"poses {len(plan.poses)}, reachable {int(plan.reachable_mask.sum())}, "
        f"retained {len(plan.retained_indices)}",
    ]
    for i in plan.retained_indices:
        p = plan.poses[i]
        t = p.translation
        q = p.rotation
        lines.append(
            f"{i:4d} az {math.degrees(plan.azimuths[i]):7.2f} deg  "
            f"pos [{t[0]: .4f} {t[1]: .4f} {t[2]: .4f}] m  "
            f"quat [{q.w: .6f} {q.x: .6f} {q.y: .6f} {q.z: .6f}]"
        )
    return "\n".join(lines)
