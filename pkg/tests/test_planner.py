from __future__ import annotations

import math

import numpy as np
import pytest

from gazeteach.geometry import Aabb3
from gazeteach.planner import (
    OrbitPlan,
    PlanningError,
    WorkspaceModel,
    orbit_radius,
    plan_orbit,
    plan_to_text,
)


def bbox(center, extents):
    c = np.asarray(center, float)
    e = np.asarray(extents, float) / 2
    return Aabb3(c - e, c + e)


def random_bbox(rng):
    center = rng.uniform([-0.4, -0.4, 0.0], [0.4, 0.4, 0.15])
    extents = rng.uniform(0.02, 0.25, size=3)
    return bbox(center, extents)


# ---------------------------------------------------------------- radius rule


def test_radius_twice_diagonal():
    b = bbox((0, 0, 0.05), (0.12, 0.12, 0.12))  # diagonal ~0.2078
    assert orbit_radius(b, safety_min=0.1) == pytest.approx(2 * b.diagonal())


def test_radius_floored_by_safety_distance():
    b = bbox((0, 0, 0.01), (0.0115, 0.0115, 0.0115))  # diagonal ~0.02
    assert orbit_radius(b, safety_min=0.3) == 0.3


def test_radius_exact_rule_values():
    # diagonal 0.2 -> radius 0.4; diagonal 0.02 -> safety 0.3 wins
    b1 = Aabb3((0, 0, 0), (0.2 / math.sqrt(3),) * 3)
    assert orbit_radius(b1, 0.1) == pytest.approx(0.4, abs=1e-12)
    b2 = Aabb3((0, 0, 0), (0.02 / math.sqrt(3),) * 3)
    assert orbit_radius(b2, 0.3) == 0.3


def test_degenerate_point_bbox_uses_safety():
    b = Aabb3((0.1, 0.1, 0.1), (0.1, 0.1, 0.1))
    assert orbit_radius(b, 0.25) == 0.25


# ------------------------------------------------------------------- planning


def test_unbounded_workspace_keeps_all_poses():
    plan = plan_orbit(bbox((0, 0, 0.05), (0.1, 0.1, 0.1)), n_samples=8)
    assert len(plan.poses) == 8
    assert plan.reachable_mask.all()
    np.testing.assert_array_equal(plan.retained_indices, np.arange(8))
    for pose in plan.poses:
        elev = math.asin((pose.translation[2] - plan.center[2]) / plan.radius)
        assert elev == pytest.approx(math.pi / 4, abs=1e-9)


def test_half_space_workspace_gives_contiguous_partial_arc():
    b = bbox((0.3, 0.0, 0.05), (0.1, 0.1, 0.1))
    # base far to the -x side: far half of the orbit is out of reach
    ws = WorkspaceModel(np.array([-0.4, 0.0, 0.0]), 0.0, 0.85, -10.0, 10.0)
    plan = plan_orbit(b, n_samples=72, workspace=ws)
    assert 0 < len(plan.retained_indices) < 72
    wrapped = np.diff(plan.retained_indices) % 72
    assert np.all(wrapped == 1)  # one contiguous arc, wrap allowed
    assert plan.reachable_mask[plan.retained_indices].all()


def test_out_of_reach_raises():
    ws = WorkspaceModel(np.zeros(3), 0.0, 0.05, 0.0, 0.02)
    with pytest.raises(PlanningError, match="out of reach"):
        plan_orbit(bbox((2.0, 2.0, 0.05), (0.1, 0.1, 0.1)), n_samples=16, workspace=ws)


def test_orbit_geometry_invariants_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        b = random_bbox(rng)
        safety = float(rng.uniform(0.0, 0.5))
        elevation = float(rng.uniform(0.1, 1.3))
        plan = plan_orbit(b, n_samples=24, elevation=elevation, safety_min=safety)
        assert plan.radius == max(2 * b.diagonal(), safety)
        for i in plan.retained_indices:
            pos = plan.poses[i].translation
            assert abs(np.linalg.norm(pos - plan.center) - plan.radius) <= 1e-9
            assert abs(math.asin((pos[2] - plan.center[2]) / plan.radius) - elevation) <= 1e-9


def test_every_pose_looks_at_center_45_degrees():
    plan = plan_orbit(bbox((0.1, -0.2, 0.04), (0.08, 0.12, 0.06)), n_samples=36)
    for i in plan.retained_indices:
        pose = plan.poses[i]
        fwd = pose.rotation.to_matrix()[:, 2]
        to_center = plan.center - pose.translation
        to_center = to_center / np.linalg.norm(to_center)
        # look direction hits the center
        angle = math.atan2(np.linalg.norm(np.cross(fwd, to_center)), fwd @ to_center)
        assert angle < 1e-9
        # depression from the horizontal plane is the elevation angle
        horiz = math.hypot(fwd[0], fwd[1])
        assert math.atan2(-fwd[2], horiz) == pytest.approx(math.pi / 4, abs=1e-9)


def test_retained_azimuths_monotone_with_wrap():
    b = bbox((0.25, 0.0, 0.05), (0.08, 0.08, 0.08))
    ws = WorkspaceModel(np.array([0.6, 0.0, 0.0]), 0.0, 0.6, -10, 10)
    plan = plan_orbit(b, n_samples=48, workspace=ws)
    az = plan.azimuths[plan.retained_indices]
    unwrapped = np.unwrap(az)
    assert np.all(np.diff(unwrapped) > 0)


def test_shrinking_workspace_never_grows_arc():
    rng = np.random.default_rng(1)
    b = bbox((0.2, 0.1, 0.05), (0.1, 0.1, 0.08))
    base = np.array([-0.2, 0.0, 0.0])
    prev = None
    for max_reach in (1.5, 1.0, 0.8, 0.7, 0.6):
        ws = WorkspaceModel(base, 0.0, max_reach, -10, 10)
        try:
            plan = plan_orbit(b, n_samples=60, workspace=ws)
            size = len(plan.retained_indices)
        except PlanningError:
            size = 0
        if prev is not None:
            assert size <= prev
        prev = size


def test_all_reachable_arc_starts_at_zero_azimuth():
    plan = plan_orbit(bbox((0, 0, 0.05), (0.1, 0.1, 0.1)), n_samples=10)
    assert plan.retained_indices[0] == 0


def test_plan_text_export_mentions_every_retained_pose():
    plan = plan_orbit(bbox((0, 0, 0.05), (0.1, 0.1, 0.1)), n_samples=6)
    text = plan_to_text(plan)
    assert "radius" in text and "retained 6" in text
    assert len(text.splitlines()) == 2 + 6


def test_workspace_validation():
    with pytest.raises(ValueError):
        WorkspaceModel(np.zeros(3), 0.5, 0.4, 0, 1)
    with pytest.raises(ValueError):
        WorkspaceModel(np.zeros(3), 0.0, 0.4, 1, 0)
    with pytest.raises(ValueError):
        plan_orbit(bbox((0, 0, 0), (0.1, 0.1, 0.1)), n_samples=0)
