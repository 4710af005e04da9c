#!/usr/bin/env python3
"""Viewpoint planning around a segmented object.

Shows the orbit radius rule (twice the bbox diagonal, floored by a safety
distance), the 45-degree look-at geometry, and what a reach-limited arm
does to the circle: the plan keeps the longest contiguous reachable arc.
"""

import math

import numpy as np

from gazeteach.geometry import Aabb3
from gazeteach.planner import WorkspaceModel, plan_orbit, plan_to_text

bbox = Aabb3((0.22, -0.04, 0.0), (0.34, 0.06, 0.05))
print(f"object bbox diagonal: {bbox.diagonal():.3f} m")

# free-floating camera: the full circle is reachable
plan = plan_orbit(bbox, n_samples=12, safety_min=0.3)
print(f"radius = max(2 x diagonal, safety 0.30) = {plan.radius:.3f} m")
print(f"unconstrained: {len(plan.retained_indices)}/12 poses retained\n")

for i in plan.retained_indices[:3]:
    pose = plan.poses[i]
    fwd = pose.rotation.to_matrix()[:, 2]
    depression = math.degrees(math.atan2(-fwd[2], math.hypot(fwd[0], fwd[1])))
    print(f"  pose {i}: az {math.degrees(plan.azimuths[i]):6.1f} deg, "
          f"camera looks down at {depression:.1f} deg")

# a realistic arm: base off to one side, limited reach
workspace = WorkspaceModel(
    base_position=np.array([-0.35, 0.0, 0.0]),
    min_reach=0.1,
    max_reach=0.78,
    min_height=0.05,
    max_height=1.2,
)
limited = plan_orbit(bbox, n_samples=36, safety_min=0.3, workspace=workspace)
kept = len(limited.retained_indices)
print(f"\nreach-limited arm: {kept}/36 poses, one contiguous arc "
      f"(paper-style partial circle)")
print("\nfull plan listing:\n")
print(plan_to_text(limited))
