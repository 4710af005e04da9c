"""Primitive-building helpers shared across test modules."""

from __future__ import annotations

import numpy as np

from gazeteach.geometry import Pose, UnitQuaternion
from gazeteach.scene import Primitive


def box_at(xy, size, object_id, yaw=0.0, name="block", color=(0.8, 0.2, 0.2)):
    pose = Pose(
        np.array([xy[0], xy[1], size[2] / 2]),
        UnitQuaternion.from_axis_angle((0, 0, 1), yaw),
        from_frame=f"object_{object_id}",
        to_frame="world",
    )
    return Primitive("box", size, pose, object_id, name, color)


def sphere_at(center, radius, object_id, name="ball", color=(0.2, 0.4, 0.8)):
    pose = Pose(np.asarray(center, float), UnitQuaternion.identity(),
                f"object_{object_id}", "world")
    return Primitive("sphere", (radius,), pose, object_id, name, color)


def cylinder_at(xy, radius, height, object_id, name="can", color=(0.2, 0.7, 0.3)):
    pose = Pose(np.array([xy[0], xy[1], height / 2]), UnitQuaternion.identity(),
                f"object_{object_id}", "world")
    return Primitive("cylinder", (radius, height), pose, object_id, name, color)
