"""Gaze-guided robot-teaching toolkit, hardware-free.

Pipeline, end to end: a synthetic tabletop scene is sensed by a ray-cast
depth camera; a gaze point picks out one object via point-cloud
segmentation; a partial-circle trajectory of wrist-camera viewpoints is
planned around it; every viewpoint is rendered and auto-labeled with a 2D
bounding box by projecting the segmented cloud; the labeled frames are
written to a multiperspective dataset and can be scored COCO-style against
rendered ground truth.
"""

from gazeteach.geometry import (
    Aabb3,
    CameraIntrinsics,
    PointCloud,
    Pose,
    Roi2D,
    UnitQuaternion,
    aabb_of,
    compose,
    invert,
    look_at,
    project_cloud_roi,
    project_point,
    transform_cloud,
)

__version__ = "0.1.0"

__all__ = [
    "Aabb3",
    "CameraIntrinsics",
    "PointCloud",
    "Pose",
    "Roi2D",
    "UnitQuaternion",
    "aabb_of",
    "compose",
    "invert",
    "look_at",
    "project_cloud_roi",
    "project_point",
    "transform_cloud",
    "__version__",
]
