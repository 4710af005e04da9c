#!/usr/bin/env python3
"""Automatic labeling: record an orbit and write the dataset.

Segments one object, plans a short orbit, renders every viewpoint with the
wrist camera, projects the segmented cloud for the 2D labels, then writes
the dataset tree, validates it, and prints its histogram.

The full-size run uses 300 poses at 1920x1080 (about a minute); this demo
records 40 poses at 640x360 so it finishes in a few seconds.
"""

import tempfile
from pathlib import Path

from gazeteach.autolabel import run_session, session_stats
from gazeteach.dataset import stats, validate, write_dataset
from gazeteach.geometry import CameraIntrinsics, look_at
from gazeteach.planner import plan_orbit
from gazeteach.scene import default_scene_intrinsics, depth_to_cloud, random_tabletop_scene, render_depth, sample_gaze
from gazeteach.segmentation import SegmentationParams, segment_object

scene = random_tabletop_scene(seed=3, n_objects=3)
camera = look_at(eye=(-0.95, 0.0, 0.95), target=(0.0, 0.0, 0.0))
k_scene = default_scene_intrinsics()
cloud = depth_to_cloud(
    render_depth(scene, camera, k_scene, noise_sigma=0.002, seed=0), k_scene, camera
)

params = SegmentationParams(ransac_inlier_threshold=0.005)
target = scene.primitives[0]
gaze = sample_gaze(scene, target.object_id, jitter_sigma=0.003, seed=1)
obj, bbox = segment_object(cloud, gaze, params)
print(f"teaching {target.class_name!r}: {len(obj)} segmented points")

plan = plan_orbit(bbox, n_samples=40, safety_min=0.3)
wrist_k = CameraIntrinsics(463.3, 463.3, 320.0, 180.0, 640, 360)
session = run_session(
    scene, obj, plan, target.class_name, 0, wrist_k,
    noise_sigma=0.002, seed=0,
    on_progress=lambda frac, n: print(f"  {frac:4.0%} ({n} frames)", end="\r"),
)
print(f"\nrecorded {len(session.frames)} frames, skipped {session.skipped}")
print("counts:", dict(session_stats(session)))

root = Path(tempfile.mkdtemp(prefix="gazeteach_demo_")) / "dataset"
write_dataset([session], root)
print(f"\nwrote dataset to {root}")
print("one frame directory holds: rgb.png, depth.bin, roi.json, pose.json")

report = validate(root)
print(f"validation: {report}")
print("\nhistogram:")
print(stats(root).to_text())
