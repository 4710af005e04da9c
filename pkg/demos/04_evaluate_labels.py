#!/usr/bin/env python3
"""Scoring auto-generated labels against rendered ground truth.

Runs a short recording, treats each stored label as a unit-confidence
detection, takes the renderer's id-map bboxes as ground truth, and runs
the COCO-style evaluation: per-class AP across IoU 0.50:0.05:0.95, mAP50,
recall at detection limits, and a precision-recall curve file per class.
"""

import tempfile
from pathlib import Path

import numpy as np

from gazeteach.autolabel import run_session
from gazeteach.geometry import CameraIntrinsics, look_at
from gazeteach.metrics import Detection, GroundTruth, evaluate, export_pr_curves, iou
from gazeteach.planner import plan_orbit
from gazeteach.scene import default_scene_intrinsics, depth_to_cloud, random_tabletop_scene, render_depth, sample_gaze
from gazeteach.segmentation import SegmentationParams, segment_object

scene = random_tabletop_scene(seed=5, n_objects=3)
camera = look_at(eye=(-0.95, 0.0, 0.95), target=(0.0, 0.0, 0.0))
k_scene = default_scene_intrinsics()
cloud = depth_to_cloud(
    render_depth(scene, camera, k_scene, noise_sigma=0.002, seed=0), k_scene, camera
)
params = SegmentationParams(ransac_inlier_threshold=0.005)
wrist_k = CameraIntrinsics(463.3, 463.3, 320.0, 180.0, 640, 360)

detections, ground_truths, ious = [], [], []
for prim in scene.primitives[:2]:
    gaze = sample_gaze(scene, prim.object_id, jitter_sigma=0.003, seed=prim.object_id)
    obj, bbox = segment_object(cloud, gaze, params)
    plan = plan_orbit(bbox, n_samples=30, safety_min=0.3)
    session = run_session(
        scene, obj, plan, prim.class_name, prim.object_id, wrist_k,
        noise_sigma=0.002, seed=prim.object_id, keep_images=False,
        gt_object_id=prim.object_id,
    )
    for frame, gt_roi in zip(session.frames, session.ground_truth_rois):
        image_id = f"{prim.class_name}_{frame.index:04d}"
        detections.append(Detection(frame.roi, prim.class_name, 1.0, image_id))
        ground_truths.append(GroundTruth(gt_roi, prim.class_name, image_id))
        ious.append(iou(frame.roi, gt_roi))
    print(f"{prim.class_name}: {len(session.frames)} labeled views")

print(f"\nlabel vs ground truth: mean IoU {np.mean(ious):.3f}, min {np.min(ious):.3f}\n")
result = evaluate(detections, ground_truths)
print(result.to_table())

curve_dir = Path(tempfile.mkdtemp(prefix="gazeteach_pr_"))
for path in export_pr_curves(result, curve_dir):
    print(f"wrote {path}")
