"""Recording sessions: render every planned viewpoint and label it.

For each retained orbit pose the wrist camera renders RGB + depth, the
frozen segmented object cloud is projected into the view, and the clipped
projection bbox becomes the frame's 2D label. Each frame stores the
camera-to-object transform, so labels can be re-derived from the dataset
alone.

The object coordinate frame is anchored at the segmented bbox center,
axis-aligned with the world; the session keeps the object cloud in that
frame, which makes label reproduction from stored poses bit-exact.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from gazeteach.geometry import (
    CameraIntrinsics,
    PointCloud,
    Pose,
    Roi2D,
    UnitQuaternion,
    aabb_of,
    compose,
    invert,
    project_cloud_roi,
    transform_cloud,
)
from gazeteach.planner import OrbitPlan
from gazeteach.scene import Scene, render_frame

logger = logging.getLogger(__name__)

MIN_ROI_AREA_PX = 4.0
OBJECT_FRAME = "object"


@dataclass(frozen=True)
class FrameRecord:
    """One captured viewpoint; rgb/depth are None when images are not kept."""

    index: int
    rgb: np.ndarray | None
    depth_mm: np.ndarray | None
    roi: Roi2D
    camera_to_object: Pose
    intrinsics: CameraIntrinsics
    class_name: str
    entity_id: int


@dataclass
class RecordingSession:
    class_name: str
    entity_id: int
    object_cloud: PointCloud  # expressed in the object frame
    object_frame: Pose  # object -> world
    plan: OrbitPlan
    intrinsics: CameraIntrinsics
    frames: list[FrameRecord] = field(default_factory=list)
    ground_truth_rois: list[Roi2D | None] = field(default_factory=list)
    skipped: int = 0
    cancelled: bool = False
    progress: float = 0.0


def label_frame(
    object_cloud: PointCloud,
    camera: Pose,
    k: CameraIntrinsics,
    min_area_px: float = MIN_ROI_AREA_PX,
) -> Roi2D | None:
    """Clipped projection bbox of a world-frame cloud, or None (skipped)
    when nothing projects or the box is a degenerate sliver."""
    cam_cloud = transform_cloud(object_cloud, invert(camera))
    return _accept_roi(project_cloud_roi(cam_cloud, k, clip=True), min_area_px)


def _accept_roi(roi: Roi2D | None, min_area_px: float) -> Roi2D | None:
    if roi is None or roi.area() < min_area_px:
        return None
    return roi


def roi_from_id_map(id_map: np.ndarray, object_id: int) -> Roi2D | None:
    """Tight pixel bbox of an object in a rendered id map (oracle side)."""
    mask = id_map == object_id
    rows = np.flatnonzero(mask.any(axis=1))
    if len(rows) == 0:
        return None
    cols = np.flatnonzero(mask.any(axis=0))
    return Roi2D(float(cols[0]), float(rows[0]), float(cols[-1]), float(rows[-1]))


class SessionRecorder:
    """Incremental recording: one pose per step() call, cancelable between
    frames; the session object stays valid (a prefix) at every point."""

    def __init__(
        self,
        scene: Scene,
        object_cloud: PointCloud,
        plan: OrbitPlan,
        class_name: str,
        entity_id: int,
        k: CameraIntrinsics,
        noise_sigma: float = 0.0,
        seed: int = 0,
        min_area_px: float = MIN_ROI_AREA_PX,
        keep_images: bool = True,
        gt_object_id: int | None = None,
    ):
        if len(plan.retained_indices) == 0:
            raise ValueError("plan has no retained poses")
        if object_cloud.frame != "world":
            raise ValueError(
                f"object cloud must be in the world frame, got {object_cloud.frame!r}"
            )
        if len(object_cloud) == 0:
            raise ValueError("object cloud is empty")

        center = aabb_of(object_cloud).center()
        object_frame = Pose(center, UnitQuaternion.identity(), OBJECT_FRAME, "world")
        self._world_to_object = invert(object_frame)
        cloud_obj = transform_cloud(object_cloud, self._world_to_object)
        self.session = RecordingSession(
            class_name=class_name,
            entity_id=entity_id,
            object_cloud=cloud_obj,
            object_frame=object_frame,
            plan=plan,
            intrinsics=k,
        )
        self._scene = scene
        self._k = k
        self._noise_sigma = noise_sigma
        self._seed = seed
        self._min_area_px = min_area_px
        self._keep_images = keep_images
        self._gt_object_id = gt_object_id
        self._cursor = 0
        self._total = len(plan.retained_indices)

    @property
    def done(self) -> bool:
        return self.session.cancelled or self._cursor >= self._total

    def cancel(self) -> None:
        if not self.done:
            self.session.cancelled = True
            logger.info("recording cancelled after %d/%d poses", self._cursor, self._total)

    def step(self) -> None:
        """Process the next planned pose (render, label or skip)."""
        if self.done:
            return
        session = self.session
        pose_index = session.plan.retained_indices[self._cursor]
        camera = session.plan.poses[pose_index]
        camera_to_object = compose(self._world_to_object, camera)
        cam_cloud = transform_cloud(session.object_cloud, invert(camera_to_object))
        roi = _accept_roi(project_cloud_roi(cam_cloud, self._k, clip=True), self._min_area_px)
        if roi is None:
            session.skipped += 1
            logger.debug("pose %d skipped: object not labelable in view", pose_index)
        else:
            frame_seed = np.random.SeedSequence((self._seed, int(pose_index)))
            rgb, depth = render_frame(
                self._scene, camera, self._k, noise_sigma=self._noise_sigma, seed=frame_seed
            )
            depth_mm = np.clip(np.rint(depth.depth * 1000.0), 0, 65535).astype(np.uint16)
            session.frames.append(
                FrameRecord(
                    index=len(session.frames),
                    rgb=rgb if self._keep_images else None,
                    depth_mm=depth_mm if self._keep_images else None,
                    roi=roi,
                    camera_to_object=camera_to_object,
                    intrinsics=self._k,
                    class_name=session.class_name,
                    entity_id=session.entity_id,
                )
            )
            session.ground_truth_rois.append(
                roi_from_id_map(depth.id_map, self._gt_object_id)
                if self._gt_object_id is not None
                else None
            )
        self._cursor += 1
        session.progress = self._cursor / self._total


def run_session(
    scene: Scene,
    object_cloud: PointCloud,
    plan: OrbitPlan,
    class_name: str,
    entity_id: int,
    k: CameraIntrinsics,
    noise_sigma: float = 0.0,
    seed: int = 0,
    min_area_px: float = MIN_ROI_AREA_PX,
    keep_images: bool = True,
    gt_object_id: int | None = None,
    on_progress=None,
    should_cancel=None,
) -> RecordingSession:
    """Record one frame per retained pose, skipping unlabelable views.

    object_cloud arrives in the world frame and is frozen for the whole
    session. Cancellation (should_cancel() -> True, checked between
    frames) yields a valid partial session. When gt_object_id is given,
    the rendered id map's tight bbox is kept per frame as ground truth for
    label-quality scoring.
    """
    recorder = SessionRecorder(
        scene,
        object_cloud,
        plan,
        class_name,
        entity_id,
        k,
        noise_sigma=noise_sigma,
        seed=seed,
        min_area_px=min_area_px,
        keep_images=keep_images,
        gt_object_id=gt_object_id,
    )
    while not recorder.done:
        if should_cancel is not None and should_cancel():
            recorder.cancel()
            break
        recorder.step()
        if on_progress is not None:
            on_progress(recorder.session.progress, len(recorder.session.frames))
    return recorder.session


def reproject_roi(session: RecordingSession, frame: FrameRecord) -> Roi2D | None:
    """Label recomputed from the stored pose; bit-equal to frame.roi."""
    cam_cloud = transform_cloud(session.object_cloud, invert(frame.camera_to_object))
    return project_cloud_roi(cam_cloud, frame.intrinsics, clip=True)


def session_stats(session: RecordingSession) -> Counter:
    """Viewpoint counts keyed by (class_name, entity_id); Counter addition
    merges sessions."""
    return Counter({(session.class_name, session.entity_id): len(session.frames)})
