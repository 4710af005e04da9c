"""Runtime configuration for the teaching service and CLI.

Everything is overridable from a YAML file; distances in meters, angles in
degrees in the file (radians in memory). Unknown keys are rejected so
typos fail fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from gazeteach.geometry import CameraIntrinsics
from gazeteach.planner import DEFAULT_ELEVATION, DEFAULT_SAMPLES, WorkspaceModel
from gazeteach.segmentation import SegmentationParams


@dataclass(frozen=True)
class TeachConfig:
    segmentation: SegmentationParams = field(default_factory=SegmentationParams)
    scene_camera_eye: tuple[float, float, float] = (-0.95, 0.0, 0.95)
    scene_camera_target: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scene_intrinsics: CameraIntrinsics = field(
        default_factory=lambda: CameraIntrinsics(525.0, 525.0, 320.0, 240.0, 640, 480)
    )
    wrist_intrinsics: CameraIntrinsics = field(
        default_factory=lambda: CameraIntrinsics(1390.0, 1390.0, 960.0, 540.0, 1920, 1080)
    )
    scene_noise_sigma: float = 0.002
    wrist_noise_sigma: float = 0.002
    orbit_samples: int = DEFAULT_SAMPLES
    elevation: float = DEFAULT_ELEVATION
    camera_offset: float = 0.15  # wrist camera to end-effector; safety floor is twice this
    workspace: WorkspaceModel = field(
        default_factory=lambda: WorkspaceModel(np.zeros(3), 0.05, 1.6, 0.01, 2.0)
    )
    min_roi_area_px: float = 4.0
    progress_step: float = 0.05
    recording_chunk: int = 4  # poses recorded per service step (cancel granularity)
    seed: int = 0

    @property
    def safety_min(self) -> float:
        return 2.0 * self.camera_offset


def _intrinsics_from_cfg(data: dict, fallback: CameraIntrinsics) -> CameraIntrinsics:
    known = {"fx_px", "fy_px", "cx_px", "cy_px", "width_px", "height_px"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown intrinsics key(s): {sorted(unknown)}")
    return CameraIntrinsics(
        fx=float(data.get("fx_px", fallback.fx)),
        fy=float(data.get("fy_px", fallback.fy)),
        cx=float(data.get("cx_px", fallback.cx)),
        cy=float(data.get("cy_px", fallback.cy)),
        width=int(data.get("width_px", fallback.width)),
        height=int(data.get("height_px", fallback.height)),
    )


def _workspace_from_cfg(data: dict) -> WorkspaceModel:
    known = {"base_position_m", "min_reach_m", "max_reach_m", "min_height_m", "max_height_m"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown workspace key(s): {sorted(unknown)}")
    return WorkspaceModel(
        base_position=np.asarray(data.get("base_position_m", (0.0, 0.0, 0.0)), dtype=float),
        min_reach=float(data.get("min_reach_m", 0.05)),
        max_reach=float(data.get("max_reach_m", 1.6)),
        min_height=float(data.get("min_height_m", 0.01)),
        max_height=float(data.get("max_height_m", 2.0)),
    )


_TOP_LEVEL_KEYS = {
    "segmentation",
    "scene_camera_eye_m",
    "scene_camera_target_m",
    "scene_intrinsics",
    "wrist_intrinsics",
    "scene_noise_sigma_m",
    "wrist_noise_sigma_m",
    "orbit_samples",
    "elevation_deg",
    "camera_offset_m",
    "workspace",
    "min_roi_area_px",
    "progress_step",
    "recording_chunk",
    "seed",
}


def config_from_dict(data: dict) -> TeachConfig:
    if not isinstance(data, dict):
        raise ValueError("config must be a mapping")
    unknown = set(data) - _TOP_LEVEL_KEYS
    if unknown:
        raise ValueError(f"unknown config key(s): {sorted(unknown)}")
    base = TeachConfig()
    kwargs: dict = {}
    if "segmentation" in data:
        kwargs["segmentation"] = SegmentationParams.from_dict(data["segmentation"])
    if "scene_camera_eye_m" in data:
        kwargs["scene_camera_eye"] = tuple(float(v) for v in data["scene_camera_eye_m"])
    if "scene_camera_target_m" in data:
        kwargs["scene_camera_target"] = tuple(float(v) for v in data["scene_camera_target_m"])
    if "scene_intrinsics" in data:
        kwargs["scene_intrinsics"] = _intrinsics_from_cfg(data["scene_intrinsics"], base.scene_intrinsics)
    if "wrist_intrinsics" in data:
        kwargs["wrist_intrinsics"] = _intrinsics_from_cfg(data["wrist_intrinsics"], base.wrist_intrinsics)
    if "scene_noise_sigma_m" in data:
        kwargs["scene_noise_sigma"] = float(data["scene_noise_sigma_m"])
    if "wrist_noise_sigma_m" in data:
        kwargs["wrist_noise_sigma"] = float(data["wrist_noise_sigma_m"])
    if "orbit_samples" in data:
        kwargs["orbit_samples"] = int(data["orbit_samples"])
    if "elevation_deg" in data:
        kwargs["elevation"] = math.radians(float(data["elevation_deg"]))
    if "camera_offset_m" in data:
        kwargs["camera_offset"] = float(data["camera_offset_m"])
    if "workspace" in data:
        kwargs["workspace"] = _workspace_from_cfg(data["workspace"])
    if "min_roi_area_px" in data:
        kwargs["min_roi_area_px"] = float(data["min_roi_area_px"])
    if "progress_step" in data:
        kwargs["progress_step"] = float(data["progress_step"])
    if "recording_chunk" in data:
        kwargs["recording_chunk"] = int(data["recording_chunk"])
    if "seed" in data:
        kwargs["seed"] = int(data["seed"])
    return replace(base, **kwargs)


def load_config(path) -> TeachConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return config_from_dict(data or {})
