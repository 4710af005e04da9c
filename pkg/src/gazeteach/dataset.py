"""Multiperspective dataset storage: one directory per captured viewpoint.

Layout, versioned as format 1:

    root/
      manifest.json              counts per class and entity, format version
      intrinsics.json            pinhole parameters + depth byte encoding
      <class>/<entity>/<frame>/
        rgb.png                  8-bit RGB
        depth.bin                uint16 little-endian millimeters, row-major,
                                 same dimensions as rgb.png, 0 = invalid
        roi.json                 pixel bbox of the auto-generated label
        pose.json                camera-to-object transform, translation in
                                 meters plus a unit wxyz quaternion

All JSON is written with sorted keys and key names that carry their units,
and no timestamps are recorded, so seeded runs rewrite byte-identical
trees. Reads fail loudly on schema violations; validate() collects every
violation instead of stopping at the first.
"""

from __future__ import annotations

import json
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from gazeteach import __version__
from gazeteach.autolabel import FrameRecord
from gazeteach.geometry import CameraIntrinsics, Pose, Roi2D, UnitQuaternion

FORMAT_NAME = "gazeteach-dataset"
FORMAT_VERSION = 1
QUAT_NORM_TOLERANCE = 1e-6

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_\- ]*$")


class DatasetError(ValueError):
    """Dataset cannot be written or read as requested."""


@dataclass(frozen=True)
class DatasetManifest:
    version: int
    created_by: str
    classes: dict[str, dict[int, int]]  # class -> entity id -> frame count
    total_frames: int
    intrinsics: CameraIntrinsics


@dataclass
class LoadedSession:
    """A session reconstructed from disk: identity plus labeled frames."""

    class_name: str
    entity_id: int
    frames: list[FrameRecord] = field(default_factory=list)


@dataclass(frozen=True)
class ValidationReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "dataset valid: no violations"
        return "\n".join(f"- {v}" for v in self.violations)


def _dump_json(data: dict, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_json(path: Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DatasetError(f"missing file: {path}") from None
    except json.JSONDecodeError as err:
        raise DatasetError(f"malformed JSON in {path}: {err}") from None


def _intrinsics_to_dict(k: CameraIntrinsics) -> dict:
    return {
        "fx_px": k.fx,
        "fy_px": k.fy,
        "cx_px": k.cx,
        "cy_px": k.cy,
        "width_px": k.width,
        "height_px": k.height,
        "depth_encoding": {
            "dtype": "uint16",
            "byte_order": "little-endian",
            "layout": "row-major",
            "units": "millimeters",
            "invalid_value": 0,
        },
    }


def _intrinsics_from_dict(data: dict, path: Path) -> CameraIntrinsics:
    try:
        return CameraIntrinsics(
            fx=float(data["fx_px"]),
            fy=float(data["fy_px"]),
            cx=float(data["cx_px"]),
            cy=float(data["cy_px"]),
            width=int(data["width_px"]),
            height=int(data["height_px"]),
        )
    except (KeyError, ValueError) as err:
        raise DatasetError(f"bad intrinsics record {path}: {err}") from None


def depth_to_millimeters(depth_m: np.ndarray) -> np.ndarray:
    """Meters -> uint16 millimeters; loses at most 0.5 mm below 65.5 m."""
    return np.clip(np.rint(np.asarray(depth_m, dtype=np.float64) * 1000.0), 0, 65535).astype(
        np.uint16
    )


def millimeters_to_depth(depth_mm: np.ndarray) -> np.ndarray:
    return depth_mm.astype(np.float64) / 1000.0


def _entity_dir(root: Path, class_name: str, entity_id: int) -> Path:
    return root / class_name / f"{entity_id:03d}"


def _frame_dir(root: Path, class_name: str, entity_id: int, index: int) -> Path:
    return _entity_dir(root, class_name, entity_id) / f"{index:06d}"


def _write_frame(frame: FrameRecord, directory: Path) -> None:
    if frame.rgb is None or frame.depth_mm is None:
        raise DatasetError(
            f"frame {frame.index} carries no image data; record with keep_images=True"
        )
    directory.mkdir(parents=True, exist_ok=False)
    Image.fromarray(frame.rgb, mode="RGB").save(directory / "rgb.png", format="PNG")
    (directory / "depth.bin").write_bytes(
        np.ascontiguousarray(frame.depth_mm.astype("<u2")).tobytes()
    )
    _dump_json(
        {
            "x_min_px": frame.roi.x_min,
            "y_min_px": frame.roi.y_min,
            "x_max_px": frame.roi.x_max,
            "y_max_px": frame.roi.y_max,
        },
        directory / "roi.json",
    )
    pose = frame.camera_to_object
    _dump_json(
        {
            "from_frame": pose.from_frame,
            "to_frame": pose.to_frame,
            "translation_m": [float(x) for x in pose.translation],
            "rotation_wxyz": [pose.rotation.w, pose.rotation.x, pose.rotation.y, pose.rotation.z],
        },
        directory / "pose.json",
    )


def write_dataset(sessions, root, append: bool = False) -> DatasetManifest:
    """Write (or extend) a dataset tree; returns the resulting manifest.

    Appending an entity that already exists, duplicate frame indices, or
    mixed intrinsics are errors.
    """
    sessions = list(sessions)
    if not sessions:
        raise DatasetError("no sessions to write")
    root = Path(root)

    classes: dict[str, dict[int, int]] = {}
    intrinsics = None
    if append and (root / "manifest.json").exists():
        existing = read_manifest(root)
        classes = {c: dict(e) for c, e in existing.classes.items()}
        intrinsics = existing.intrinsics

    for session in sessions:
        name = session.class_name
        if not _NAME_RE.match(name):
            raise DatasetError(f"class name {name!r} is not filesystem-safe")
        for frame in session.frames:
            if intrinsics is None:
                intrinsics = frame.intrinsics
            elif frame.intrinsics != intrinsics:
                raise DatasetError("all frames in a dataset must share one camera intrinsics")

    root.mkdir(parents=True, exist_ok=True)
    for session in sessions:
        entities = classes.setdefault(session.class_name, {})
        if session.entity_id in entities:
            raise DatasetError(
                f"entity {session.entity_id} of class {session.class_name!r} already in dataset"
            )
        seen = set()
        for frame in session.frames:
            if frame.index in seen:
                raise DatasetError(
                    f"duplicate frame index {frame.index} in {session.class_name}/{session.entity_id}"
                )
            seen.add(frame.index)
            _write_frame(frame, _frame_dir(root, session.class_name, session.entity_id, frame.index))
        entities[session.entity_id] = len(session.frames)

    if intrinsics is None:
        raise DatasetError("sessions contain no frames; nothing to write")
    _dump_json(_intrinsics_to_dict(intrinsics), root / "intrinsics.json")
    manifest = DatasetManifest(
        version=FORMAT_VERSION,
        created_by=f"gazeteach {__version__}",
        classes=classes,
        total_frames=sum(sum(e.values()) for e in classes.values()),
        intrinsics=intrinsics,
    )
    _dump_json(
        {
            "format": FORMAT_NAME,
            "version": manifest.version,
            "created_by": manifest.created_by,
            "classes": {
                c: {str(e): n for e, n in sorted(entities.items())}
                for c, entities in sorted(manifest.classes.items())
            },
            "total_frames": manifest.total_frames,
            "intrinsics_file": "intrinsics.json",
        },
        root / "manifest.json",
    )
    return manifest


def read_manifest(root) -> DatasetManifest:
    root = Path(root)
    data = _load_json(root / "manifest.json")
    if data.get("format") != FORMAT_NAME:
        raise DatasetError(f"not a {FORMAT_NAME} tree: {root}")
    if data.get("version") != FORMAT_VERSION:
        raise DatasetError(f"unsupported dataset version {data.get('version')}")
    intrinsics = _intrinsics_from_dict(_load_json(root / "intrinsics.json"), root / "intrinsics.json")
    try:
        classes = {
            str(c): {int(e): int(n) for e, n in entities.items()}
            for c, entities in data["classes"].items()
        }
        total = int(data["total_frames"])
    except (KeyError, ValueError, AttributeError) as err:
        raise DatasetError(f"malformed manifest: {err}") from None
    return DatasetManifest(
        version=FORMAT_VERSION,
        created_by=str(data.get("created_by", "")),
        classes=classes,
        total_frames=total,
        intrinsics=intrinsics,
    )


def _read_frame(directory: Path, index: int, class_name: str, entity_id: int,
                k: CameraIntrinsics) -> FrameRecord:
    label = f"{class_name}/{entity_id:03d}/{index:06d}"
    rgb_path = directory / "rgb.png"
    if not rgb_path.exists():
        raise DatasetError(f"missing rgb image for frame {label}")
    rgb = np.asarray(Image.open(rgb_path).convert("RGB"))

    depth_path = directory / "depth.bin"
    if not depth_path.exists():
        raise DatasetError(f"missing depth for frame {label}")
    raw = depth_path.read_bytes()
    expected = rgb.shape[0] * rgb.shape[1] * 2
    if len(raw) != expected:
        raise DatasetError(
            f"depth size mismatch for frame {label}: {len(raw)} bytes, expected {expected}"
        )
    depth_mm = np.frombuffer(raw, dtype="<u2").reshape(rgb.shape[0], rgb.shape[1])

    roi_data = _load_json(directory / "roi.json")
    try:
        roi = Roi2D(
            roi_data["x_min_px"], roi_data["y_min_px"], roi_data["x_max_px"], roi_data["y_max_px"]
        )
    except (KeyError, ValueError) as err:
        raise DatasetError(f"malformed roi for frame {label}: {err}") from None
    if roi.x_max > k.width or roi.y_max > k.height or roi.x_min < 0 or roi.y_min < 0:
        raise DatasetError(f"roi outside image bounds for frame {label}: {roi.as_tuple()}")

    pose_data = _load_json(directory / "pose.json")
    try:
        wxyz = [float(v) for v in pose_data["rotation_wxyz"]]
        translation = [float(v) for v in pose_data["translation_m"]]
        frames = (str(pose_data["from_frame"]), str(pose_data["to_frame"]))
    except (KeyError, ValueError) as err:
        raise DatasetError(f"malformed pose for frame {label}: {err}") from None
    norm = float(np.linalg.norm(wxyz))
    if abs(norm - 1.0) > QUAT_NORM_TOLERANCE:
        raise DatasetError(f"non-unit quaternion for frame {label}: norm {norm}")
    pose = Pose(np.array(translation), UnitQuaternion(*wxyz), frames[0], frames[1])
    return FrameRecord(
        index=index,
        rgb=rgb,
        depth_mm=depth_mm,
        roi=roi,
        camera_to_object=pose,
        intrinsics=k,
        class_name=class_name,
        entity_id=entity_id,
    )


def read_dataset(root) -> tuple[list[LoadedSession], DatasetManifest]:
    """Inverse of write_dataset; raises DatasetError on any schema violation."""
    root = Path(root)
    manifest = read_manifest(root)
    sessions = []
    for class_name in sorted(manifest.classes):
        for entity_id in sorted(manifest.classes[class_name]):
            entity_dir = _entity_dir(root, class_name, entity_id)
            if not entity_dir.is_dir():
                raise DatasetError(f"missing entity directory {entity_dir}")
            session = LoadedSession(class_name=class_name, entity_id=entity_id)
            frame_dirs = sorted(d for d in entity_dir.iterdir() if d.is_dir())
            if len(frame_dirs) != manifest.classes[class_name][entity_id]:
                raise DatasetError(
                    f"manifest promises {manifest.classes[class_name][entity_id]} frames for "
                    f"{class_name}/{entity_id:03d}, found {len(frame_dirs)}"
                )
            for d in frame_dirs:
                session.frames.append(
                    _read_frame(d, int(d.name), class_name, entity_id, manifest.intrinsics)
                )
            sessions.append(session)
    return sessions, manifest


def validate(root) -> ValidationReport:
    """Schema, geometry and bookkeeping checks; reports instead of raising."""
    root = Path(root)
    violations: list[str] = []
    try:
        manifest = read_manifest(root)
    except DatasetError as err:
        return ValidationReport([str(err)])

    counted_total = 0
    for class_name, entities in sorted(manifest.classes.items()):
        for entity_id, promised in sorted(entities.items()):
            entity_dir = _entity_dir(root, class_name, entity_id)
            if not entity_dir.is_dir():
                violations.append(f"missing entity directory {class_name}/{entity_id:03d}")
                continue
            frame_dirs = sorted(d for d in entity_dir.iterdir() if d.is_dir())
            if len(frame_dirs) != promised:
                violations.append(
                    f"{class_name}/{entity_id:03d}: manifest count {promised} != "
                    f"{len(frame_dirs)} frame directories"
                )
            for d in frame_dirs:
                counted_total += 1
                try:
                    frame = _read_frame(d, int(d.name), class_name, entity_id, manifest.intrinsics)
                except DatasetError as err:
                    violations.append(str(err))
                    continue
                if frame.rgb.shape[:2] != (manifest.intrinsics.height, manifest.intrinsics.width):
                    violations.append(
                        f"rgb resolution {frame.rgb.shape[1]}x{frame.rgb.shape[0]} differs from "
                        f"intrinsics record for frame {class_name}/{entity_id:03d}/{d.name}"
                    )
                if frame.depth_mm.shape != frame.rgb.shape[:2]:
                    violations.append(
                        f"depth/rgb dimension mismatch for frame {class_name}/{entity_id:03d}/{d.name}"
                    )
    if counted_total != manifest.total_frames:
        violations.append(
            f"manifest total_frames {manifest.total_frames} != {counted_total} frames on disk"
        )
    return ValidationReport(violations)


@dataclass(frozen=True)
class DatasetStats:
    counts: Counter  # (class_name, entity_id) -> frames

    def total(self) -> int:
        return sum(self.counts.values())

    def per_class(self) -> dict[str, int]:
        by_class: Counter = Counter()
        for (class_name, _), n in self.counts.items():
            by_class[class_name] += n
        return dict(sorted(by_class.items()))

    def to_text(self, width: int = 50) -> str:
        if not self.counts:
            return "(empty dataset)"
        top = max(self.counts.values()) or 1
        lines = []
        for (class_name, entity_id), n in sorted(self.counts.items()):
            bar = "#" * max(1 if n else 0, round(n / top * width))
            lines.append(f"{class_name:>16}/{entity_id:03d} {n:6d} {bar}")
        lines.append(f"{'total':>20} {self.total():6d}")
        return "\n".join(lines)


def stats(root) -> DatasetStats:
    """Per-class, per-entity viewpoint histogram of a dataset on disk."""
    manifest = read_manifest(root)
    counts: Counter = Counter()
    for class_name, entities in manifest.classes.items():
        for entity_id, n in entities.items():
            counts[(class_name, entity_id)] = n
    return DatasetStats(counts)
