"""Teaching-session orchestrator behind a JSON message protocol.

One service owns one teaching state machine:

    Idle -> GazeTracking -> ObjectProposed -> Naming -> Recording -> Done
    (ObjectProposed falls back to GazeTracking when the gaze moves off,
     Done loops back to GazeTracking for the next object, and any state
     may drop to the terminal Failed: cancellation or planning failure.)

Failed is terminal. Messages are JSON objects {v, seq, type, payload} with
per-direction strictly increasing sequence numbers; malformed or
out-of-place messages produce error responses, never exceptions.

Gaze updates are conflated: handle_message stores the newest gaze and
tick() segments exactly the latest one received before the tick began,
so a burst of updates costs one segmentation. Recording advances through
step_recording() in small chunks between message handling, which is what
makes cancellation land between frames and keeps scripted runs
byte-reproducible.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gazeteach.autolabel import SessionRecorder, session_stats
from gazeteach.config import TeachConfig
from gazeteach.dataset import DatasetError, read_manifest, write_dataset
from gazeteach.geometry import Aabb3, PointCloud, look_at
from gazeteach.planner import PlanningError, plan_orbit
from gazeteach.scene import Scene, depth_to_cloud, render_depth, sample_gaze
from gazeteach.segmentation import SegmentationError, segment_object

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = 1


class SessionState(str, enum.Enum):
    IDLE = "idle"
    GAZE_TRACKING = "gaze_tracking"
    OBJECT_PROPOSED = "object_proposed"
    NAMING = "naming"
    RECORDING = "recording"
    DONE = "done"
    FAILED = "failed"


# every legal state change; staying in a state is always allowed
ALLOWED_TRANSITIONS = frozenset(
    [
        (SessionState.IDLE, SessionState.GAZE_TRACKING),
        (SessionState.GAZE_TRACKING, SessionState.OBJECT_PROPOSED),
        (SessionState.OBJECT_PROPOSED, SessionState.GAZE_TRACKING),
        (SessionState.OBJECT_PROPOSED, SessionState.NAMING),
        (SessionState.NAMING, SessionState.RECORDING),
        (SessionState.RECORDING, SessionState.DONE),
        (SessionState.DONE, SessionState.GAZE_TRACKING),
    ]
    + [(s, SessionState.FAILED) for s in SessionState if s != SessionState.FAILED]
)

CLIENT_TYPES = ("gaze_update", "select_object", "provide_class", "cancel")


class ProtocolError(ValueError):
    """Raised internally for malformed client messages; always converted to
    an error response."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class TeachService:
    """Synchronous service core; transports (WebSocket, scripted driver)
    feed handle_message() and drive tick() / step_recording()."""

    def __init__(self, scene: Scene, config: TeachConfig | None = None, dataset_root=None):
        self.scene = scene
        self.config = config or TeachConfig()
        self.dataset_root = Path(dataset_root) if dataset_root is not None else None
        self.state = SessionState.IDLE
        self.transition_log: list[tuple[SessionState, SessionState]] = []
        self.sessions = []  # finished sessions, including cancelled partials
        self.processed_gazes: list[tuple[float, float, float]] = []

        self._last_client_seq = None
        self._server_seq = 0
        self._pending_gaze: np.ndarray | None = None
        self._proposal: tuple[PointCloud, Aabb3] | None = None
        self._recorder: SessionRecorder | None = None
        self._last_progress_emit = 0.0
        self._entity_counter: dict[str, int] = {}
        self._session_ordinal = 0
        self._scene_cloud: PointCloud | None = None
        self._seg_cache: dict[tuple[float, float, float], tuple[PointCloud, Aabb3 | None]] = {}

        if self.dataset_root is not None and (self.dataset_root / "manifest.json").exists():
            manifest = read_manifest(self.dataset_root)
            for class_name, entities in manifest.classes.items():
                self._entity_counter[class_name] = max(entities) + 1

    # ------------------------------------------------------------ plumbing

    def _emit(self, msg_type: str, payload: dict | None = None) -> dict:
        self._server_seq += 1
        return {
            "v": PROTOCOL_VERSION,
            "seq": self._server_seq,
            "type": msg_type,
            "payload": payload or {},
        }

    def _error(self, code: str, message: str) -> dict:
        return self._emit("error", {"code": code, "message": message})

    def _transition(self, new_state: SessionState, reason: str | None = None) -> list[dict]:
        if new_state == self.state:
            return []
        if (self.state, new_state) not in ALLOWED_TRANSITIONS:
            raise AssertionError(f"undeclared transition {self.state} -> {new_state}")
        self.transition_log.append((self.state, new_state))
        self.state = new_state
        payload = {"state": new_state.value}
        if reason:
            payload["reason"] = reason
        return [self._emit("state_changed", payload)]

    @property
    def scene_cloud(self) -> PointCloud:
        """World-frame cloud from the scene camera, rendered once (the
        simulated scene is static)."""
        if self._scene_cloud is None:
            camera = look_at(self.config.scene_camera_eye, self.config.scene_camera_target)
            depth = render_depth(
                self.scene,
                camera,
                self.config.scene_intrinsics,
                noise_sigma=self.config.scene_noise_sigma,
                seed=self.config.seed,
            )
            self._scene_cloud = depth_to_cloud(depth, self.config.scene_intrinsics, camera)
        return self._scene_cloud

    @property
    def recording_active(self) -> bool:
        return self._recorder is not None and not self._recorder.done

    def start(self) -> list[dict]:
        """Begin gaze tracking (client attached)."""
        if self.state is not SessionState.IDLE:
            return [self._error("invalid_state", f"cannot start in state {self.state.value}")]
        return self._transition(SessionState.GAZE_TRACKING)

    # ----------------------------------------------------------- messages

    def handle_message(self, message) -> list[dict]:
        """Validate and dispatch one client message; never raises."""
        try:
            msg = self._parse(message)
        except ProtocolError as err:
            return [self._error(err.code, str(err))]
        try:
            return self._dispatch(msg)
        except ProtocolError as err:
            return [self._error(err.code, str(err))]
        except (SegmentationError, PlanningError, DatasetError) as err:
            logger.warning("pipeline failure: %s", err)
            return [self._error("pipeline_failure", str(err))]

    def _parse(self, message) -> dict:
        if isinstance(message, (str, bytes)):
            try:
                message = json.loads(message)
            except (json.JSONDecodeError, UnicodeDecodeError) as err:
                raise ProtocolError("malformed", f"not valid JSON: {err}") from None
        if not isinstance(message, dict):
            raise ProtocolError("malformed", "message must be a JSON object")
        msg_type = message.get("type")
        if not isinstance(msg_type, str) or msg_type not in CLIENT_TYPES:
            raise ProtocolError("unknown_type", f"unknown message type {msg_type!r}")
        seq = message.get("seq")
        if not isinstance(seq, int) or isinstance(seq, bool):
            raise ProtocolError("malformed", "message lacks an integer seq")
        if self._last_client_seq is not None and seq <= self._last_client_seq:
            raise ProtocolError(
                "bad_seq", f"sequence number {seq} not above {self._last_client_seq}"
            )
        payload = message.get("payload", {})
        if not isinstance(payload, dict):
            raise ProtocolError("malformed", "payload must be an object")
        self._last_client_seq = seq
        return {"type": msg_type, "payload": payload}

    def _dispatch(self, msg: dict) -> list[dict]:
        msg_type, payload = msg["type"], msg["payload"]
        if msg_type == "gaze_update":
            gaze = self._parse_gaze(payload)
            self._pending_gaze = gaze
            return []
        if msg_type == "select_object":
            return self.handle_select()
        if msg_type == "provide_class":
            name = payload.get("name")
            if not isinstance(name, str):
                raise ProtocolError("malformed", "provide_class payload needs a string 'name'")
            return self.handle_class(name)
        if msg_type == "cancel":
            return self.handle_cancel()
        raise ProtocolError("unknown_type", f"unknown message type {msg_type!r}")

    @staticmethod
    def _parse_gaze(payload: dict) -> np.ndarray:
        try:
            gaze = np.array(
                [float(payload["x_m"]), float(payload["y_m"]), float(payload["z_m"])]
            )
        except (KeyError, TypeError, ValueError):
            raise ProtocolError(
                "malformed", "gaze_update payload needs finite numbers x_m, y_m, z_m"
            ) from None
        if not np.all(np.isfinite(gaze)):
            raise ProtocolError("malformed", "gaze coordinates must be finite")
        return gaze

    # --------------------------------------------------------- operations

    def tick(self) -> list[dict]:
        """Segment the most recent pending gaze, if the state allows it."""
        if self._pending_gaze is None:
            return []
        if self.state not in (
            SessionState.GAZE_TRACKING,
            SessionState.OBJECT_PROPOSED,
            SessionState.DONE,
        ):
            return []
        gaze, self._pending_gaze = self._pending_gaze, None
        return self.handle_gaze(gaze)

    def handle_gaze(self, gaze) -> list[dict]:
        """Run gaze-conditioned segmentation and propose (or drop) an object."""
        if self.state not in (
            SessionState.GAZE_TRACKING,
            SessionState.OBJECT_PROPOSED,
            SessionState.DONE,
        ):
            return [self._error("invalid_state", f"gaze not consumed in state {self.state.value}")]
        out: list[dict] = []
        if self.state is SessionState.DONE:
            out += self._transition(SessionState.GAZE_TRACKING)
        gaze = np.asarray(gaze, dtype=float).reshape(3)
        self.processed_gazes.append(tuple(gaze))
        key = tuple(np.round(gaze, 6))
        if key in self._seg_cache:
            obj, bbox = self._seg_cache[key]
        else:
            obj, bbox = segment_object(self.scene_cloud, gaze, self.config.segmentation)
            self._seg_cache[key] = (obj, bbox)
        if bbox is None:
            self._proposal = None
            out += self._transition(SessionState.GAZE_TRACKING)
            out.append(self._emit("no_object", {}))
        else:
            self._proposal = (obj, bbox)
            out += self._transition(SessionState.OBJECT_PROPOSED)
            out.append(
                self._emit(
                    "bbox3d",
                    {"min_m": [float(v) for v in bbox.min], "max_m": [float(v) for v in bbox.max]},
                )
            )
        return out

    def handle_select(self) -> list[dict]:
        if self.state is not SessionState.OBJECT_PROPOSED or self._proposal is None:
            return [self._error("invalid_state", "nothing proposed to select")]
        return self._transition(SessionState.NAMING)

    def handle_class(self, name: str) -> list[dict]:
        if self.state is not SessionState.NAMING:
            return [self._error("invalid_state", f"class not accepted in state {self.state.value}")]
        name = name.strip()
        if not name:
            return [self._error("empty_class", "class name is empty")]
        obj, bbox = self._proposal
        cfg = self.config
        try:
            plan = plan_orbit(
                bbox,
                n_samples=cfg.orbit_samples,
                elevation=cfg.elevation,
                safety_min=cfg.safety_min,
                workspace=cfg.workspace,
            )
        except PlanningError as err:
            out = self._transition(SessionState.FAILED, reason=str(err))
            out.append(self._error("planning_failure", str(err)))
            return out
        entity_id = self._entity_counter.get(name, 0)
        self._entity_counter[name] = entity_id + 1
        session_seed = int(np.random.SeedSequence((cfg.seed, self._session_ordinal)).generate_state(1)[0])
        self._session_ordinal += 1
        gt_object_id = self._gt_object_id_for(bbox)
        self._recorder = SessionRecorder(
            self.scene,
            obj,
            plan,
            name,
            entity_id,
            cfg.wrist_intrinsics,
            noise_sigma=cfg.wrist_noise_sigma,
            seed=session_seed,
            min_area_px=cfg.min_roi_area_px,
            gt_object_id=gt_object_id,
        )
        self._last_progress_emit = 0.0
        return self._transition(SessionState.RECORDING)

    def _gt_object_id_for(self, bbox: Aabb3) -> int | None:
        """Scene primitive whose center lies in the proposed bbox (synthetic
        ground truth for label scoring); None when ambiguous."""
        inside = [
            p.object_id
            for p in self.scene.primitives
            if np.all(p.pose.translation >= bbox.min - 1e-6)
            and np.all(p.pose.translation <= bbox.max + 1e-6)
        ]
        return inside[0] if len(inside) == 1 else None

    def handle_cancel(self) -> list[dict]:
        if self.state is not SessionState.RECORDING or self._recorder is None:
            return [self._error("invalid_state", "nothing to cancel")]
        self._recorder.cancel()
        return self._finish_recording()

    def step_recording(self) -> list[dict]:
        """Advance the active recording by one chunk of poses."""
        if self._recorder is None:
            return []
        out: list[dict] = []
        for _ in range(self.config.recording_chunk):
            if self._recorder.done:
                break
            self._recorder.step()
            progress = self._recorder.session.progress
            if (
                progress >= self._last_progress_emit + self.config.progress_step
                or progress >= 1.0
            ):
                self._last_progress_emit = progress
                out.append(self._emit("record_progress", {"fraction": round(progress, 6)}))
        if self._recorder.done:
            out += self._finish_recording()
        return out

    def _finish_recording(self) -> list[dict]:
        recorder, self._recorder = self._recorder, None
        session = recorder.session
        self.sessions.append(session)
        out: list[dict] = []
        if self.dataset_root is not None and session.frames:
            write_dataset([session], self.dataset_root, append=True)
        if session.cancelled:
            out += self._transition(SessionState.FAILED, reason="cancelled")
        else:
            out.append(self._emit("record_done", {"frame_count": len(session.frames)}))
            out += self._transition(SessionState.DONE)
        self._proposal = None
        return out


# --------------------------------------------------------------- scripting


class ScriptError(ValueError):
    """Script cannot be parsed or replayed."""


@dataclass(frozen=True)
class ScriptAction:
    lineno: int
    verb: str
    args: tuple


_SCRIPT_VERBS = ("gaze", "gaze_object", "select", "class", "cancel_at", "wait")


def parse_script(path) -> list[ScriptAction]:
    actions = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            verb = parts[0]
            args = parts[1:]
            try:
                if verb == "gaze":
                    if len(args) != 3:
                        raise ValueError("gaze needs exactly x y z in meters")
                    actions.append(ScriptAction(lineno, verb, tuple(float(a) for a in args)))
                elif verb == "gaze_object":
                    if len(args) not in (1, 2):
                        raise ValueError("gaze_object needs an object id and optional jitter sigma")
                    jitter = float(args[1]) if len(args) == 2 else 0.0
                    actions.append(ScriptAction(lineno, verb, (int(args[0]), jitter)))
                elif verb == "select":
                    if args:
                        raise ValueError("select takes no arguments")
                    actions.append(ScriptAction(lineno, verb, ()))
                elif verb == "class":
                    if not args:
                        raise ValueError("class needs a name")
                    actions.append(ScriptAction(lineno, verb, (" ".join(args),)))
                elif verb == "cancel_at":
                    if len(args) != 1:
                        raise ValueError("cancel_at needs a progress fraction")
                    fraction = float(args[0])
                    if not 0.0 <= fraction <= 1.0:
                        raise ValueError("cancel_at fraction must be in [0, 1]")
                    actions.append(ScriptAction(lineno, verb, (fraction,)))
                elif verb == "wait":
                    if len(args) != 1:
                        raise ValueError("wait needs a duration in seconds")
                    actions.append(ScriptAction(lineno, verb, (float(args[0]),)))
                else:
                    raise ValueError(f"unknown action {verb!r}")
            except ValueError as err:
                raise ScriptError(f"line {lineno}: {err}") from None
    return actions


class _ScriptDriver:
    """Replays script actions against a service, stamping client seqs."""

    def __init__(self, service: TeachService):
        self.service = service
        self.seq = 0
        self.log: list[dict] = []

    def send(self, msg_type: str, payload: dict | None = None) -> list[dict]:
        self.seq += 1
        out = self.service.handle_message(
            {"v": PROTOCOL_VERSION, "seq": self.seq, "type": msg_type, "payload": payload or {}}
        )
        self.log.extend(out)
        return out

    def tick(self):
        self.log.extend(self.service.tick())

    def drain_recording(self, cancel_at: float | None):
        while self.service.recording_active:
            if cancel_at is not None and self.service._recorder.session.progress >= cancel_at:
                self.send("cancel")
                cancel_at = None
                continue
            self.log.extend(self.service.step_recording())


def run_scripted(
    script_path,
    scene: Scene,
    out_root,
    config: TeachConfig | None = None,
    seed: int | None = None,
) -> dict:
    """Replay a teaching script headlessly; writes the dataset and returns a
    summary report. Deterministic for fixed scene, script and seed."""
    config = config or TeachConfig()
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
    actions = parse_script(script_path)
    service = TeachService(scene, config, dataset_root=out_root)
    driver = _ScriptDriver(service)
    driver.log.extend(service.start())

    cancel_at: float | None = None
    for action in actions:
        if action.verb == "gaze":
            driver.send("gaze_update", {"x_m": action.args[0], "y_m": action.args[1], "z_m": action.args[2]})
        elif action.verb == "gaze_object":
            object_id, jitter = action.args
            gaze = sample_gaze(
                scene, object_id, jitter_sigma=jitter, seed=config.seed + action.lineno
            )
            driver.send(
                "gaze_update", {"x_m": float(gaze[0]), "y_m": float(gaze[1]), "z_m": float(gaze[2])}
            )
        elif action.verb == "wait":
            driver.tick()
        elif action.verb == "select":
            driver.tick()
            driver.send("select_object")
        elif action.verb == "cancel_at":
            cancel_at = action.args[0]
        elif action.verb == "class":
            driver.send("provide_class", {"name": action.args[0]})
            driver.drain_recording(cancel_at)
            cancel_at = None
    driver.tick()

    totals: Counter = Counter()
    for s in service.sessions:
        totals += session_stats(s)
    taught = sum(1 for s in service.sessions if not s.cancelled)
    errors = [m for m in driver.log if m["type"] == "error"]
    return {
        "objects_taught": taught,
        "objects_cancelled": len(service.sessions) - taught,
        "frames": sum(len(s.frames) for s in service.sessions),
        "skipped": sum(s.skipped for s in service.sessions),
        "dataset_root": str(out_root),
        "final_state": service.state.value,
        "per_entity": {f"{c}/{e}": n for (c, e), n in sorted(totals.items())},
        "errors": [m["payload"]["code"] for m in errors],
    }
