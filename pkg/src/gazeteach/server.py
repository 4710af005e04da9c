"""WebSocket + HTTP front for the teaching service.

One interactive client at a time speaks the JSON protocol over a WebSocket
text-frame transport at /ws (a second connection is refused with a busy
error). GET /snapshot serves the spectator view the browser UI needs to
turn clicks into 3D gaze points: RGB as base64 PNG, depth as base64
little-endian uint16 millimeters, plus the spectator intrinsics and pose.
"""

from __future__ import annotations

import asyncio
import base64
import io
import logging

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from PIL import Image

from gazeteach.config import TeachConfig
from gazeteach.geometry import look_at
from gazeteach.scene import Scene, render_frame
from gazeteach.service import TeachService

logger = logging.getLogger(__name__)


def _snapshot_payload(scene: Scene, config: TeachConfig) -> dict:
    camera = look_at(config.scene_camera_eye, config.scene_camera_target)
    k = config.scene_intrinsics
    rgb, depth = render_frame(scene, camera, k, noise_sigma=0.0, seed=config.seed)
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    depth_mm = np.clip(np.rint(depth.depth * 1000.0), 0, 65535).astype("<u2")
    return {
        "rgb_png_b64": base64.b64encode(buf.getvalue()).decode("ascii"),
        "depth_mm_le_b64": base64.b64encode(depth_mm.tobytes()).decode("ascii"),
        "intrinsics": {
            "fx_px": k.fx,
            "fy_px": k.fy,
            "cx_px": k.cx,
            "cy_px": k.cy,
            "width_px": k.width,
            "height_px": k.height,
        },
        "camera_pose": {
            "translation_m": [float(v) for v in camera.translation],
            "rotation_wxyz": [
                camera.rotation.w,
                camera.rotation.x,
                camera.rotation.y,
                camera.rotation.z,
            ],
            "from_frame": camera.from_frame,
            "to_frame": camera.to_frame,
        },
    }


def create_app(scene: Scene, config: TeachConfig | None = None, dataset_root=None) -> FastAPI:
    from fastapi.middleware.cors import CORSMiddleware

    config = config or TeachConfig()
    app = FastAPI(title="gazeteach teaching service")
    # the browser UI is served statically from elsewhere (any static host)
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    state = {"busy": False, "snapshot": None}

    @app.get("/snapshot")
    def snapshot():
        if state["snapshot"] is None:
            state["snapshot"] = _snapshot_payload(scene, config)
        return state["snapshot"]

    @app.get("/info")
    def info():
        return {
            "protocol_version": 1,
            "objects": [
                {"object_id": p.object_id, "class_name": p.class_name, "shape": p.shape}
                for p in scene.primitives
            ],
        }

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        if state["busy"]:
            await websocket.send_json(
                {
                    "v": 1,
                    "seq": 0,
                    "type": "error",
                    "payload": {"code": "busy", "message": "another client is connected"},
                }
            )
            await websocket.close()
            return
        state["busy"] = True
        service = TeachService(scene, config, dataset_root=dataset_root)
        inbound: asyncio.Queue = asyncio.Queue()

        async def reader():
            try:
                while True:
                    inbound.put_nowait(await websocket.receive_text())
            except WebSocketDisconnect:
                inbound.put_nowait(None)

        reader_task = asyncio.create_task(reader())

        async def send_all(messages):
            for msg in messages:
                await websocket.send_json(msg)

        try:
            await send_all(service.start())
            while True:
                if service.recording_active:
                    # poll without blocking so cancel lands between chunks
                    while not inbound.empty():
                        raw = inbound.get_nowait()
                        if raw is None:
                            return
                        await send_all(service.handle_message(raw))
                    await send_all(service.step_recording())
                    await asyncio.sleep(0)
                else:
                    raw = await inbound.get()
                    if raw is None:
                        return
                    await send_all(service.handle_message(raw))
                    # drain any burst before segmenting (latest gaze wins)
                    while not inbound.empty():
                        raw = inbound.get_nowait()
                        if raw is None:
                            return
                        await send_all(service.handle_message(raw))
                    await send_all(service.tick())
        except WebSocketDisconnect:
            pass
        finally:
            state["busy"] = False
            reader_task.cancel()

    return app


def serve(scene: Scene, config: TeachConfig | None = None, dataset_root=None,
          host: str = "127.0.0.1", port: int = 8765) -> None:
    """Run the service until interrupted (blocking)."""
    import uvicorn

    app = create_app(scene, config, dataset_root=dataset_root)
    uvicorn.run(app, host=host, port=port, log_level="info")
