"""HTTP service backing the calibration inspector.

Serves the stored rig and capture frames, renders cross-channel overlay
composites with extrinsic deltas applied on top of the stored calibration,
and persists an accepted rig. Only the accept endpoint mutates state, and
it is serialized behind a lock.
"""

from __future__ import annotations

import socket
import threading
from pathlib import Path

import cv2
import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from pydantic import BaseModel, Field

from mcpad.geometry import (
    CameraExtrinsics,
    build_registration_map,
    compute_disparity,
    disparity_to_depth_cloud,
    rectify_stereo_pair,
    warp_to_reference,
)
from mcpad.geometry.camera import CameraRig, load_calibration, rig_from_dict, rig_to_dict, save_calibration
from mcpad.geometry.rectify import rotation_exp
from mcpad.orchestrate.workspace import Workspace

STEREO_BLOCK_SIZE = 9


class ServiceStartupError(RuntimeError):
    pass


class Deltas(BaseModel):
    rx: float = 0.0  # degrees
    ry: float = 0.0
    rz: float = 0.0
    tx: float = 0.0  # millimeters
    ty: float = 0.0
    tz: float = 0.0


class OverlayRequest(BaseModel):
    frame_id: str
    ref_channel: str
    target_channel: str
    deltas: Deltas = Field(default_factory=Deltas)
    blend: float = 0.5


def apply_deltas(extr: CameraExtrinsics, deltas: Deltas) -> CameraExtrinsics:
    """Perturb a camera pose in its own frame: X' = Rd (R X + t) + dt."""
    rd = (
        rotation_exp(np.array([0.0, 0.0, np.radians(deltas.rz)]))
        @ rotation_exp(np.array([0.0, np.radians(deltas.ry), 0.0]))
        @ rotation_exp(np.array([np.radians(deltas.rx), 0.0, 0.0]))
    )
    dt = np.array([deltas.tx, deltas.ty, deltas.tz]) / 1000.0
    return CameraExtrinsics(rd @ extr.rotation, rd @ extr.translation + dt)


def _png_response(image01: np.ndarray) -> Response:
    img = np.clip(np.floor(image01 * 255.0 + 0.5), 0, 255).astype(np.uint8)
    if img.ndim == 3:
        img = img[:, :, ::-1]  # RGB -> BGR for the encoder
    ok, buf = cv2.imencode(".png", img)
    if not ok:
        raise HTTPException(500, "png encoding failed")
    return Response(content=buf.tobytes(), media_type="image/png")


class InspectorState:
    def __init__(self, ws: Workspace):
        self.ws = ws
        self.lock = threading.Lock()
        self._cloud_cache: dict[tuple[str, str], tuple] = {}

    def rig(self) -> CameraRig:
        if not self.ws.calibration_path.exists():
            raise HTTPException(404, "workspace has no calibration.json")
        return load_calibration(self.ws.calibration_path)

    def frame_ids(self) -> list[str]:
        if not self.ws.captures_dir.exists():
            return []
        return sorted(p.name for p in self.ws.captures_dir.iterdir() if p.is_dir())

    def capture(self, frame_id: str, sensor_id: str) -> np.ndarray:
        path = self.ws.captures_dir / frame_id / f"{sensor_id}.png"
        img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        if img is None:
            raise HTTPException(404, f"no capture {sensor_id!r} in frame {frame_id!r}")
        return img.astype(np.float64) / 65535.0

    def reference_geometry(self, frame_id: str):
        """Rectified-left view and its tagged point cloud, cached per rig."""
        rig = self.rig()
        key = (frame_id, self.ws.rig_hash() or "")
        if key not in self._cloud_cache:
            left = self.capture(frame_id, "nir_left")
            right = self.capture(frame_id, "nir_right")
            rect_l, rect_r, rect = rectify_stereo_pair(rig, left, right)
            intr = rect.intrinsics
            max_disp = int(np.clip(intr.fx * rig.baseline / 0.4, 16, 96))
            disp = compute_disparity(rect_l, rect_r, STEREO_BLOCK_SIZE, max_disp)
            cloud = disparity_to_depth_cloud(disp, rect, rig.baseline)
            self._cloud_cache.clear()  # keep a single frame's geometry around
            self._cloud_cache[key] = (rect_l, cloud)
        return self._cloud_cache[key]

    def aligned_channel(self, frame_id: str, sensor_id: str, deltas: Deltas | None = None) -> np.ndarray:
        rect_l, cloud = self.reference_geometry(frame_id)
        rig = self.rig()
        if sensor_id == rig.reference_id:
            return rect_l
        intr, extr = rig.camera(sensor_id)
        if deltas is not None:
            extr = apply_deltas(extr, deltas)
        reg = build_registration_map(cloud, (intr, extr), ref_size=rect_l.shape, target_id=sensor_id)
        aligned, _ = warp_to_reference(self.capture(frame_id, sensor_id), reg)
        return aligned


def create_app(workspace: str | Path | Workspace) -> FastAPI:
    ws = workspace if isinstance(workspace, Workspace) else Workspace(workspace)
    state = InspectorState(ws)
    app = FastAPI(title="mcpad calibration inspector")

    @app.get("/api/calibration")
    def get_calibration():
        return rig_to_dict(state.rig())

    @app.get("/api/frames")
    def get_frames():
        return {"frames": state.frame_ids()}

    @app.get("/api/frame/{frame_id}/channel/{channel}")
    def get_frame_channel(frame_id: str, channel: str):
        return _png_response(state.capture(frame_id, channel))

    @app.post("/api/overlay")
    def post_overlay(req: OverlayRequest):
        if not 0.0 <= req.blend <= 1.0:
            raise HTTPException(422, "blend must lie in [0, 1]")
        rig = state.rig()
        for ch in (req.ref_channel, req.target_channel):
            if ch not in rig.cameras:
                raise HTTPException(404, f"unknown channel {ch!r}")
        try:
            ref = state.aligned_channel(req.frame_id, req.ref_channel)
            target = state.aligned_channel(req.frame_id, req.target_channel, req.deltas)
        except FileNotFoundError as e:
            raise HTTPException(404, str(e)) from None
        # Reference rides the green channel, the target magenta, so any
        # misalignment shows up as color fringing.
        falsecolor = np.stack([target, ref, target], axis=2)
        gray = np.repeat(ref[:, :, None], 3, axis=2)
        composite = (1.0 - req.blend) * gray + req.blend * falsecolor
        return _png_response(composite)

    @app.post("/api/calibration/accept")
    def post_accept(rig_json: dict):
        try:
            rig = rig_from_dict(rig_json)
        except (KeyError, ValueError, TypeError) as e:
            raise HTTPException(422, f"invalid rig: {e}") from None
        with state.lock:
            tmp = ws.calibration_path.with_suffix(".json.tmp")
            save_calibration(rig, tmp)
            tmp.replace(ws.calibration_path)
            state._cloud_cache.clear()
        return {"status": "accepted", "rig_hash": ws.rig_hash()}

    return app


def serve_inspector(workspace: str | Path, port: int, host: str = "127.0.0.1") -> None:
    """Run the inspector service; raises if the port is already taken."""
    import uvicorn

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as e:
        raise ServiceStartupError(f"cannot bind {host}:{port}: {e}") from None
    finally:
        probe.close()
    uvicorn.run(create_app(workspace), host=host, port=port, log_level="warning")
