"""Synthetic textured-plane scenes for registration sanity checks.

Renders a fronto-parallel albedo plane through calibrated cameras by exact
ray casting, so every sensor of a rig images the same scene. Used by the
calibration inspector's demo capture set and by the geometry test suite.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from mcpad.geometry.camera import Camera, CameraExtrinsics, CameraIntrinsics, CameraRig, pixel_rays
from mcpad.geometry.rectify import rotation_exp

Texture = Callable[[np.ndarray, np.ndarray], np.ndarray]


def default_texture(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Smooth multi-frequency albedo in [0, 1]; view independent."""
    v = (
        0.5
        + 0.18 * np.sin(31.0 * x) * np.cos(27.0 * y)
        + 0.12 * np.sin(90.0 * x + 40.0 * y)
        + 0.10 * np.cos(71.0 * y - 55.0 * x)
        + 0.06 * np.sin(140.0 * x) * np.sin(120.0 * y)
    )
    return np.clip(v, 0.0, 1.0)


def render_plane(cam: Camera, plane_z: float = 0.8, texture: Texture = default_texture) -> np.ndarray:
    """Ray-cast the plane {Z = plane_z} through a camera; float image in [0, 1]."""
    intr, extr = cam
    u, v = np.meshgrid(np.arange(intr.width, dtype=float), np.arange(intr.height, dtype=float))
    rays_cam = pixel_rays(intr, u, v)
    rays_world = rays_cam @ extr.rotation
    center = extr.center
    dz = rays_world[..., 2]
    ok = np.abs(dz) > 1e-12
    s = np.where(ok, (plane_z - center[2]) / np.where(ok, dz, 1.0), np.nan)
    ok &= s > 0
    px = center[0] + s * rays_world[..., 0]
    py = center[1] + s * rays_world[..., 1]
    out = np.where(ok, texture(px, py), 0.0)
    return out


def make_demo_rig(
    size: int = 160,
    focal: float = 220.0,
    baseline: float = 0.05,
    right_yaw_deg: float = 2.0,
) -> CameraRig:
    """A small multi-sensor rig: rectifiable NIR pair plus offset color/thermal.

    The left NIR camera sits at the world origin looking down +z; the plane
    scenes from `render_plane` are fully visible from every sensor.
    """
    c = (size - 1) / 2.0

    def intr(f=focal, dist=(0, 0, 0, 0, 0)):
        return CameraIntrinsics(fx=f, fy=f, cx=c, cy=c, dist=np.asarray(dist, float), width=size, height=size)

    def extr(center, rotvec_deg=(0.0, 0.0, 0.0)):
        R = rotation_exp(np.radians(np.asarray(rotvec_deg, float)))
        center = np.asarray(center, float)
        return CameraExtrinsics(R, -R @ center)

    cameras = {
        "nir_left": (intr(), extr([0.0, 0.0, 0.0])),
        "nir_right": (intr(), extr([baseline, 0.0, 0.0], (0.0, right_yaw_deg, 0.0))),
        "rgb": (intr(dist=(0.02, 0.0, 0.0, 0.0, 0.0)), extr([0.025, 0.015, 0.0], (1.0, -1.0, 0.5))),
        "thermal": (intr(f=focal * 0.9), extr([-0.03, 0.01, 0.0], (0.5, 1.0, 0.0))),
    }
    return CameraRig(cameras=cameras, reference_id="nir_left", baseline=baseline)
