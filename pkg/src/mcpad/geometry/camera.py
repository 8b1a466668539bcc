"""Camera models: intrinsics, extrinsics, rigs and pinhole projection.

Conventions (standard computer vision):
  - world frame: arbitrary right-handed metric frame shared by all sensors
  - camera frame: X right, Y down, Z forward along the optical axis
  - extrinsics map world to camera: X_cam = R @ X_world + t
  - image frame: u right, v down, origin at the top-left pixel centre
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ORTHONORMAL_TOL = 1e-9


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics with 5-coefficient radial/tangential distortion."""

    fx: float
    fy: float
    cx: float
    cy: float
    dist: np.ndarray = field(default_factory=lambda: np.zeros(5))
    width: int = 640
    height: int = 480

    def __post_init__(self):
        object.__setattr__(self, "dist", np.asarray(self.dist, dtype=float).reshape(5))
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError(f"principal point ({self.cx}, {self.cy}) outside sensor {self.width}x{self.height}")

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class CameraExtrinsics:
    """World-to-camera rigid transform: X_cam = rotation @ X_world + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        err = np.abs(R.T @ R - np.eye(3)).max()
        if err > ORTHONORMAL_TOL:
            raise ValueError(f"rotation not orthonormal: max|R'R - I| = {err:.3e}")
        if abs(np.linalg.det(R) - 1.0) > 1e-6:
            raise ValueError(f"rotation determinant {np.linalg.det(R):.9f} != +1")

    @classmethod
    def identity(cls) -> "CameraExtrinsics":
        return cls(np.eye(3), np.zeros(3))

    @property
    def center(self) -> np.ndarray:
        """Camera centre in world coordinates: C = -R' t."""
        return -self.rotation.T @ self.translation

    def to_world(self, pts_cam: np.ndarray) -> np.ndarray:
        """Map camera-frame points back to the world frame."""
        pts_cam = np.atleast_2d(pts_cam)
        return (pts_cam - self.translation) @ self.rotation


Camera = tuple[CameraIntrinsics, CameraExtrinsics]


@dataclass(frozen=True)
class CameraRig:
    """All calibrated sensors of a capture station.

    `reference_id` is the sensor the aligned streams are expressed in (the
    rectified-left NIR view); `baseline` is the stereo baseline in meters.
    """

    cameras: dict[str, Camera]
    reference_id: str
    baseline: float

    def __post_init__(self):
        if self.reference_id not in self.cameras:
            raise ValueError(f"reference_id {self.reference_id!r} not among sensors {sorted(self.cameras)}")
        if not self.baseline > 0:
            raise ValueError(f"baseline must be positive, got {self.baseline}")

    def camera(self, sensor_id: str) -> Camera:
        try:
            return self.cameras[sensor_id]
        except KeyError:
            raise KeyError(f"sensor {sensor_id!r} not in rig (have {sorted(self.cameras)})") from None


def distort_normalized(x: np.ndarray, y: np.ndarray, dist: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Apply the (k1, k2, p1, p2, k3) model to normalized image coordinates."""
    k1, k2, p1, p2, k3 = dist
    r2 = x * x + y * y
    radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3))
    xd = x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x)
    yd = y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y
    return xd, yd


def undistort_normalized(
    xd: np.ndarray, yd: np.ndarray, dist: np.ndarray, iterations: int = 10
) -> tuple[np.ndarray, np.ndarray]:
    """Invert the distortion model by fixed-point iteration (10 rounds)."""
    x = np.array(xd, dtype=float, copy=True)
    y = np.array(yd, dtype=float, copy=True)
    k1, k2, p1, p2, k3 = dist
    for _ in range(iterations):
        r2 = x * x + y * y
        radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3))
        dx = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x)
        dy = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y
        x = (xd - dx) / radial
        y = (yd - dy) / radial
    return x, y


def project_points(cam: Camera, xyz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project world points into pixel coordinates.

    Returns (uv, valid); points with camera-frame z <= 0 are marked invalid
    (their uv rows are undefined). Points outside the sensor are still valid
    here; bounds are the caller's concern.
    """
    xyz = np.atleast_2d(np.asarray(xyz, dtype=float))
    if not np.all(np.isfinite(xyz)):
        raise ValueError("points must be finite")
    intr, extr = cam
    pc = xyz @ extr.rotation.T + extr.translation
    z = pc[:, 2]
    valid = z > 0
    zsafe = np.where(valid, z, 1.0)
    xn = pc[:, 0] / zsafe
    yn = pc[:, 1] / zsafe
    xd, yd = distort_normalized(xn, yn, intr.dist)
    uv = np.stack([intr.fx * xd + intr.cx, intr.fy * yd + intr.cy], axis=1)
    return uv, valid


def project_point(cam: Camera, xyz) -> tuple[float, float] | None:
    """Project one world point; None when the point is behind the camera."""
    uv, valid = project_points(cam, np.asarray(xyz, dtype=float).reshape(1, 3))
    if not valid[0]:
        return None
    return float(uv[0, 0]), float(uv[0, 1])


def pixel_rays(intr: CameraIntrinsics, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Unit-z camera-frame ray directions for pixel coordinates (undistorted)."""
    xn = (np.asarray(u, dtype=float) - intr.cx) / intr.fx
    yn = (np.asarray(v, dtype=float) - intr.cy) / intr.fy
    x, y = undistort_normalized(xn, yn, intr.dist)
    return np.stack([x, y, np.ones_like(x)], axis=-1)


def load_calibration(path: str | Path) -> CameraRig:
    """Read a rig from the calibration JSON file (one object per sensor-id)."""
    raw = json.loads(Path(path).read_text())
    return rig_from_dict(raw)


def rig_from_dict(raw: dict) -> CameraRig:
    cameras: dict[str, Camera] = {}
    for sensor_id, c in raw.items():
        if sensor_id in ("reference_id", "baseline_m"):
            continue
        intr = CameraIntrinsics(
            fx=c["fx"], fy=c["fy"], cx=c["cx"], cy=c["cy"],
            dist=np.asarray(c["dist"], dtype=float),
            width=int(c["width"]), height=int(c["height"]),
        )
        extr = CameraExtrinsics(np.asarray(c["R"], dtype=float), np.asarray(c["t"], dtype=float))
        cameras[sensor_id] = (intr, extr)
    return CameraRig(cameras=cameras, reference_id=raw["reference_id"], baseline=float(raw["baseline_m"]))


def rig_to_dict(rig: CameraRig) -> dict:
    out: dict = {"reference_id": rig.reference_id, "baseline_m": rig.baseline}
    for sensor_id, (intr, extr) in sorted(rig.cameras.items()):
        out[sensor_id] = {
            "fx": intr.fx, "fy": intr.fy, "cx": intr.cx, "cy": intr.cy,
            "dist": intr.dist.tolist(),
            "R": extr.rotation.tolist(),
            "t": extr.translation.tolist(),
            "width": intr.width, "height": intr.height,
        }
    return out


def save_calibration(rig: CameraRig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(rig_to_dict(rig), indent=2, sort_keys=True) + "\n")
