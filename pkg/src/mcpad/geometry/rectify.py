"""Stereo rectification by the symmetric half-rotation construction.

Both cameras are rotated halfway toward a common orientation, then the
common frame is spun so the baseline lies along +x. Afterwards any 3-D
point projects to the same row in both virtual views.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mcpad.geometry.camera import Camera, CameraExtrinsics, CameraIntrinsics, CameraRig, distort_normalized
from mcpad.geometry.interp import bilinear_sample


class RectificationError(RuntimeError):
    """Raised for degenerate rig configurations that cannot be rectified."""


@dataclass(frozen=True)
class RectifiedCalibration:
    """Calibration of the virtual row-aligned stereo pair.

    Both views share the distortion-free intrinsics; the right camera centre
    sits `baseline` meters along the rectified x axis from the left.
    """

    left: Camera
    right: Camera
    baseline: float

    @property
    def intrinsics(self) -> CameraIntrinsics:
        return self.left[0]


def rotation_log(R: np.ndarray) -> np.ndarray:
    """Rotation matrix -> axis*angle vector. Angles near pi are rejected."""
    cos_theta = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(cos_theta)
    if theta > np.pi - 1e-3:
        raise RectificationError(f"relative rotation of {np.degrees(theta):.1f} deg is degenerate")
    if theta < 1e-12:
        return np.zeros(3)
    axis = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]]) / (2.0 * np.sin(theta))
    return axis * theta


def rotation_exp(w: np.ndarray) -> np.ndarray:
    """Axis*angle vector -> rotation matrix (Rodrigues)."""
    theta = np.linalg.norm(w)
    if theta < 1e-12:
        return np.eye(3)
    k = w / theta
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(theta) * K + (1.0 - np.cos(theta)) * (K @ K)


def rectified_calibration(rig: CameraRig, left_id: str, right_id: str) -> RectifiedCalibration:
    """Compute the rectified calibration without touching any pixels."""
    intr_l, extr_l = rig.camera(left_id)
    intr_r, extr_r = rig.camera(right_id)

    R_rel = extr_r.rotation @ extr_l.rotation.T
    half = rotation_exp(rotation_log(R_rel) / 2.0)
    R_common = half @ extr_l.rotation

    c_l, c_r = extr_l.center, extr_r.center
    b = R_common @ (c_r - c_l)
    b_norm = np.linalg.norm(b)
    if b_norm < 1e-12:
        raise RectificationError("coincident camera centres, no baseline to rectify along")
    e1 = b / b_norm
    up = np.array([0.0, 0.0, 1.0])
    e2 = np.cross(up, e1)
    e2_norm = np.linalg.norm(e2)
    if e2_norm < 1e-9:
        raise RectificationError("baseline parallel to the optical axis")
    e2 = e2 / e2_norm
    e3 = np.cross(e1, e2)
    R_new = np.vstack([e1, e2, e3]) @ R_common

    f = (intr_l.fx + intr_l.fy + intr_r.fx + intr_r.fy) / 4.0
    intr_rect = CameraIntrinsics(
        fx=f, fy=f,
        cx=(intr_l.cx + intr_r.cx) / 2.0, cy=(intr_l.cy + intr_r.cy) / 2.0,
        dist=np.zeros(5), width=intr_l.width, height=intr_l.height,
    )
    left = (intr_rect, CameraExtrinsics(R_new, -R_new @ c_l))
    right = (intr_rect, CameraExtrinsics(R_new, -R_new @ c_r))
    return RectifiedCalibration(left=left, right=right, baseline=float(b_norm))


def _remap_to_rectified(image: np.ndarray, original: Camera, rectified: Camera) -> np.ndarray:
    """Warp one original view into its rectified frame."""
    intr_o, extr_o = original
    intr_n, extr_n = rectified
    h, w = intr_n.height, intr_n.width
    u, v = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
    d = np.stack([(u - intr_n.cx) / intr_n.fx, (v - intr_n.cy) / intr_n.fy, np.ones_like(u)], axis=-1)
    # Camera centres coincide, so the rectified->original change is a pure rotation.
    rot = extr_o.rotation @ extr_n.rotation.T
    d = d @ rot.T
    z = d[..., 2]
    ok = z > 1e-9
    zsafe = np.where(ok, z, 1.0)
    xd, yd = distort_normalized(d[..., 0] / zsafe, d[..., 1] / zsafe, intr_o.dist)
    src_x = np.where(ok, intr_o.fx * xd + intr_o.cx, -1.0)
    src_y = np.where(ok, intr_o.fy * yd + intr_o.cy, -1.0)
    out, _ = bilinear_sample(image, src_x, src_y)
    return out


def rectify_stereo_pair(
    rig: CameraRig,
    left: np.ndarray,
    right: np.ndarray,
    left_id: str | None = None,
    right_id: str | None = None,
) -> tuple[np.ndarray, np.ndarray, RectifiedCalibration]:
    """Rectify an image pair so epipolar lines become image rows.

    Sensor ids default to "nir_left"/"nir_right". Raises RectificationError
    for degenerate rigs (180 deg relative rotation, zero baseline, baseline
    along the optical axis).
    """
    left_id = left_id or "nir_left"
    right_id = right_id or "nir_right"
    rect = rectified_calibration(rig, left_id, right_id)
    out_l = _remap_to_rectified(left, rig.camera(left_id), rect.left)
    out_r = _remap_to_rectified(right, rig.camera(right_id), rect.right)
    return out_l, out_r, rect
