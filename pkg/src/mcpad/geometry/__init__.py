"""Calibration-driven registration of multi-sensor streams.

Stereo rectification, block-matching depth, point-cloud reprojection and
inverse-map warping onto the reference view. All operations are pure
functions of their inputs and safe to run concurrently across frames.
"""

from mcpad.geometry.camera import (
    Camera,
    CameraExtrinsics,
    CameraIntrinsics,
    CameraRig,
    distort_normalized,
    load_calibration,
    project_point,
    project_points,
    save_calibration,
    undistort_normalized,
)
from mcpad.geometry.rectify import RectifiedCalibration, RectificationError, rectify_stereo_pair
from mcpad.geometry.register import (
    RegistrationMap,
    build_registration_map,
    load_registration_map,
    save_registration_map,
    warp_to_reference,
)
from mcpad.geometry.stereo import DisparityMap, PointCloud, compute_disparity, disparity_to_depth_cloud

__all__ = [
    "Camera",
    "CameraExtrinsics",
    "CameraIntrinsics",
    "CameraRig",
    "DisparityMap",
    "PointCloud",
    "RectificationError",
    "RectifiedCalibration",
    "RegistrationMap",
    "build_registration_map",
    "compute_disparity",
    "disparity_to_depth_cloud",
    "distort_normalized",
    "load_calibration",
    "load_registration_map",
    "project_point",
    "project_points",
    "rectify_stereo_pair",
    "save_calibration",
    "save_registration_map",
    "undistort_normalized",
    "warp_to_reference",
]
