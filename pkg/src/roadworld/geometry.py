"""SE(3) poses, pinhole camera model, and point projection/unprojection.

Conventions used throughout the package:
  * world frame: x east, y north, z up; yaw is CCW about z, zero along +x
  * vehicle frame: x forward, y left, z up
  * camera frame: X right, Y down, Z forward (standard pinhole)
  * Euler order is intrinsic Z-Y-X (yaw, then pitch, then roll)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TAU = 2.0 * math.pi

# Minimum forward depth for a valid projection, in meters.
MIN_DEPTH = 1e-6


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = math.remainder(a, TAU)
    if w <= -math.pi:
        w += TAU
    return w


@dataclass(frozen=True)
class Pose:
    """Rigid vehicle pose: translation in meters, Euler angles in radians.

    Angles are wrapped to (-pi, pi] on construction.
    """

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "roll", wrap_angle(self.roll))
        object.__setattr__(self, "pitch", wrap_angle(self.pitch))
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def rotation(self) -> np.ndarray:
        """3x3 rotation matrix, R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
        cr, sr = math.cos(self.roll), math.sin(self.roll)
        cp, sp = math.cos(self.pitch), math.sin(self.pitch)
        cy, sy = math.cos(self.yaw), math.sin(self.yaw)
        return np.array(
            [
                [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
                [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
                [-sp, cp * sr, cp * cr],
            ],
            dtype=np.float64,
        )

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous transform."""
        m = np.eye(4)
        m[:3, :3] = self.rotation()
        m[:3, 3] = self.translation
        return m

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.roll, self.pitch, self.yaw])

    @staticmethod
    def identity() -> "Pose":
        return Pose()


def _pose_from_matrix(m: np.ndarray) -> Pose:
    # ZYX Euler extraction; pitch = +-pi/2 is a gimbal singularity where roll
    # is folded into yaw (never reached by the planar worlds in this package).
    sp = -m[2, 0]
    sp = min(1.0, max(-1.0, sp))
    pitch = math.asin(sp)
    if abs(sp) > 1.0 - 1e-12:
        yaw = math.atan2(-m[0, 1], m[1, 1])
        roll = 0.0
    else:
        yaw = math.atan2(m[1, 0], m[0, 0])
        roll = math.atan2(m[2, 1], m[2, 2])
    return Pose(m[0, 3], m[1, 3], m[2, 3], roll, pitch, yaw)


def pose_compose(a: Pose, b: Pose) -> Pose:
    """Pose of frame b expressed through frame a (rigid-body composition)."""
    ra = a.rotation()
    t = ra @ b.translation + a.translation
    r = ra @ b.rotation()
    m = np.eye(4)
    m[:3, :3] = r
    m[:3, 3] = t
    return _pose_from_matrix(m)


def pose_invert(p: Pose) -> Pose:
    r = p.rotation().T
    t = -r @ p.translation
    m = np.eye(4)
    m[:3, :3] = r
    m[:3, 3] = t
    return _pose_from_matrix(m)


def pose_relative(world_a: Pose, world_b: Pose) -> Pose:
    """Pose of b in a's frame: pose_compose(a, result) == b."""
    return pose_compose(pose_invert(world_a), world_b)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics with a square focal length, in pixels."""

    focal_px: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.focal_px <= 0:
            raise ValueError(f"focal_px must be positive, got {self.focal_px}")
        if not (0 <= self.cx < self.width):
            raise ValueError(f"cx={self.cx} outside [0, {self.width})")
        if not (0 <= self.cy < self.height):
            raise ValueError(f"cy={self.cy} outside [0, {self.height})")

    @staticmethod
    def default(width: int = 64, height: int = 32, focal_px: float = 40.0) -> "CameraIntrinsics":
        # Half-pixel centers keep renders of symmetric scenes exactly mirror symmetric.
        return CameraIntrinsics(focal_px, (width - 1) / 2.0, (height - 1) / 2.0, width, height)


def project_points(pts: np.ndarray, intr: CameraIntrinsics):
    """Project camera-frame 3D points through a pinhole.

    Returns (proj, valid): proj[:, 0]=u, proj[:, 1]=v, proj[:, 2]=depth.
    Points with depth <= MIN_DEPTH are flagged invalid (their u,v are zeroed),
    never raised on.
    """
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
    z = pts[:, 2]
    valid = z > MIN_DEPTH
    zsafe = np.where(valid, z, 1.0)
    u = intr.cx + intr.focal_px * pts[:, 0] / zsafe
    v = intr.cy + intr.focal_px * pts[:, 1] / zsafe
    proj = np.stack([np.where(valid, u, 0.0), np.where(valid, v, 0.0), z], axis=1)
    return proj, valid


def unproject_depth(depth: np.ndarray, intr: CameraIntrinsics):
    """Lift a dense depth map to camera-frame points, one per pixel center.

    Returns (points HxWx3, valid HxW). Non-positive depths are invalid.
    """
    depth = np.asarray(depth, dtype=np.float64)
    h, w = depth.shape
    u = np.arange(w, dtype=np.float64)[None, :]
    v = np.arange(h, dtype=np.float64)[:, None]
    valid = depth > 0
    x = (u - intr.cx) * depth / intr.focal_px
    y = (v - intr.cy) * depth / intr.focal_px
    pts = np.stack([x, y, depth], axis=-1)
    return pts, valid


# Camera mounting: fixed forward-looking rig at a fixed height above the
# vehicle origin. Columns are the camera axes (right, down, forward) in
# vehicle coordinates (forward, left, up).
CAM_FROM_VEHICLE = np.array(
    [
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
    ],
    dtype=np.float64,
)  # vehicle <- camera

DEFAULT_CAMERA_HEIGHT = 1.2


def camera_mount_matrix(height: float = DEFAULT_CAMERA_HEIGHT) -> np.ndarray:
    """4x4 transform of the camera frame expressed in the vehicle frame."""
    m = np.eye(4)
    m[:3, :3] = CAM_FROM_VEHICLE
    m[2, 3] = height
    return m


def relative_camera_transform(rel_vehicle: Pose, height: float = DEFAULT_CAMERA_HEIGHT):
    """Map a relative vehicle pose to the source-camera -> target-camera transform.

    Returns (R, t) such that a point p_src in the source camera frame lands at
    R @ p_src + t in the target camera frame.
    """
    mount = camera_mount_matrix(height)
    cam_rel = np.linalg.inv(mount) @ rel_vehicle.matrix() @ mount
    inv = np.linalg.inv(cam_rel)
    return inv[:3, :3], inv[:3, 3]
