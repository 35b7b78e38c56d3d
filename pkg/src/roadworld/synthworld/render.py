"""Pseudo-3D rendering of the flat-ground road world.

Every pixel ray is intersected with the ground plane z=0; shading is a smooth
analytic function of road coordinates (lane lines, road edges, dashed
boundaries, band-limited texture), low-passed by the pixel's ground footprint
so renders are anti-aliased and consistent under reprojection. Depth is the
exact camera-frame Z of the ray-ground intersection; sky pixels carry a
far-plane sentinel.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from ..geometry import CAM_FROM_VEHICLE, CameraIntrinsics, DEFAULT_CAMERA_HEIGHT, Pose
from .road import RoadGeometry

SKY_DEPTH = 1.0e4  # sentinel for rays that never hit the ground
SKY_VALUE = 0.08
ROAD_VALUE = 0.35
OFFROAD_VALUE = 0.16
LINE_VALUE = 0.95
LINE_HALF_WIDTH = 0.09  # m
EDGE_HALF_WIDTH = 0.12  # m
DASH_PERIOD = 4.0  # m
_MIN_SIGMA = 0.06  # m, intrinsic paint softness

_RAY_CACHE: dict = {}
_TEXTURE_CACHE: dict = {}


def _pixel_rays(intr: CameraIntrinsics) -> np.ndarray:
    key = (intr.focal_px, intr.cx, intr.cy, intr.width, intr.height)
    rays = _RAY_CACHE.get(key)
    if rays is None:
        u = np.arange(intr.width, dtype=np.float64)
        v = np.arange(intr.height, dtype=np.float64)
        uu, vv = np.meshgrid(u, v)
        rays = np.stack(
            [(uu - intr.cx) / intr.focal_px, (vv - intr.cy) / intr.focal_px, np.ones_like(uu)],
            axis=-1,
        ).reshape(-1, 3)
        _RAY_CACHE[key] = rays
    return rays


def _texture_components(seed: int):
    """Seeded band-limited texture: sum of separable cosines in road coords,
    even in the lateral coordinate so straight-road renders stay mirror
    symmetric."""
    comps = _TEXTURE_CACHE.get(seed)
    if comps is None:
        rng = np.random.default_rng(seed)
        n = 6
        comps = (
            rng.uniform(0.015, 0.04, n),  # amplitude
            rng.uniform(0.5, 2.5, n),  # along-road frequency rad/m
            rng.uniform(0.0, 2 * np.pi, n),  # along-road phase
            rng.uniform(0.4, 1.8, n),  # lateral frequency rad/m
        )
        _TEXTURE_CACHE[seed] = comps
    return comps


def _coverage(dist, half_width, sigma):
    """Fraction of a gaussian pixel footprint covered by a stripe of the given
    half width centered at distance ``dist``."""
    a = (dist + half_width) / (sigma * np.sqrt(2.0))
    b = (dist - half_width) / (sigma * np.sqrt(2.0))
    return 0.5 * (erf(a) - erf(b))


def render_frame(road: RoadGeometry, pose: Pose, intr: CameraIntrinsics,
                 cam_height: float = DEFAULT_CAMERA_HEIGHT):
    """Render (image, depth) float32 [H, W] for a vehicle pose."""
    rays = _pixel_rays(intr)
    r_wc = pose.rotation() @ CAM_FROM_VEHICLE
    dirs = rays @ r_wc.T
    origin = np.array([pose.x, pose.y, pose.z + cam_height])

    down = dirs[:, 2] < -1e-9
    t = np.where(down, -origin[2] / np.where(down, dirs[:, 2], -1.0), SKY_DEPTH)
    ground = origin[None, :2] + t[:, None] * dirs[:, :2]

    depth = np.where(down, t, SKY_DEPTH)  # camera-frame Z: ray z-component is 1
    image = np.full(rays.shape[0], SKY_VALUE)

    if np.any(down):
        pts = ground[down]
        z = depth[down]
        s, d = road.locate(pts)

        # gaussian ground footprint of a pixel (lateral and along-road)
        sig_d = np.sqrt(_MIN_SIGMA**2 + (0.7 * z / intr.focal_px) ** 2)
        sig_s = np.sqrt(
            _MIN_SIGMA**2 + (0.7 * z * z / (intr.focal_px * max(cam_height, 1e-6))) ** 2
        )

        half = road.half_width
        on_road = _coverage(np.abs(d), half, sig_d)  # stripe covering the full road
        shade = OFFROAD_VALUE + (ROAD_VALUE - OFFROAD_VALUE) * on_road

        amp, fs, ph, fd = _texture_components(road.spec.texture_seed)
        tex = np.zeros_like(shade)
        for a_j, fs_j, ph_j, fd_j in zip(amp, fs, ph, fd):
            att = np.exp(-0.5 * ((fs_j * sig_s) ** 2 + (fd_j * sig_d) ** 2))
            tex += a_j * np.cos(fs_j * s + ph_j) * np.cos(fd_j * np.abs(d)) * att
        shade = shade + tex

        bounds = road.lane_boundaries()
        dash_att = np.exp(-2.0 * (np.pi * sig_s / DASH_PERIOD) ** 2)
        dash = 0.5 + 0.5 * np.cos(2 * np.pi * s / DASH_PERIOD) * dash_att
        for i, bd in enumerate(bounds):
            edge = i == 0 or i == len(bounds) - 1
            hw = EDGE_HALF_WIDTH if edge else LINE_HALF_WIDTH
            cov = _coverage(np.abs(d - bd), hw, sig_d)
            if not edge:
                cov = cov * dash
            shade = shade + cov * (LINE_VALUE - shade)

        image[down] = shade

    image = np.clip(image, 0.0, 1.0)
    h, w = intr.height, intr.width
    return (
        image.reshape(h, w).astype(np.float32),
        depth.reshape(h, w).astype(np.float32),
    )


def ground_depth_formula(intr: CameraIntrinsics, v: float, cam_height: float = DEFAULT_CAMERA_HEIGHT):
    """Flat-ground depth of image row v for a level camera: h*f / (v - cy)."""
    return cam_height * intr.focal_px / (v - intr.cy)
