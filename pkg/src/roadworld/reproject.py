"""Reprojective simulation: synthesize the view from a perturbed pose by
splatting a source image through its depth map, with hole inpainting and
artifact quantification.

Forward splatting with a z-buffer (nearest depth wins), one-pixel footprint,
sub-pixel positions rounded to nearest. Backward sampling would need target
depth, which does not exist.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from .geometry import (
    CameraIntrinsics,
    DEFAULT_CAMERA_HEIGHT,
    Pose,
    pose_relative,
    relative_camera_transform,
    unproject_depth,
)

SOFT_RANGE_M = 4.0  # artifacts grow with translation; warn beyond this
HARD_RANGE_M = 8.0  # refuse beyond this


class WarpRangeError(ValueError):
    """Commanded pose too far from the source frame to reproject."""


@dataclass
class WarpResult:
    image: np.ndarray  # [H, W] float32, finite everywhere
    hole_mask: np.ndarray  # [H, W] bool, True where no source pixel landed

    @property
    def coverage(self) -> float:
        return float(1.0 - self.hole_mask.mean())


def _check_range(rel_pose: Pose):
    t = float(np.linalg.norm(rel_pose.translation))
    if t > HARD_RANGE_M:
        raise WarpRangeError(
            f"relative translation {t:.2f} m exceeds the {HARD_RANGE_M} m hard limit"
        )
    if t > SOFT_RANGE_M:
        warnings.warn(
            f"relative translation {t:.2f} m beyond the {SOFT_RANGE_M} m soft range;"
            " expect strong artifacts",
            stacklevel=3,
        )


def forward_warp(image: np.ndarray, depth: np.ndarray, rel_pose: Pose,
                 intr: CameraIntrinsics, cam_height: float = DEFAULT_CAMERA_HEIGHT) -> WarpResult:
    """Splat ``image`` (source) into the view at ``rel_pose``.

    ``rel_pose`` is the target vehicle pose expressed in the source vehicle
    frame (``pose_relative(source, target)``); the camera rig is rigid.
    """
    _check_range(rel_pose)
    h, w = image.shape
    pts, valid = unproject_depth(depth, intr)
    rot, tr = relative_camera_transform(rel_pose, cam_height)
    pts = pts.reshape(-1, 3) @ rot.T + tr

    z = pts[:, 2]
    ok = valid.reshape(-1) & (z > 1e-6)
    zsafe = np.where(ok, z, 1.0)
    u = np.rint(intr.cx + intr.focal_px * pts[:, 0] / zsafe).astype(np.int64)
    v = np.rint(intr.cy + intr.focal_px * pts[:, 1] / zsafe).astype(np.int64)
    ok &= (u >= 0) & (u < w) & (v >= 0) & (v < h)

    src = image.reshape(-1)[ok]
    zq = z[ok]
    flat = (v[ok] * w + u[ok]).astype(np.int64)
    # z-buffer: write far-to-near so the nearest surface lands last
    order = np.argsort(-zq, kind="stable")
    out = np.zeros(h * w, dtype=np.float32)
    hit = np.zeros(h * w, dtype=bool)
    out[flat[order]] = src[order]
    hit[flat[order]] = True

    return WarpResult(image=out.reshape(h, w), hole_mask=~hit.reshape(h, w))


def inpaint(result: WarpResult, tol: float = 1e-4, max_iters: int = 10_000) -> np.ndarray:
    """Fill holes by nearest-valid-pixel diffusion (iterative 4-neighbor
    averaging until converged). Non-hole pixels are untouched."""
    holes = result.hole_mask
    if holes.all():
        raise ValueError("cannot inpaint: warp produced no covered pixels")
    if not holes.any():
        return result.image.copy()

    img = result.image.astype(np.float64).copy()
    img[holes] = 0.0
    filled = ~holes

    def neighbor_stats(values, mask):
        vp = np.pad(values, 1)
        mp = np.pad(mask, 1)
        total = np.zeros_like(values)
        count = np.zeros(values.shape)
        for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            total += (vp * mp)[1 + dy : 1 + dy + values.shape[0], 1 + dx : 1 + dx + values.shape[1]]
            count += mp[1 + dy : 1 + dy + values.shape[0], 1 + dx : 1 + dx + values.shape[1]]
        return total, count

    # phase 1: grow the filled region inward from its boundary
    while not filled.all():
        total, count = neighbor_stats(img, filled)
        newly = holes & ~filled & (count > 0)
        img[newly] = total[newly] / count[newly]
        filled |= newly

    # phase 2: relax the hole region to convergence (covered pixels fixed)
    for _ in range(max_iters):
        total, count = neighbor_stats(img, np.ones_like(filled))
        avg = total / count
        delta = float(np.max(np.abs(avg[holes] - img[holes])))
        img[holes] = avg[holes]
        if delta < tol:
            break

    out = result.image.copy()
    out[holes] = img[holes].astype(np.float32)
    return out


def local_variance(image: np.ndarray, size: int = 3) -> np.ndarray:
    mean = uniform_filter(image.astype(np.float64), size=size, mode="nearest")
    sq = uniform_filter(image.astype(np.float64) ** 2, size=size, mode="nearest")
    return np.maximum(sq - mean * mean, 0.0)


INFLATION_WEIGHT = 0.01  # keeps the hole term dominant: score stays monotone
# in translation magnitude while splat noise still registers at zero holes


def artifact_score(original: np.ndarray, warped: WarpResult) -> float:
    """Hole fraction plus (downweighted) normalized local-variance inflation
    on the covered region. Zero for an identity warp; grows with pose delta."""
    if original.shape != warped.image.shape:
        raise ValueError("image dimensions differ")
    hole_frac = float(warped.hole_mask.mean())
    covered = ~warped.hole_mask
    if not covered.any():
        return hole_frac
    var_o = local_variance(original)
    var_w = local_variance(warped.image)
    inflation = np.maximum(var_w - var_o, 0.0)[covered].mean()
    return hole_frac + INFLATION_WEIGHT * float(inflation / (var_o.mean() + 1e-12))


def perturb_depth(depth: np.ndarray, sigma: float, rng) -> np.ndarray:
    """Multiplicative log-normal depth noise (depth-estimation ablation)."""
    if sigma <= 0:
        return depth
    return depth * np.exp(rng.normal(0.0, sigma, depth.shape)).astype(depth.dtype)


def composite_history(history, commanded_pose: Pose, intr: CameraIntrinsics,
                      cam_height: float = DEFAULT_CAMERA_HEIGHT) -> WarpResult:
    """Warp the newest frame of ``history`` (oldest-first tuples of image,
    depth, world pose) to ``commanded_pose`` and fill residual holes from
    progressively older frames.

    The newest frame must be within warping range (its range error
    propagates); older frames that have drifted out of range are skipped.
    """
    if len(history) == 0:
        raise ValueError("history must be nonempty")
    newest_first = list(history)[::-1]

    base = None
    for image, depth, pose in newest_first:
        rel = pose_relative(pose, commanded_pose)
        if base is None:
            warped = forward_warp(np.asarray(image), np.asarray(depth), rel, intr, cam_height)
            base = warped
        else:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    warped = forward_warp(np.asarray(image), np.asarray(depth), rel, intr,
                                          cam_height)
            except WarpRangeError:
                continue
            fill = base.hole_mask & ~warped.hole_mask
            base.image[fill] = warped.image[fill]
            base.hole_mask &= ~fill
        if not base.hole_mask.any():
            break
    return base


def reprojective_sim_step(history, commanded_pose: Pose, intr: CameraIntrinsics,
                          cam_height: float = DEFAULT_CAMERA_HEIGHT) -> np.ndarray:
    """Observation at ``commanded_pose``: composite the history, then inpaint
    whatever holes remain."""
    return inpaint(composite_history(history, commanded_pose, intr, cam_height))
