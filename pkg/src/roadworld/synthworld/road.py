"""Procedural roads: piecewise-constant curvature profiles with short linear
blends, plus fast world <-> road-coordinate queries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

MAX_ROAD_CURVATURE = 0.02  # 1/m
DEFAULT_BLEND_LENGTH = 30.0  # m, ramp between curvature pieces


@dataclass(frozen=True)
class RoadSpec:
    piece_lengths: tuple  # meters of arc length per piece
    piece_curvatures: tuple  # 1/m, one per piece
    lane_width: float = 3.5
    lane_count: int = 2
    texture_seed: int = 0
    blend_length: float = DEFAULT_BLEND_LENGTH

    def __post_init__(self):
        if len(self.piece_lengths) != len(self.piece_curvatures):
            raise ValueError("piece arrays must align")
        if any(abs(k) > MAX_ROAD_CURVATURE + 1e-12 for k in self.piece_curvatures):
            raise ValueError("curvature outside +-0.02 1/m")
        if not (3.0 <= self.lane_width <= 4.0):
            raise ValueError("lane_width outside [3.0, 4.0] m")
        if self.lane_count < 1:
            raise ValueError("lane_count must be >= 1")

    @property
    def length(self) -> float:
        return float(sum(self.piece_lengths))

    def curvature_knots(self):
        """(s values, curvature values) for linear interpolation; continuous."""
        h = self.blend_length / 2.0
        xs, ks = [0.0], [self.piece_curvatures[0]]
        s = 0.0
        for i, seg_len in enumerate(self.piece_lengths[:-1]):
            s += seg_len
            xs.extend([s - h, s + h])
            ks.extend([self.piece_curvatures[i], self.piece_curvatures[i + 1]])
        xs.append(self.length)
        ks.append(self.piece_curvatures[-1])
        return np.array(xs), np.array(ks)


MAX_HEADING_SWING = 1.3  # rad: keeps roads x-monotone so they never self-approach


def generate_road(seed: int, min_length: float = 2600.0, lane_count: int | None = None) -> RoadSpec:
    """Deterministic-in-seed road with mixed straights and curves."""
    rng = np.random.default_rng(seed)
    lengths, curvatures = [], []
    total, heading = 0.0, 0.0
    while total < min_length:
        seg_len = float(rng.uniform(150.0, 400.0))
        if rng.random() < 0.4:
            k = 0.0
        else:
            # highway-like: mostly gentle curves, occasionally tighter ones
            k = float(rng.choice([-1, 1])) * 0.012 * float(rng.random()) ** 2
        # clamp so the total heading never swings far from the start direction
        k = float(np.clip(k, (-MAX_HEADING_SWING - heading) / seg_len,
                          (MAX_HEADING_SWING - heading) / seg_len))
        heading += k * seg_len
        lengths.append(seg_len)
        curvatures.append(k)
        total += seg_len
    if lane_count is None:
        lane_count = int(rng.integers(2, 4))
    return RoadSpec(
        piece_lengths=tuple(lengths),
        piece_curvatures=tuple(curvatures),
        lane_width=float(rng.uniform(3.2, 3.8)),
        lane_count=lane_count,
        texture_seed=int(rng.integers(0, 2**31 - 1)),
    )


def straight_road(length: float = 1500.0, lane_count: int = 2, lane_width: float = 3.5,
                  texture_seed: int = 0) -> RoadSpec:
    return RoadSpec((length,), (0.0,), lane_width, lane_count, texture_seed)


def constant_curvature_road(curvature: float, length: float = 1500.0, lane_count: int = 2,
                            lane_width: float = 3.5, texture_seed: int = 0) -> RoadSpec:
    return RoadSpec((length,), (curvature,), lane_width, lane_count, texture_seed)


class RoadGeometry:
    """Sampled centerline with KD-tree lookup from world points to road
    coordinates (s along the road, d signed lateral, +d to the left)."""

    def __init__(self, spec: RoadSpec, ds: float = 0.5):
        self.spec = spec
        self.ds = ds
        xs, ks = spec.curvature_knots()
        n = int(np.ceil(spec.length / ds)) + 1
        self.s = np.arange(n) * ds
        self.kappa = np.interp(self.s, xs, ks)
        # heading: trapezoid integral of curvature (kept unwrapped)
        theta = np.concatenate([[0.0], np.cumsum(0.5 * (self.kappa[1:] + self.kappa[:-1]) * ds)])
        self.theta = theta
        mid = 0.5 * (theta[1:] + theta[:-1])
        x = np.concatenate([[0.0], np.cumsum(np.cos(mid) * ds)])
        y = np.concatenate([[0.0], np.cumsum(np.sin(mid) * ds)])
        self.xy = np.stack([x, y], axis=1)
        self._tree = cKDTree(self.xy)

    # -- scalar queries ------------------------------------------------------

    @property
    def length(self) -> float:
        return float(self.s[-1])

    @property
    def half_width(self) -> float:
        return self.spec.lane_count * self.spec.lane_width / 2.0

    def heading_at(self, s):
        return np.interp(s, self.s, self.theta)

    def curvature_at(self, s):
        return np.interp(s, self.s, self.kappa)

    def point_at(self, s, d=0.0):
        """World position of road coordinates (s, d)."""
        x = np.interp(s, self.s, self.xy[:, 0])
        y = np.interp(s, self.s, self.xy[:, 1])
        th = self.heading_at(s)
        return np.stack([x - d * np.sin(th), y + d * np.cos(th)], axis=-1)

    # -- world -> road ---------------------------------------------------------

    def locate(self, points: np.ndarray):
        """points [N, 2] -> (s [N], d [N]). Accuracy ~ds^2 * curvature."""
        points = np.atleast_2d(points)
        _, idx = self._tree.query(points)
        tangents = np.stack([np.cos(self.theta[idx]), np.sin(self.theta[idx])], axis=1)
        delta = points - self.xy[idx]
        along = np.einsum("nd,nd->n", tangents, delta)
        lateral = tangents[:, 0] * delta[:, 1] - tangents[:, 1] * delta[:, 0]
        return self.s[idx] + along, lateral

    # -- lanes -----------------------------------------------------------------

    def lane_boundaries(self) -> np.ndarray:
        w = self.spec.lane_width
        return -self.half_width + w * np.arange(self.spec.lane_count + 1)

    def lane_centers(self) -> np.ndarray:
        w = self.spec.lane_width
        return -self.half_width + w * (np.arange(self.spec.lane_count) + 0.5)

    def lane_index(self, d):
        idx = np.floor((np.asarray(d) + self.half_width) / self.spec.lane_width).astype(int)
        return np.clip(idx, 0, self.spec.lane_count - 1)

    def nearest_lane_offset(self, d):
        """Signed offset from the nearest lane center."""
        centers = self.lane_centers()
        d = np.asarray(d)
        return d - centers[self.lane_index(d)]

    def off_road(self, d, margin: float = 0.0):
        return np.abs(d) > self.half_width + margin
