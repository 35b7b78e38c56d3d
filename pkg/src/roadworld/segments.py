"""On-disk driving segment format.

One directory per segment:
  frames.rt   raw tensor [T, H, W] float32 grayscale in [0, 1]
  depths.rt   raw tensor [T, H, W] float32 meters (far-plane sentinel for sky)
  meta.jsonl  one record per frame: {t, x, y, z, roll, pitch, yaw, speed,
              curvature, accel, lane_offset, impulse}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Pose
from .rten import open_rten_memmap, read_rten, write_rten

META_FIELDS = ("t", "x", "y", "z", "roll", "pitch", "yaw", "speed",
               "curvature", "accel", "lane_offset", "impulse")


@dataclass
class Segment:
    frames: np.ndarray  # [T, H, W]
    depths: np.ndarray | None
    poses: list  # list[Pose], length T
    speeds: np.ndarray  # [T]
    actions: np.ndarray  # [T, 2] commanded (curvature, accel)
    lane_offsets: np.ndarray  # [T]
    impulses: np.ndarray  # [T] in {-1, 0, +1}
    path: Path | None = None

    def __len__(self):
        return len(self.poses)

    def pose_array(self) -> np.ndarray:
        return np.array([p.as_array() for p in self.poses])


def save_segment(path, frames, depths, poses, speeds, actions, lane_offsets, impulses, dt=0.2):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    n = len(poses)
    for name, arr in (("frames", frames), ("depths", depths)):
        if len(arr) != n:
            raise ValueError(f"{name} length {len(arr)} != {n} poses")
    write_rten(path / "frames.rt", np.asarray(frames, dtype=np.float32))
    write_rten(path / "depths.rt", np.asarray(depths, dtype=np.float32))
    try:
        with open(path / "meta.jsonl", "w") as f:
            for i in range(n):
                p = poses[i]
                rec = {
                    "t": round(i * dt, 6),
                    "x": float(p.x), "y": float(p.y), "z": float(p.z),
                    "roll": float(p.roll), "pitch": float(p.pitch), "yaw": float(p.yaw),
                    "speed": float(speeds[i]),
                    "curvature": float(actions[i][0]), "accel": float(actions[i][1]),
                    "lane_offset": float(lane_offsets[i]),
                    "impulse": int(impulses[i]),
                }
                f.write(json.dumps(rec) + "\n")
    except OSError as e:
        raise OSError(f"failed writing segment metadata under {path}: {e}") from e


def load_segment(path, with_frames=True, with_depths=True, mmap=True) -> Segment:
    path = Path(path)
    if not (path / "meta.jsonl").exists():
        raise FileNotFoundError(f"{path} is not a segment directory (missing meta.jsonl)")
    poses, speeds, actions, offsets, impulses = [], [], [], [], []
    with open(path / "meta.jsonl") as f:
        for line in f:
            r = json.loads(line)
            poses.append(Pose(r["x"], r["y"], r["z"], r["roll"], r["pitch"], r["yaw"]))
            speeds.append(r["speed"])
            actions.append((r["curvature"], r["accel"]))
            offsets.append(r["lane_offset"])
            impulses.append(r["impulse"])
    reader = open_rten_memmap if mmap else read_rten
    frames = reader(path / "frames.rt") if with_frames else None
    depths = reader(path / "depths.rt") if with_depths else None
    return Segment(
        frames=frames,
        depths=depths,
        poses=poses,
        speeds=np.array(speeds, dtype=np.float64),
        actions=np.array(actions, dtype=np.float64),
        lane_offsets=np.array(offsets, dtype=np.float64),
        impulses=np.array(impulses, dtype=np.int8),
        path=path,
    )


def list_segments(root) -> list[Path]:
    root = Path(root)
    if not root.exists():
        raise FileNotFoundError(f"dataset directory {root} does not exist")
    return sorted(p for p in root.iterdir() if p.is_dir() and (p / "meta.jsonl").exists())
