"""Demonstration dataset generation: the scripted expert driving procedurally
generated roads on domain-randomized vehicles, recorded in the segment
format. Segments are independent given (seed, index), so generation is
parallel and byte-identical regardless of worker count."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ..geometry import CameraIntrinsics, Pose
from ..segments import save_segment
from ..vehicle import (
    DT,
    VehicleState,
    reset_actuator,
    quiet,
    sample_vehicle_params,
    vehicle_step,
)
from .expert import ExpertObjective, scripted_expert
from .road import RoadGeometry, generate_road

SEGMENT_FRAMES = 300  # 60 s at 5 Hz
LANE_CHANGE_FRACTION = 0.08
IMPULSE_FRAMES = 5  # 1 s of conditioning impulse before initiation


def plan_segment(seed: int, index: int):
    """Everything a segment needs, derived from (seed, index) alone.

    The vehicle is domain randomized but runs without actuator process noise:
    the human-like wander comes from the expert's commanded noise, which is
    recorded, so stored actions replay to the stored poses exactly.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    road = RoadGeometry(generate_road(int(rng.integers(0, 2**31 - 1))))
    params = quiet(sample_vehicle_params(rng))

    lane = int(rng.integers(0, road.spec.lane_count))
    # drivers feel the car's total lag and slow down in sluggish vehicles
    lag = params.actuator_delay_steps * DT + params.steer_time_constant + DT
    max_speed = float(np.clip(20.0 / lag - 2.6, 8.0, 28.0))
    objective = ExpertObjective(
        target_lane=lane,
        preference=float(np.clip(rng.normal(0.0, 0.1), -0.25, 0.25)),
        target_speed=min(float(rng.uniform(12.0, 28.0)), max_speed),
        vehicle_lag_hint=lag,
        rng=rng,
    )

    change_frame, change_dir = -1, 0
    if road.spec.lane_count >= 2 and rng.random() < LANE_CHANGE_FRACTION:
        change_frame = int(rng.integers(60, 220))
        if lane == 0:
            change_dir = 1
        elif lane == road.spec.lane_count - 1:
            change_dir = -1
        else:
            change_dir = int(rng.choice([-1, 1]))

    s0 = 40.0
    d0 = float(road.lane_centers()[lane]) + objective.preference + float(
        np.clip(rng.normal(0, 0.1), -0.2, 0.2)
    )
    start = road.point_at(s0, d0)
    yaw0 = float(road.heading_at(s0)) + float(rng.normal(0, 0.02))
    state = VehicleState(
        pose=Pose(float(start[0]), float(start[1]), 0.0, 0.0, 0.0, yaw0),
        speed=objective.target_speed * float(rng.uniform(0.9, 1.05)),
    )
    return road, params, objective, state, change_frame, change_dir


BURN_IN_STEPS = 75  # 15 s of driving before the recording starts


def _simulate_segment(seed: int, index: int, intr: CameraIntrinsics, n_frames: int):
    from .render import render_frame  # local import keeps worker startup cheap

    road, params, objective, state, change_frame, change_dir = plan_segment(seed, index)
    for _ in range(BURN_IN_STEPS):  # recordings begin mid-drive, fully settled
        state = vehicle_step(state, scripted_expert(road, state, objective), params, DT)
    frames = np.empty((n_frames, intr.height, intr.width), dtype=np.float32)
    depths = np.empty_like(frames)
    poses, speeds, actions, offsets, impulses = [], [], [], [], []

    for t in range(n_frames):
        if t == change_frame:
            objective.target_lane += change_dir
        frames[t], depths[t] = render_frame(road, state.pose, intr)
        _, d = road.locate(np.array([[state.pose.x, state.pose.y]]))
        poses.append(state.pose)
        speeds.append(state.speed)
        offsets.append(float(road.nearest_lane_offset(float(d[0]))))
        impulse = 0
        if change_frame > 0 and change_frame - IMPULSE_FRAMES <= t < change_frame:
            impulse = change_dir
        impulses.append(impulse)

        action = scripted_expert(road, state, objective)
        actions.append((action.curvature, action.accel))
        if t == 0:
            # make the in-flight actuator state replayable from the file
            state = reset_actuator(state, action, params)
        state = vehicle_step(state, action, params, DT)

    return frames, depths, poses, speeds, actions, offsets, impulses


def _generate_one(args):
    out_dir, seed, index, intr_tuple, n_frames = args
    intr = CameraIntrinsics(*intr_tuple)
    data = _simulate_segment(seed, index, intr, n_frames)
    seg_dir = Path(out_dir) / f"seg_{index:05d}"
    save_segment(seg_dir, *data, dt=DT)
    return str(seg_dir)


def generate_dataset(out_dir, n_segments: int, seed: int,
                     intr: CameraIntrinsics | None = None,
                     n_frames: int = SEGMENT_FRAMES, workers: int = 1) -> Path:
    """Write ``n_segments`` segments plus a manifest; returns the dataset dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    intr = intr or CameraIntrinsics.default()
    intr_tuple = (intr.focal_px, intr.cx, intr.cy, intr.width, intr.height)
    jobs = [(out_dir, seed, i, intr_tuple, n_frames) for i in range(n_segments)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            list(pool.map(_generate_one, jobs, chunksize=4))
    else:
        for job in jobs:
            _generate_one(job)
    manifest = {
        "n_segments": n_segments,
        "seed": seed,
        "n_frames": n_frames,
        "dt": DT,
        "camera": {"focal_px": intr.focal_px, "cx": intr.cx, "cy": intr.cy,
                   "width": intr.width, "height": intr.height},
        "format": 1,
    }
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return out_dir


def load_manifest(dataset_dir) -> dict:
    path = Path(dataset_dir) / "manifest.json"
    if not path.exists():
        raise FileNotFoundError(f"{path} missing; generate the dataset first")
    with open(path) as f:
        return json.load(f)


def camera_from_manifest(manifest: dict) -> CameraIntrinsics:
    c = manifest["camera"]
    return CameraIntrinsics(c["focal_px"], c["cx"], c["cy"], c["width"], c["height"])
