"""Closed-loop stepping environment over the synthetic world.

Per 0.2 s tick: render the observation at the current pose, accept a curvature
command, advance the vehicle. Longitudinal control is a cruise hold (the
policy steers only; its accel head is trained and scored off-policy). Ground
truth lane offset and lane identity are exposed for scoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import CameraIntrinsics, Pose
from ..vehicle import DT, Action, VehicleParams, VehicleState, vehicle_step
from .expert import ExpertObjective, scripted_expert
from .render import render_frame
from .road import RoadGeometry, constant_curvature_road
from .scenarios import LANE_CHANGE, Scenario

CRUISE_GAIN = 0.8  # 1/s
START_S = 30.0  # m of road behind the start point


def nominal_eval_params() -> VehicleParams:
    """Fixed non-ideal vehicle every policy (and the expert oracle) faces."""
    return VehicleParams(
        steer_time_constant=0.3,
        steer_gain=1.0,
        lateral_bias=0.0015,
        actuator_delay_steps=1,
    )


@dataclass
class EpisodeTrace:
    poses: list = field(default_factory=list)
    lane_offsets: list = field(default_factory=list)  # to the *target* lane center
    lane_indices: list = field(default_factory=list)
    curvatures: list = field(default_factory=list)
    impulses: list = field(default_factory=list)
    off_road_ever: bool = False

    def __len__(self):
        return len(self.poses)


class ClosedLoopEnv:
    def __init__(self, scenario: Scenario, vehicle_params: VehicleParams | None = None,
                 intr: CameraIntrinsics | None = None, seed: int = 0, texture_seed: int = 77):
        self.scenario = scenario
        self.params = vehicle_params or nominal_eval_params()
        self.intr = intr or CameraIntrinsics.default()
        length = START_S + scenario.speed * scenario.duration + 200.0
        self.road = RoadGeometry(constant_curvature_road(
            scenario.road_curvature, length=length,
            lane_count=scenario.lane_count, lane_width=scenario.lane_width,
            texture_seed=texture_seed + (seed * 131),
        ))
        self.rng = np.random.default_rng(seed)
        d0 = float(self.road.lane_centers()[scenario.start_lane]) + scenario.initial_offset
        start = self.road.point_at(START_S, d0)
        yaw0 = float(self.road.heading_at(START_S)) + scenario.initial_heading_error
        self.state = VehicleState(
            pose=Pose(float(start[0]), float(start[1]), 0.0, 0.0, 0.0, yaw0),
            speed=scenario.speed,
        )
        self.t = 0
        self.n_steps = int(round(scenario.duration / DT))

    # -- observation ------------------------------------------------------------

    def impulse_value(self) -> int:
        if self.scenario.kind != LANE_CHANGE:
            return 0
        tick = self.t * DT
        if self.scenario.impulse_time - 1.0 <= tick < self.scenario.impulse_time:
            return self.scenario.change_direction
        return 0

    def observe(self):
        """(image, impulse) at the current pose."""
        image, _ = render_frame(self.road, self.state.pose, self.intr)
        return image, self.impulse_value()

    # -- ground truth -----------------------------------------------------------

    def road_coords(self):
        s, d = self.road.locate(np.array([[self.state.pose.x, self.state.pose.y]]))
        return float(s[0]), float(d[0])

    def lane_index(self) -> int:
        _, d = self.road_coords()
        return int(self.road.lane_index(d))

    def offset_from_lane(self, lane: int) -> float:
        _, d = self.road_coords()
        return float(d - self.road.lane_centers()[lane])

    def done(self) -> bool:
        return self.t >= self.n_steps

    # -- dynamics ---------------------------------------------------------------

    def step(self, curvature: float):
        accel = float(np.clip(CRUISE_GAIN * (self.scenario.speed - self.state.speed), -2.0, 2.0))
        noise = (
            self.params.curvature_noise_std * self.rng.standard_normal(),
            self.params.accel_noise_std * self.rng.standard_normal(),
        )
        self.state = vehicle_step(self.state, Action(curvature, accel), self.params, DT, noise)
        self.t += 1

    def run(self, act_fn) -> EpisodeTrace:
        """Drive ``act_fn(image, impulse) -> curvature`` to the end and record
        ground truth each tick."""
        trace = EpisodeTrace()
        target = self.scenario.target_lane
        while not self.done():
            image, impulse = self.observe()
            curvature = float(act_fn(image, impulse))
            _, d = self.road_coords()
            trace.poses.append(self.state.pose)
            trace.lane_offsets.append(float(d - self.road.lane_centers()[target]))
            trace.lane_indices.append(int(self.road.lane_index(d)))
            trace.curvatures.append(curvature)
            trace.impulses.append(impulse)
            if self.road.off_road(d):
                trace.off_road_ever = True
            self.step(curvature)
        return trace


def expert_act_fn(env: ClosedLoopEnv):
    """Scripted-expert driver for an environment (the pass oracle). Switches
    lane objective when its own impulse schedule fires."""
    objective = ExpertObjective(
        target_lane=env.scenario.start_lane, preference=0.0,
        target_speed=env.scenario.speed, noise_std=0.0,
    )
    switched = {"done": False}

    def act(image, impulse):
        if impulse != 0:
            switched["pending"] = impulse
        tick = env.t * DT
        if (not switched["done"] and env.scenario.kind == LANE_CHANGE
                and tick >= env.scenario.impulse_time):
            objective.target_lane = env.scenario.target_lane
            switched["done"] = True
        return scripted_expert(env.road, env.state, objective).curvature

    return act
