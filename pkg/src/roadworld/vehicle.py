"""Curvature-form kinematic vehicle model with actuator lag, delay, gain and
bias, plus the exact inverse mapping pose trajectories back to actions.

The state update per tick of ``dt`` seconds, in order:
  1. the commanded curvature enters a delay queue of ``actuator_delay_steps``
  2. effective curvature tracks gain*cmd + bias through a first-order lag
  3. yaw advances by speed * effective_curvature * dt
  4. position advances by speed * dt along the new heading
  5. speed integrates the commanded acceleration, floored at zero

The lag blend is min(1, dt/steer_time_constant): the plain Euler blend
overshoots for time constants below dt, and the clamp also provides the
instantaneous-response limit used by ideal params (time constant 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Pose, wrap_angle

CURVATURE_LIMIT = 0.2  # 1/m
ACCEL_LIMIT = 4.0  # m/s^2
DT = 0.2  # seconds; 5 Hz everywhere

_EPS_MOTION = 1e-9


def _clamp(v, lim):
    return -lim if v < -lim else (lim if v > lim else v)


@dataclass(frozen=True)
class Action:
    """Desired curvature (1/m) and longitudinal acceleration (m/s^2), clamped."""

    curvature: float = 0.0
    accel: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "curvature", _clamp(float(self.curvature), CURVATURE_LIMIT))
        object.__setattr__(self, "accel", _clamp(float(self.accel), ACCEL_LIMIT))


@dataclass(frozen=True)
class VehicleParams:
    steer_time_constant: float = 0.3  # seconds; 0 means instantaneous
    steer_gain: float = 1.0
    lateral_bias: float = 0.0  # 1/m, wind / road crown
    actuator_delay_steps: int = 0
    curvature_noise_std: float = 0.0  # 1/m per step
    accel_noise_std: float = 0.0  # m/s^2 per step

    def __post_init__(self):
        if self.steer_time_constant < 0:
            raise ValueError("steer_time_constant must be >= 0")
        if not (0.7 <= self.steer_gain <= 1.3):
            raise ValueError(f"steer_gain {self.steer_gain} outside [0.7, 1.3]")
        if not (0 <= self.actuator_delay_steps <= 3):
            raise ValueError("actuator_delay_steps outside [0, 3]")

    @staticmethod
    def ideal() -> "VehicleParams":
        return VehicleParams(steer_time_constant=0.0)

    def lag_blend(self, dt: float) -> float:
        if self.steer_time_constant <= dt:
            return 1.0
        return dt / self.steer_time_constant


@dataclass(frozen=True)
class VehicleState:
    pose: Pose = field(default_factory=Pose)
    speed: float = 0.0
    effective_curvature: float = 0.0
    # Commanded curvatures still in flight through the actuator delay.
    pending: tuple = ()

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("speed must be >= 0")


def vehicle_step(
    s: VehicleState,
    a: Action,
    params: VehicleParams,
    dt: float = DT,
    noise: tuple[float, float] = (0.0, 0.0),
) -> VehicleState:
    """Advance one tick. ``noise`` is this step's (curvature, accel) process
    noise draw, so the step itself stays deterministic."""
    if dt <= 0:
        raise ValueError("dt must be positive")

    queue = s.pending + (a.curvature,)
    if len(queue) > params.actuator_delay_steps:
        applied, queue = queue[0], queue[1:]
    else:
        applied = 0.0  # commands issued before the rollout started

    target = params.steer_gain * applied + params.lateral_bias + noise[0]
    alpha = params.lag_blend(dt)
    eff = s.effective_curvature + alpha * (target - s.effective_curvature)

    yaw = wrap_angle(s.pose.yaw + s.speed * eff * dt)
    x = s.pose.x + s.speed * math.cos(yaw) * dt
    y = s.pose.y + s.speed * math.sin(yaw) * dt
    speed = max(0.0, s.speed + (a.accel + noise[1]) * dt)

    return VehicleState(
        pose=Pose(x, y, s.pose.z, s.pose.roll, s.pose.pitch, yaw),
        speed=speed,
        effective_curvature=eff,
        pending=queue,
    )


def rollout_states(s0, actions, params, dt=DT, rng=None):
    """All intermediate states; element i is the state after i+1 steps."""
    states = []
    s = s0
    for a in actions:
        if rng is not None and (params.curvature_noise_std > 0 or params.accel_noise_std > 0):
            noise = (
                params.curvature_noise_std * rng.standard_normal(),
                params.accel_noise_std * rng.standard_normal(),
            )
        else:
            noise = (0.0, 0.0)
        s = vehicle_step(s, a, params, dt, noise)
        states.append(s)
    return states


def rollout_actions(s0, actions, params, dt=DT, rng=None):
    """Pose sequence produced by an action sequence (one pose per action)."""
    if len(actions) == 0:
        raise ValueError("action sequence must be nonempty")
    return [s.pose for s in rollout_states(s0, actions, params, dt, rng)]


def invert_trajectory(poses, v0, params=None, dt=DT, eff0=0.0):
    """Estimate the actions that drive ``poses[0] -> poses[1:]``.

    Exact inverse of the forward model when params match and process noise is
    zero: speeds come from chord lengths (the forward model is polygonal),
    effective curvature from yaw deltas, then the lag / gain / bias / delay
    chain is unwound. Zero-motion steps yield curvature 0 by convention.
    """
    if len(poses) < 2:
        raise ValueError("need at least 2 poses")
    params = params or VehicleParams.ideal()
    n = len(poses) - 1

    speeds = np.empty(n)
    effs = np.empty(n + 1)
    effs[0] = eff0
    moving = np.empty(n, dtype=bool)
    for k in range(n):
        dx = poses[k + 1].x - poses[k].x
        dy = poses[k + 1].y - poses[k].y
        step = math.hypot(dx, dy)
        speeds[k] = step / dt
        moving[k] = step > _EPS_MOTION
        dyaw = wrap_angle(poses[k + 1].yaw - poses[k].yaw)
        if moving[k]:
            effs[k + 1] = dyaw / (speeds[k] * dt)
        else:
            effs[k + 1] = effs[k]

    alpha = params.lag_blend(dt)
    applied = np.empty(n)
    for k in range(n):
        target = effs[k] + (effs[k + 1] - effs[k]) / alpha
        applied[k] = (target - params.lateral_bias) / params.steer_gain

    # Undo the delay: the command issued at step j is applied at step j+d.
    d = params.actuator_delay_steps
    commanded = np.empty(n)
    for j in range(n):
        commanded[j] = applied[j + d] if j + d < n else applied[n - 1]

    actions = []
    for k in range(n):
        accel = (speeds[k + 1] - speeds[k]) / dt if k + 1 < n else 0.0
        curv = commanded[k] if moving[min(k + d, n - 1)] else 0.0
        actions.append(Action(curvature=curv, accel=accel))
    return actions


def reset_actuator(s: VehicleState, a: Action, params: VehicleParams) -> VehicleState:
    """Actuator state as if ``a`` had been commanded steadily: steady-state
    effective curvature and a full delay queue.

    Used at recording/rollout boundaries so the in-flight actuator state is
    reconstructable from recorded data alone (commands are smooth, so the
    snap is physically negligible).
    """
    eff = params.steer_gain * a.curvature + params.lateral_bias
    return replace(
        s,
        effective_curvature=eff,
        pending=(a.curvature,) * params.actuator_delay_steps,
    )


def sample_vehicle_params(rng) -> VehicleParams:
    """Domain randomization draw over documented ranges."""
    return VehicleParams(
        steer_time_constant=float(rng.uniform(0.1, 0.6)),
        steer_gain=float(rng.uniform(0.8, 1.2)),
        lateral_bias=float(rng.uniform(-0.005, 0.005)),
        actuator_delay_steps=int(rng.integers(0, 3)),
        curvature_noise_std=3e-4,
        accel_noise_std=0.02,
    )


def quiet(params: VehicleParams) -> VehicleParams:
    """Same dynamics with process noise removed."""
    return replace(params, curvature_noise_std=0.0, accel_noise_std=0.0)
