"""Closed-loop test scenarios: a lane-centering grid (24) and a lane-change
grid (20) over curvature / offset / speed combinations."""

from __future__ import annotations

from dataclasses import dataclass

LANE_CENTER = "lane_center"
LANE_CHANGE = "lane_change"


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str  # LANE_CENTER or LANE_CHANGE
    road_curvature: float  # 1/m, constant along the scenario road
    initial_offset: float  # m from the start lane center
    initial_heading_error: float  # rad
    speed: float  # m/s, held by the cruise controller
    start_lane: int
    change_direction: int = 0  # +1 = left, -1 = right, 0 = keep lane
    duration: float = 12.0  # s
    impulse_time: float = 2.0  # s; impulse channel active the 1 s before
    lane_count: int = 2
    lane_width: float = 3.5

    def __post_init__(self):
        if self.duration < 10.0:
            raise ValueError("scenario duration must be >= 10 s")
        if abs(self.initial_offset) > self.lane_count * self.lane_width / 2:
            raise ValueError("initial offset outside the road")

    @property
    def target_lane(self) -> int:
        return self.start_lane + self.change_direction


def make_scenarios() -> list[Scenario]:
    """24 lane-center + 20 lane-change scenarios."""
    scenarios = []
    for offset in (-0.5, -0.2, 0.2, 0.5):
        for curv in (0.0, 0.003, -0.003):
            for speed in (15.0, 25.0):
                scenarios.append(Scenario(
                    name=f"center_off{offset:+.1f}_k{curv:+.3f}_v{speed:.0f}",
                    kind=LANE_CENTER,
                    road_curvature=curv,
                    initial_offset=offset,
                    initial_heading_error=0.0,
                    speed=speed,
                    start_lane=0,
                ))
    for direction, dname in ((1, "L"), (-1, "R")):
        for offset in (-0.4, -0.2, 0.0, 0.2, 0.4):
            for curv in (0.0, 0.003):
                scenarios.append(Scenario(
                    name=f"change_{dname}_off{offset:+.1f}_k{curv:+.3f}",
                    kind=LANE_CHANGE,
                    road_curvature=curv,
                    initial_offset=offset,
                    initial_heading_error=0.0,
                    speed=20.0,
                    start_lane=0 if direction > 0 else 1,
                    change_direction=direction,
                    duration=16.0,  # maneuver plus settling room
                ))
    return scenarios
