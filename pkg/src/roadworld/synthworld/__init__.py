from .road import (
    RoadGeometry,
    RoadSpec,
    constant_curvature_road,
    generate_road,
    straight_road,
)
from .render import SKY_DEPTH, ground_depth_formula, render_frame
from .expert import ExpertObjective, heading_error, scripted_expert
from .dataset import (
    SEGMENT_FRAMES,
    camera_from_manifest,
    generate_dataset,
    load_manifest,
    plan_segment,
)
from .scenarios import LANE_CENTER, LANE_CHANGE, Scenario, make_scenarios
from .env import ClosedLoopEnv, EpisodeTrace, expert_act_fn, nominal_eval_params

__all__ = [
    "RoadGeometry", "RoadSpec", "generate_road", "straight_road", "constant_curvature_road",
    "render_frame", "ground_depth_formula", "SKY_DEPTH",
    "ExpertObjective", "scripted_expert", "heading_error",
    "generate_dataset", "load_manifest", "camera_from_manifest", "plan_segment", "SEGMENT_FRAMES",
    "Scenario", "make_scenarios", "LANE_CENTER", "LANE_CHANGE",
    "ClosedLoopEnv", "EpisodeTrace", "expert_act_fn", "nominal_eval_params",
]
