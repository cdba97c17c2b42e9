from .base import PlannerOutcome
from .baselines import fixed_step_plan, random_plan, serpentine
from .gss import gss_plan, greedy_selection, waypoint_grid
from .mcts import MctsParams, SearchNode, build_tree, mcts_search, rollout, simulate
from .nmpse import nmpse_run

PLANNERS = ("nmpse", "gss", "fixed", "random")

__all__ = [
    "PLANNERS",
    "MctsParams",
    "PlannerOutcome",
    "SearchNode",
    "build_tree",
    "fixed_step_plan",
    "greedy_selection",
    "gss_plan",
    "mcts_search",
    "nmpse_run",
    "random_plan",
    "rollout",
    "serpentine",
    "simulate",
    "waypoint_grid",
]
