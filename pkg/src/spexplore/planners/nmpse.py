"""Receding-horizon MCTS planner.

Each decision builds a fresh tree rooted at the current in-situ history, picks
one move, executes it (takes a real in-situ reading) and discards the tree.
"""

import time

import numpy as np

from ..mdp import ExplorationMDP, RewardParams, make_root
from ..scene import GridCell, SceneryPair, sample_in_situ
from .base import PlannerOutcome
from .mcts import MctsParams, mcts_search

NAME = "nmpse"


def nmpse_run(
    scene: SceneryPair,
    start: GridCell,
    budget: int | None,
    reward_params: RewardParams | None = None,
    mcts_params: MctsParams | None = None,
    rng: np.random.Generator | None = None,
    sensor_rng: np.random.Generator | None = None,
    path_cap: float | None = None,
    on_step=None,
) -> PlannerOutcome:
    """Run the planner until ``budget`` in-situ samples are held.

    The reading at ``start`` counts as the first sample. With ``path_cap``
    the run also stops before a move would push the path cost past the cap;
    ``budget=None`` then means "until the cap". ``on_step(outcome_so_far)``
    is called after every executed move.
    """
    if budget is None and path_cap is None:
        raise ValueError("need a sample budget or a path cap")
    if budget is not None and budget < 1:
        raise ValueError("sample budget must be >= 1")
    rng = rng if rng is not None else np.random.default_rng()
    sensor_rng = sensor_rng if sensor_rng is not None else rng
    params = mcts_params or MctsParams()
    model = ExplorationMDP(scene, reward_params)
    grid = scene.grid
    start = grid.check(start)

    cells = [start]
    spectra = [sample_in_situ(scene.oracle, start, sensor_rng)]
    actions: list[str | None] = [None]
    times: list[float] = []
    moves = 0
    while budget is None or len(cells) < budget:
        if path_cap is not None and (moves + 1) * grid.step_cost > path_cap + 1e-9:
            break
        root = make_root(scene, cells, spectra)
        t0 = time.perf_counter()
        action = mcts_search(root, model, params, rng)
        times.append(time.perf_counter() - t0)
        cell = action.apply(cells[-1])
        cells.append(cell)
        spectra.append(sample_in_situ(scene.oracle, cell, sensor_rng))
        actions.append(action.name)
        moves += 1
        if on_step is not None:
            on_step(cells, spectra)
    return PlannerOutcome(NAME, cells, np.array(spectra), moves * grid.step_cost, moves, times, actions)
