"""Uninformed baselines: fixed-direction sweep and random walk."""

import time

import numpy as np

from ..errors import NoValidActions
from ..mdp import ACTIONS, Action
from ..scene import GridCell, GridMap, SceneryPair, sample_in_situ
from .base import PlannerOutcome

_HEADINGS = {"E": (0, 1), "W": (0, -1), "S": (1, 0), "N": (-1, 0)}
_MOVE_NAMES = {a.delta: a.name for a in ACTIONS}


def serpentine(grid: GridMap, start: GridCell, direction: str = "E"):
    """Endless boustrophedon walk from ``start``.

    Moves along ``direction`` until the boundary, then shifts one cell
    sideways (south for E/W sweeps, east for N/S) and reverses. At the far
    side the sideways direction flips, so the sweep folds back.
    """
    if direction not in _HEADINGS:
        raise ValueError(f"direction must be one of {sorted(_HEADINGS)}")
    main = _HEADINGS[direction]
    side = (1, 0) if main[0] == 0 else (0, 1)
    cell = grid.check(start)
    while True:
        nxt = (cell[0] + main[0], cell[1] + main[1])
        if not grid.in_bounds(nxt):
            nxt = (cell[0] + side[0], cell[1] + side[1])
            if not grid.in_bounds(nxt):
                side = (-side[0], -side[1])
                nxt = (cell[0] + side[0], cell[1] + side[1])
            if grid.in_bounds(nxt):
                main = (-main[0], -main[1])
            else:
                # one cell wide across the sweep: bounce back along it
                main = (-main[0], -main[1])
                nxt = (cell[0] + main[0], cell[1] + main[1])
                if not grid.in_bounds(nxt):
                    raise NoValidActions("1x1 grid has no moves")
        cell = nxt
        yield cell


def fixed_step_plan(
    scene: SceneryPair,
    start: GridCell,
    budget: int | None,
    stride: int = 1,
    direction: str = "E",
    sensor_rng: np.random.Generator | None = None,
    path_cap: float | None = None,
) -> PlannerOutcome:
    """Sweep in one direction, sampling every ``stride`` moves."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if budget is None and path_cap is None:
        raise ValueError("need a sample budget or a path cap")
    sensor_rng = sensor_rng if sensor_rng is not None else np.random.default_rng()
    grid = scene.grid
    start = grid.check(start)
    cells, actions, times = [start], [None], []
    walk = serpentine(grid, start, direction)
    moves, prev = 0, start
    while budget is None or len(cells) < budget:
        if path_cap is not None and (moves + stride) * grid.step_cost > path_cap + 1e-9:
            break
        t0 = time.perf_counter()
        for _ in range(stride):
            last, prev = prev, next(walk)
            moves += 1
        times.append(time.perf_counter() - t0)
        cells.append(prev)
        actions.append(_MOVE_NAMES[(prev[0] - last[0], prev[1] - last[1])] if stride == 1 else None)
    spectra = np.array([sample_in_situ(scene.oracle, c, sensor_rng) for c in cells])
    return PlannerOutcome("fixed", cells, spectra, moves * grid.step_cost, moves, times, actions)


def random_plan(
    scene: SceneryPair,
    start: GridCell,
    budget: int | None,
    rng: np.random.Generator,
    sensor_rng: np.random.Generator | None = None,
    path_cap: float | None = None,
) -> PlannerOutcome:
    """Uniform random walk over the eight neighbours, sampling every step."""
    if budget is None and path_cap is None:
        raise ValueError("need a sample budget or a path cap")
    sensor_rng = sensor_rng if sensor_rng is not None else rng
    grid = scene.grid
    cell = grid.check(start)
    cells, actions, times = [cell], [None], []
    spectra = [sample_in_situ(scene.oracle, cell, sensor_rng)]
    while budget is None or len(cells) < budget:
        if path_cap is not None and len(cells) * grid.step_cost > path_cap + 1e-9:
            break
        t0 = time.perf_counter()
        options = [a for a in ACTIONS if grid.in_bounds(a.apply(cell))]
        if not options:
            raise NoValidActions(f"no moves from {cell}")
        a: Action = options[int(rng.integers(len(options)))]
        times.append(time.perf_counter() - t0)
        cell = a.apply(cell)
        cells.append(cell)
        actions.append(a.name)
        spectra.append(sample_in_situ(scene.oracle, cell, sensor_rng))
    moves = len(cells) - 1
    return PlannerOutcome("random", cells, np.array(spectra), moves * grid.step_cost, moves, times, actions)
