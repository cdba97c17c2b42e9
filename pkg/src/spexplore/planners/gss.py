"""Greedy entropy waypoint selection under a travel budget.

Non-adaptive baseline: waypoints are chosen up front from orbital spectra
alone, then the tour is driven and sampled in situ at each waypoint.
"""

import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from ..errors import InfeasibleBudget
from ..mdp import LOG_2PIE, RewardParams, covariance, gaussian_entropy, se_kernel
from ..scene import GridCell, SceneryPair, sample_in_situ
from .base import PlannerOutcome

NAME = "gss"


def waypoint_grid(scene: SceneryPair, stride: int = 1) -> list[GridCell]:
    return [c for c in scene.grid.cells() if c[0] % stride == 0 and c[1] % stride == 0]


@dataclass
class Tour:
    """Open tour from ``stops[0]`` to ``stops[-1]`` grown by cheapest insertion."""

    stops: list[GridCell]
    moves: int

    @classmethod
    def between(cls, start: GridCell, goal: GridCell) -> "Tour":
        return cls([start, goal], _cheb(start, goal))

    def insertion(self, v: GridCell) -> tuple[int, int]:
        """(extra moves, insert position) of the cheapest insertion of ``v``."""
        best, pos = None, 1
        for i in range(len(self.stops) - 1):
            a, b = self.stops[i], self.stops[i + 1]
            extra = _cheb(a, v) + _cheb(v, b) - _cheb(a, b)
            if best is None or extra < best:
                best, pos = extra, i + 1
        return best, pos

    def insert(self, v: GridCell, pos: int, extra: int) -> None:
        self.stops.insert(pos, v)
        self.moves += extra


def _cheb(a, b) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def set_entropy(scene: SceneryPair, cells, params: RewardParams) -> float:
    """Entropy of the orbital spectra at ``cells`` (no revisit penalty)."""
    X = np.array([scene.remote_spectrum(c) for c in cells])
    return gaussian_entropy(covariance(X, params))


def greedy_selection(
    scene: SceneryPair,
    start: GridCell,
    goal: GridCell,
    path_budget: float,
    waypoints=None,
    reward_params: RewardParams | None = None,
):
    """Choose waypoints; returns ``(tour, picks)``.

    ``picks`` lists ``(cell, entropy_of_Q_with_cell)`` per accepted waypoint.
    Each round takes the candidate maximising the entropy of ``Q + v``
    (earliest waypoint on ties) and stops as soon as inserting it into the
    tour would exceed ``path_budget``.
    """
    params = (reward_params or RewardParams()).resolve(scene)
    grid = scene.grid
    start, goal = grid.check(start), grid.check(goal)
    tour = Tour.between(start, goal)
    if tour.moves * grid.step_cost > path_budget + 1e-9:
        raise InfeasibleBudget(
            f"start->goal costs {tour.moves * grid.step_cost:g}, budget is {path_budget:g}"
        )
    W = list(waypoints) if waypoints is not None else waypoint_grid(scene)
    chosen = list(dict.fromkeys([start, goal]))
    in_q = set(chosen)
    cand = [v for v in W if v not in in_q]
    XW = np.array([scene.remote_spectrum(v) for v in cand]) if cand else np.empty((0, scene.bands))
    prior = params.kernel_sigma_f**2 + params.kernel_noise**2
    picks = []
    while cand:
        XQ = np.array([scene.remote_spectrum(c) for c in chosen])
        L = np.linalg.cholesky(covariance(XQ, params))
        Z = solve_triangular(L, se_kernel(XQ, XW, params.kernel_sigma_f, params.kernel_lengthscale), lower=True)
        # ln|S_{Q+v}| = ln|S_Q| + ln(conditional variance of v given Q)
        cond = prior - np.einsum("ij,ij->j", Z, Z)
        k = int(np.argmax(cond))
        v = cand[k]
        extra, pos = tour.insertion(v)
        if (tour.moves + extra) * grid.step_cost > path_budget + 1e-9:
            break
        tour.insert(v, pos, extra)
        h_q = 0.5 * (len(chosen) * LOG_2PIE + 2.0 * float(np.log(np.diag(L)).sum()))
        picks.append((v, h_q + 0.5 * (LOG_2PIE + float(np.log(max(cond[k], 1e-300))))))
        chosen.append(v)
        del cand[k]
        XW = np.delete(XW, k, axis=0)
    return tour, picks


def gss_plan(
    scene: SceneryPair,
    start: GridCell,
    goal: GridCell,
    path_budget: float,
    waypoints=None,
    reward_params: RewardParams | None = None,
    sensor_rng: np.random.Generator | None = None,
) -> PlannerOutcome:
    """Select waypoints greedily, then drive the tour and sample at each stop."""
    sensor_rng = sensor_rng if sensor_rng is not None else np.random.default_rng()
    t0 = time.perf_counter()
    tour, _ = greedy_selection(scene, start, goal, path_budget, waypoints, reward_params)
    elapsed = time.perf_counter() - t0
    stops = list(tour.stops)
    if len(stops) == 2 and stops[0] == stops[1]:
        stops = stops[:1]
    spectra = np.array([sample_in_situ(scene.oracle, c, sensor_rng) for c in stops])
    return PlannerOutcome(NAME, stops, spectra, tour.moves * scene.grid.step_cost, tour.moves, [elapsed])
