"""Exploration MDP on the eight-connected grid.

A state holds the in-situ spectra collected so far (fixed within one search
tree) plus the cells the search has tentatively added, each represented by
its orbital spectrum. Actions move the tentative rover position to one of the
eight neighbours; the reward of a state is the Gaussian differential entropy
of a squared-exponential Gram matrix over all of its spectra, minus a penalty
per repeated cell.
"""

import math
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np
from scipy.spatial.distance import pdist

from .errors import EmptyHistory, InvalidAction, SingularCovariance
from .scene import GridCell, SceneryPair
from .spectral import IN_SITU, REMOTE, SpectralLibrary

LOG_2PIE = math.log(2.0 * math.pi * math.e)


class Action(IntEnum):
    """Compass moves; the integer value is the tie-break order."""

    N = 0
    NE = 1
    E = 2
    SE = 3
    S = 4
    SW = 5
    W = 6
    NW = 7

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self]

    @property
    def reverse(self) -> "Action":
        return Action((self + 4) % 8)

    def apply(self, cell: GridCell) -> GridCell:
        dr, dc = _DELTAS[self]
        return (cell[0] + dr, cell[1] + dc)


# (d_row, d_col); rows grow southwards
_DELTAS = {
    Action.N: (-1, 0),
    Action.NE: (-1, 1),
    Action.E: (0, 1),
    Action.SE: (1, 1),
    Action.S: (1, 0),
    Action.SW: (1, -1),
    Action.W: (0, -1),
    Action.NW: (-1, -1),
}
ACTIONS = tuple(Action)


@dataclass(frozen=True)
class RewardParams:
    """Kernel hyperparameters and revisit penalty weight ``tau``.

    ``kernel_lengthscale=None`` means "median pairwise distance between the
    scene's orbital spectra", filled in by :meth:`resolve`.
    """

    kernel_sigma_f: float = 1.0
    kernel_lengthscale: float | None = None
    kernel_noise: float = 0.1
    tau: float = 1.0

    def __post_init__(self):
        if not (self.kernel_sigma_f > 0 and self.kernel_noise > 0 and self.tau >= 0):
            raise ValueError("kernel_sigma_f and kernel_noise must be > 0, tau >= 0")
        if self.kernel_lengthscale is not None and not self.kernel_lengthscale > 0:
            raise ValueError("kernel_lengthscale must be > 0")

    def resolve(self, scene: SceneryPair) -> "RewardParams":
        if self.kernel_lengthscale is not None:
            return self
        return replace(self, kernel_lengthscale=median_spectral_distance(scene))


_MEDIAN_CACHE: dict[int, tuple[SceneryPair, float]] = {}


def median_spectral_distance(scene: SceneryPair, max_pixels: int = 4096) -> float:
    """Median pairwise Euclidean distance between orbital pixel spectra."""
    hit = _MEDIAN_CACHE.get(id(scene))
    if hit is not None and hit[0] is scene:
        return hit[1]
    px = scene.orbital.pixels()
    if px.shape[0] > max_pixels:
        px = px[:: -(-px.shape[0] // max_pixels)]
    value = float(np.median(pdist(px))) if px.shape[0] > 1 else 1.0
    if not value > 0:
        value = 1.0
    _MEDIAN_CACHE.clear()
    _MEDIAN_CACHE[id(scene)] = (scene, value)
    return value


def se_kernel(A, B, sigma_f: float, lengthscale: float) -> np.ndarray:
    """Squared-exponential kernel between the rows of ``A`` and ``B``."""
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    np.maximum(sq, 0.0, out=sq)
    return sigma_f**2 * np.exp(-sq / (2.0 * lengthscale**2))


def covariance(spectra, params: RewardParams) -> np.ndarray:
    """Gram matrix over ``spectra`` (rows) with noise on the diagonal."""
    S = np.atleast_2d(np.asarray(spectra, dtype=np.float64))
    K = se_kernel(S, S, params.kernel_sigma_f, params.kernel_lengthscale)
    K[np.diag_indices_from(K)] = params.kernel_sigma_f**2 + params.kernel_noise**2
    return K


def logdet_spd(cov) -> float:
    """log|cov| from a Cholesky factor, retrying with growing diagonal jitter."""
    cov = np.asarray(cov, dtype=np.float64)
    scale = float(np.mean(np.diag(cov))) if cov.size else 1.0
    jitter = 0.0
    for _ in range(6):
        try:
            L = np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]) if jitter else cov)
            return 2.0 * float(np.log(np.diag(L)).sum())
        except np.linalg.LinAlgError:
            jitter = scale * 1e-10 if jitter == 0.0 else jitter * 100.0
    raise SingularCovariance("covariance is not positive definite even with jitter")


def gaussian_entropy(cov) -> float:
    """Differential entropy 0.5 * ln|2 pi e cov| of a Gaussian."""
    cov = np.atleast_2d(cov)
    return 0.5 * (cov.shape[0] * LOG_2PIE + logdet_spd(cov))


def revisit_count(cells) -> int:
    """Entries whose cell already appeared earlier in the sequence."""
    cells = list(cells)
    return len(cells) - len(set(cells))


@dataclass(frozen=True, eq=False)
class ExplorationState:
    """MDP state ``(Y, V, X_D, D, X)``.

    ``in_situ`` rows pair with ``visited`` and ``planned_remote`` rows pair with
    ``planned_cells``. The rover sits at the last planned cell, or the last
    visited one when nothing is planned yet.
    """

    in_situ: np.ndarray
    visited: tuple[GridCell, ...]
    planned_remote: np.ndarray
    planned_cells: tuple[GridCell, ...]
    scene: SceneryPair

    @property
    def rover_cell(self) -> GridCell:
        return self.planned_cells[-1] if self.planned_cells else self.visited[-1]

    @property
    def spectra(self) -> np.ndarray:
        """``S``: in-situ spectra followed by planned orbital spectra."""
        if not len(self.planned_cells):
            return self.in_situ
        return np.vstack([self.in_situ, self.planned_remote])

    @property
    def cells(self) -> tuple[GridCell, ...]:
        return self.visited + self.planned_cells

    def library(self) -> SpectralLibrary:
        prov = (IN_SITU,) * len(self.visited) + (REMOTE,) * len(self.planned_cells)
        return SpectralLibrary(self.spectra, prov)

    def same_as(self, other: "ExplorationState") -> bool:
        return (
            self.visited == other.visited
            and self.planned_cells == other.planned_cells
            and np.array_equal(self.in_situ, other.in_situ)
            and np.array_equal(self.planned_remote, other.planned_remote)
            and self.scene is other.scene
        )


def make_root(scene: SceneryPair, visited, in_situ) -> ExplorationState:
    """Root of the MDP at the current time step: nothing planned yet."""
    visited = tuple((int(r), int(c)) for r, c in visited)
    Y = np.asarray(in_situ, dtype=np.float64)
    if Y.ndim == 1 and Y.size:
        Y = Y[None, :]
    if not visited or Y.shape[0] == 0:
        raise EmptyHistory("the root needs at least one in-situ sample")
    if Y.shape[0] != len(visited):
        raise EmptyHistory(f"{Y.shape[0]} in-situ spectra for {len(visited)} visited cells")
    for cell in visited:
        scene.grid.check(cell)
    Y = Y.copy()
    Y.flags.writeable = False
    empty = np.empty((0, Y.shape[1]))
    empty.flags.writeable = False
    return ExplorationState(Y, visited, empty, (), scene)


def valid_actions(state: ExplorationState) -> tuple[Action, ...]:
    grid = state.scene.grid
    here = state.rover_cell
    return tuple(a for a in ACTIONS if grid.in_bounds(a.apply(here)))


def reward(state: ExplorationState, params: RewardParams) -> float:
    """Entropy of ``S`` minus ``tau`` times the revisit count of ``V + D``."""
    params = params.resolve(state.scene)
    h = gaussian_entropy(covariance(state.spectra, params))
    return h - params.tau * revisit_count(state.cells)


def successor(state: ExplorationState, action: Action) -> ExplorationState:
    target = Action(action).apply(state.rover_cell)
    if not state.scene.grid.in_bounds(target):
        raise InvalidAction(f"{Action(action).name} from {state.rover_cell} leaves the grid")
    x_new = state.scene.remote_spectrum(target)
    planned = np.vstack([state.planned_remote, x_new[None, :]])
    planned.flags.writeable = False
    return ExplorationState(state.in_situ, state.visited, planned, state.planned_cells + (target,), state.scene)


def step(state: ExplorationState, action: Action, params: RewardParams | None = None):
    """Deterministic transition; returns ``(next_state, reward(next_state))``."""
    nxt = successor(state, action)
    return nxt, reward(nxt, params or RewardParams())


class ExplorationMDP:
    """The MDP bound to one scene and reward setting, as used by the search.

    Rewards are computed through a cache of in-situ kernel blocks keyed on the
    (shared, read-only) in-situ array of the current tree; results equal
    :func:`reward` from scratch.
    """

    def __init__(self, scene: SceneryPair, params: RewardParams | None = None):
        self.scene = scene
        self.params = (params or RewardParams()).resolve(scene)
        self._block_key = None
        self._block = None
        self._cross = {}

    def actions(self, state: ExplorationState):
        return valid_actions(state)

    @staticmethod
    def reverse(action: Action) -> Action:
        return Action(action).reverse

    def _in_situ_block(self, Y):
        if self._block_key is not Y:
            self._block_key = Y
            self._block = covariance(Y, self.params)
            self._cross = {}
        return self._block

    def _cross_column(self, Y, cell):
        col = self._cross.get(cell)
        if col is None:
            x = self.scene.remote_spectrum(cell)
            col = se_kernel(Y, x[None, :], self.params.kernel_sigma_f, self.params.kernel_lengthscale)[:, 0]
            self._cross[cell] = col
        return col

    def reward(self, state: ExplorationState) -> float:
        p = self.params
        Y = state.in_situ
        KYY = self._in_situ_block(Y)
        m = len(state.planned_cells)
        if m == 0:
            cov = KYY
        else:
            n = KYY.shape[0]
            cov = np.empty((n + m, n + m))
            cov[:n, :n] = KYY
            cross = np.stack([self._cross_column(Y, c) for c in state.planned_cells], axis=1)
            cov[:n, n:] = cross
            cov[n:, :n] = cross.T
            cov[n:, n:] = covariance(state.planned_remote, p)
        h = 0.5 * (cov.shape[0] * LOG_2PIE + logdet_spd(cov))
        return h - p.tau * revisit_count(state.cells)

    def step(self, state: ExplorationState, action: Action):
        nxt = successor(state, action)
        return nxt, self.reward(nxt)
