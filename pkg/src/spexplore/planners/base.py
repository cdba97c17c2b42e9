from dataclasses import dataclass, field

import numpy as np

from ..scene import GridCell
from ..spectral import SpectralLibrary


@dataclass
class PlannerOutcome:
    """What a planner did: where it sampled, what it measured, what it cost.

    ``actions[i]`` is the move name that led to ``cells[i]`` (``None`` for the
    start cell and for waypoint-based plans).
    """

    planner: str
    cells: list[GridCell]
    spectra: np.ndarray
    path_cost: float
    moves: int
    action_times: list[float] = field(default_factory=list)
    actions: list[str | None] = field(default_factory=list)

    def __post_init__(self):
        if len(self.cells) != len(self.spectra):
            raise ValueError("one spectrum per sampled cell")
        if not self.actions:
            self.actions = [None] * len(self.cells)

    @property
    def n_samples(self) -> int:
        return len(self.cells)

    def library(self, upto: int | None = None) -> SpectralLibrary:
        return SpectralLibrary(self.spectra[:upto])

    @property
    def mean_action_time(self) -> float:
        return float(np.mean(self.action_times)) if self.action_times else 0.0

    def trace(self) -> list[dict]:
        """Path trace rows: ``{step, cell_row, cell_col, action}``."""
        return [
            {"step": i, "cell_row": int(r), "cell_col": int(c), "action": a}
            for i, ((r, c), a) in enumerate(zip(self.cells, self.actions))
        ]
