from dataclasses import dataclass, replace

from ..config import ExperimentConfig
from ..errors import ConfigInvalid
from ..scene import SceneryPair
from .experiment import TrialRecord, build_scene, run_experiment
from .report import ComparisonReport, build_report

AXES = ("depth", "samples", "path_length")


@dataclass
class SweepPoint:
    axis: str
    value: float
    config: ExperimentConfig
    records: list[TrialRecord]
    report: ComparisonReport


def configure_axis(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    """``cfg`` with one sweep axis set to ``value``; everything else untouched."""
    try:
        if axis == "depth":
            return replace(cfg, mcts=replace(cfg.mcts, max_depth=int(value))).validate()
        if axis == "samples":
            exp = replace(cfg.experiment, budget_samples=int(value), budget_path=None)
            return replace(cfg, experiment=exp).validate()
        if axis == "path_length":
            exp = replace(cfg.experiment, budget_samples=None, budget_path=float(value))
            return replace(cfg, experiment=exp).validate()
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad {axis} value {value!r}: {exc}") from None
    raise ConfigInvalid(f"unknown sweep axis {axis!r}; choose from {', '.join(AXES)}")


def sweep(cfg: ExperimentConfig, axis: str, values, scene: SceneryPair | None = None, jobs=None) -> list[SweepPoint]:
    """Re-run the experiment once per axis value on the same scene."""
    if axis not in AXES:
        raise ConfigInvalid(f"unknown sweep axis {axis!r}; choose from {', '.join(AXES)}")
    if not values:
        raise ConfigInvalid("sweep needs at least one value")
    scene = scene if scene is not None else build_scene(cfg)
    points = []
    for value in values:
        sub = configure_axis(cfg, axis, value)
        records = run_experiment(sub, scene, jobs)
        e = sub.experiment
        points.append(SweepPoint(axis, value, sub, records, build_report(records, "nmpse", e.alpha, e.pooled_variance)))
    return points
