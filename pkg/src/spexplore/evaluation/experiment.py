"""Trial orchestration.

Every trial derives its own seed from the experiment seed, draws one start
cell shared by all planners, and gives each planner independent planning and
sensor streams keyed by planner name. The search-based planner runs first so
the greedy waypoint planner can receive its end cell and realised path cost.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..config import ExperimentConfig
from ..errors import ConfigInvalid, ExplorationError
from ..planners import PlannerOutcome, fixed_step_plan, gss_plan, nmpse_run, random_plan, waypoint_grid
from ..scene import SceneryPair, generate_synthetic_scene, load_scene
from ..spectral import scene_reconstruction_error
from ..streams import STREAM_KEYS, derive_seed, make_rng, planner_streams


class TrialFailed(ExplorationError):
    def __init__(self, trial: int, planner: str, cause: Exception):
        super().__init__(f"trial {trial} ({planner}) failed: {cause}")
        self.trial = trial
        self.planner = planner


@dataclass
class TrialRecord:
    trial: int
    seed: int
    planner: str
    budget: float
    final_error: float
    path_cost: float
    # wall-clock, so left out of equality
    mean_action_time_s: float | None = field(compare=False)
    cells: list = field(default_factory=list, compare=False)
    actions: list = field(default_factory=list, compare=False)
    action_times: list = field(default_factory=list, compare=False)

    def trace(self) -> list[dict]:
        return [
            {"step": i, "cell_row": int(r), "cell_col": int(c), "action": a}
            for i, ((r, c), a) in enumerate(zip(self.cells, self.actions))
        ]


def build_scene(cfg: ExperimentConfig) -> SceneryPair:
    if cfg.scene_paths is not None:
        return load_scene(*cfg.scene_paths, cfg.scene)
    return generate_synthetic_scene(cfg.scene)


def trial_seed(cfg: ExperimentConfig, trial: int) -> int:
    return derive_seed(cfg.experiment.seed, trial)


def trial_start(cfg: ExperimentConfig, scene: SceneryPair, seed: int):
    if cfg.experiment.start is not None:
        return scene.grid.check(cfg.experiment.start)
    rng = make_rng(seed, STREAM_KEYS["start"])
    return (int(rng.integers(scene.grid.rows)), int(rng.integers(scene.grid.cols)))


def run_planner(name: str, cfg: ExperimentConfig, scene: SceneryPair, start, seed: int, nmpse_out=None) -> PlannerOutcome:
    """Run one planner from ``start`` under the configured budget."""
    e = cfg.experiment
    plan_rng, sensor_rng = planner_streams(seed, name)
    samples = e.budget_samples
    cap = e.budget_path
    if name == "nmpse":
        return nmpse_run(scene, start, samples, cfg.reward, cfg.mcts, plan_rng, sensor_rng, path_cap=cap)
    if name == "fixed":
        return fixed_step_plan(scene, start, samples, cfg.fixed.stride, cfg.fixed.direction, sensor_rng, path_cap=cap)
    if name == "random":
        return random_plan(scene, start, samples, plan_rng, sensor_rng, path_cap=cap)
    if name == "gss":
        if nmpse_out is not None:
            goal, budget = nmpse_out.cells[-1], nmpse_out.path_cost
        else:
            goal = cfg.gss.goal
            budget = cfg.gss.path_budget if cfg.gss.path_budget is not None else cap
            if goal is None or budget is None:
                raise ConfigInvalid("gss without nmpse needs gss.goal and a path budget")
        waypoints = waypoint_grid(scene, cfg.gss.waypoint_stride)
        return gss_plan(scene, start, goal, budget, waypoints, cfg.reward, sensor_rng)
    raise ConfigInvalid(f"unknown planner {name!r}")


def run_trial(cfg: ExperimentConfig, scene: SceneryPair, trial: int) -> list[TrialRecord]:
    seed = trial_seed(cfg, trial)
    start = trial_start(cfg, scene, seed)
    names = list(cfg.experiment.planners)
    order = sorted(names, key=lambda n: n != "nmpse")
    outcomes: dict[str, PlannerOutcome] = {}
    for name in order:
        try:
            outcomes[name] = run_planner(name, cfg, scene, start, seed, outcomes.get("nmpse"))
        except ExplorationError as exc:
            raise TrialFailed(trial, name, exc) from exc
    records = []
    for name in names:
        out = outcomes[name]
        try:
            err = scene_reconstruction_error(out.library(), scene.orbital, cfg.solver)
        except ExplorationError as exc:
            raise TrialFailed(trial, name, exc) from exc
        records.append(TrialRecord(
            trial=trial,
            seed=seed,
            planner=name,
            budget=cfg.experiment.budget,
            final_error=err,
            path_cost=out.path_cost,
            mean_action_time_s=out.mean_action_time,
            cells=list(out.cells),
            actions=list(out.actions),
            action_times=list(out.action_times),
        ))
    return records


def _trial_worker(args):
    cfg, scene, trial = args
    return run_trial(cfg, scene, trial)


def run_experiment(cfg: ExperimentConfig, scene: SceneryPair | None = None, jobs: int | None = None) -> list[TrialRecord]:
    """All trials for all configured planners, ordered by (trial, planner order)."""
    cfg.validate()
    scene = scene if scene is not None else build_scene(cfg)
    jobs = jobs or cfg.experiment.jobs
    trials = range(cfg.experiment.trials)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_trial_worker, [(cfg, scene, t) for t in trials]))
    else:
        chunks = [run_trial(cfg, scene, t) for t in trials]
    return [rec for chunk in chunks for rec in chunk]


def mean_reconstruction_error(records, planner: str) -> float:
    errs = [r.final_error for r in records if r.planner == planner]
    if not errs:
        raise ValueError(f"no records for planner {planner!r}")
    return float(np.mean(errs))
