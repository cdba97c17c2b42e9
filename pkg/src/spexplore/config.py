"""Run configuration.

One TOML or JSON file with sections ``[scene] [solver] [reward] [mcts] [gss]
[fixed] [experiment]`` plus an optional top-level ``planner`` key. Missing
keys take defaults; unknown keys are rejected. A ``run_manifest.json`` written
by the CLI is also accepted: its ``config`` entry is used.

Precedence, lowest to highest: built-in defaults, config file, CLI flags.
"""

import dataclasses
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .errors import ConfigInvalid, ParseError
from .mdp import RewardParams
from .planners import PLANNERS, MctsParams
from .scene import SceneConfig
from .spectral import SolverOptions

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass(frozen=True)
class GssParams:
    path_budget: float | None = None
    goal: tuple[int, int] | None = None
    waypoint_stride: int = 1


@dataclass(frozen=True)
class FixedParams:
    stride: int = 1
    direction: str = "E"


@dataclass(frozen=True)
class ExperimentParams:
    planners: tuple[str, ...] = ("nmpse", "fixed", "random")
    trials: int = 50
    budget_samples: int | None = 25
    budget_path: float | None = None
    seed: int = 0
    start: tuple[int, int] | None = None
    record_timing: bool = True
    pooled_variance: bool = False
    alpha: float = 0.05
    sweep_axis: str | None = None
    sweep_values: tuple = ()
    jobs: int = 1

    @property
    def budget_mode(self) -> str:
        return "samples" if self.budget_samples is not None else "path_length"

    @property
    def budget(self):
        return self.budget_samples if self.budget_samples is not None else self.budget_path


@dataclass(frozen=True)
class ExperimentConfig:
    scene: SceneConfig = field(default_factory=SceneConfig)
    scene_paths: tuple[str, str] | None = None
    solver: SolverOptions = field(default_factory=SolverOptions)
    reward: RewardParams = field(default_factory=RewardParams)
    mcts: MctsParams = field(default_factory=MctsParams)
    gss: GssParams = field(default_factory=GssParams)
    fixed: FixedParams = field(default_factory=FixedParams)
    experiment: ExperimentParams = field(default_factory=ExperimentParams)
    planner: str = "nmpse"

    def validate(self) -> "ExperimentConfig":
        e = self.experiment
        if e.trials < 1:
            raise ConfigInvalid("experiment.trials must be >= 1")
        if (e.budget_samples is None) == (e.budget_path is None):
            raise ConfigInvalid("set exactly one of experiment.budget_samples and experiment.budget_path")
        if e.budget_samples is not None and e.budget_samples < 1:
            raise ConfigInvalid("experiment.budget_samples must be >= 1")
        if e.budget_path is not None and e.budget_path < 0:
            raise ConfigInvalid("experiment.budget_path must be >= 0")
        if not e.planners:
            raise ConfigInvalid("experiment.planners is empty")
        for name in (*e.planners, self.planner):
            if name not in PLANNERS:
                raise ConfigInvalid(f"unknown planner {name!r}; choose from {', '.join(PLANNERS)}")
        if len(set(e.planners)) != len(e.planners):
            raise ConfigInvalid("experiment.planners lists a planner twice")
        if e.sweep_axis is not None and e.sweep_axis not in ("depth", "samples", "path_length"):
            raise ConfigInvalid("experiment.sweep_axis must be depth, samples or path_length")
        if e.jobs < 1:
            raise ConfigInvalid("experiment.jobs must be >= 1")
        if self.fixed.direction not in ("E", "W", "N", "S"):
            raise ConfigInvalid("fixed.direction must be one of E, W, N, S")
        if self.fixed.stride < 1 or self.gss.waypoint_stride < 1:
            raise ConfigInvalid("fixed.stride and gss.waypoint_stride must be >= 1")
        self.scene.validate()
        return self

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready dict that :func:`config_from_dict` maps back to ``self``."""
        out = {
            "planner": self.planner,
            "scene": self.scene.to_dict(),
            "solver": dataclasses.asdict(self.solver),
            "reward": dataclasses.asdict(self.reward),
            "mcts": dataclasses.asdict(self.mcts),
            "gss": dataclasses.asdict(self.gss),
            "fixed": dataclasses.asdict(self.fixed),
            "experiment": dataclasses.asdict(self.experiment),
        }
        if self.reward.kernel_lengthscale is None:
            out["reward"]["kernel_lengthscale"] = "median"
        if self.scene_paths is not None:
            out["scene"]["orbital_path"], out["scene"]["insitu_path"] = self.scene_paths
        for section in out.values():
            if isinstance(section, dict):
                for k, v in list(section.items()):
                    if isinstance(v, tuple):
                        section[k] = list(v)
                    elif v is None:
                        del section[k]
        if self.experiment.budget_samples is None:
            out["experiment"]["budget_samples"] = None
        return out


def _build(cls, values, section):
    if not isinstance(values, dict):
        raise ConfigInvalid(f"[{section}] must be a table")
    known = {f.name for f in dataclasses.fields(cls)}
    extra = set(values) - known
    if extra:
        raise ConfigInvalid(f"unknown keys in [{section}]: {sorted(extra)}")
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"[{section}]: {exc}") from None


def _cell(value, name):
    if value is None:
        return None
    try:
        r, c = value
        return (int(r), int(c))
    except (TypeError, ValueError):
        raise ConfigInvalid(f"{name} must be a [row, col] pair") from None


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    data = dict(data)
    if "config" in data and "artifact_version" in data:
        data = dict(data["config"])
    known = {"scene", "solver", "reward", "mcts", "gss", "fixed", "experiment", "planner"}
    extra = set(data) - known
    if extra:
        raise ConfigInvalid(f"unknown config sections: {sorted(extra)}")

    scene = dict(data.get("scene", {}))
    paths = None
    if "orbital_path" in scene or "insitu_path" in scene:
        try:
            paths = (str(scene.pop("orbital_path")), str(scene.pop("insitu_path")))
        except KeyError:
            raise ConfigInvalid("[scene] needs both orbital_path and insitu_path") from None
    reward = dict(data.get("reward", {}))
    if reward.get("kernel_lengthscale") == "median":
        reward["kernel_lengthscale"] = None
    gss = dict(data.get("gss", {}))
    gss["goal"] = _cell(gss.get("goal"), "gss.goal")
    exp = dict(data.get("experiment", {}))
    if "start" in exp:
        exp["start"] = _cell(exp["start"], "experiment.start")
    for key in ("planners", "sweep_values"):
        if key in exp:
            exp[key] = tuple(exp[key])
    if "budget_path" in exp and exp["budget_path"] is not None and "budget_samples" not in exp:
        exp["budget_samples"] = None

    cfg = ExperimentConfig(
        scene=SceneConfig.from_mapping(scene),
        scene_paths=paths,
        solver=_build(SolverOptions, data.get("solver", {}), "solver"),
        reward=_build(RewardParams, reward, "reward"),
        mcts=_build(MctsParams, data.get("mcts", {}), "mcts"),
        gss=_build(GssParams, gss, "gss"),
        fixed=_build(FixedParams, data.get("fixed", {}), "fixed"),
        experiment=_build(ExperimentParams, exp, "experiment"),
        planner=str(data.get("planner", "nmpse")),
    )
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    """Read a TOML (``.toml``) or JSON (anything else) config file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read config ({exc.strerror or exc})") from exc
    try:
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(raw.decode())
        else:
            data = json.loads(raw)
    except (ValueError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def with_overrides(cfg: ExperimentConfig, *, seed=None, planner=None, budget=None, depth=None,
                   iterations=None, jobs=None) -> ExperimentConfig:
    """Apply CLI flag overrides on top of a loaded config."""
    exp, mcts = cfg.experiment, cfg.mcts
    if seed is not None:
        exp = replace(exp, seed=int(seed))
    if budget is not None:
        if exp.budget_samples is not None:
            exp = replace(exp, budget_samples=int(budget))
        else:
            exp = replace(exp, budget_path=float(budget))
    if jobs is not None:
        exp = replace(exp, jobs=int(jobs))
    try:
        if depth is not None:
            mcts = replace(mcts, max_depth=int(depth))
        if iterations is not None:
            mcts = replace(mcts, iterations=int(iterations))
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None
    return replace(cfg, experiment=exp, mcts=mcts, planner=planner or cfg.planner).validate()
