"""Command-line entry point: ``spexplore generate | plan | evaluate``.

Exit codes: 0 success, 1 internal error, 2 bad input or config.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import ExperimentConfig, load_config, with_overrides
from .errors import BadInput, ExplorationError
from .evaluation import (
    build_report,
    build_scene,
    run_experiment,
    run_planner,
    sweep,
    trial_seed,
    trial_start,
    write_csv,
    write_trace,
)
from .evaluation.experiment import TrialFailed
from .scene import generate_synthetic_scene, save_scene
from .spectral import scene_reconstruction_error

log = logging.getLogger("spexplore")


def _write_manifest(out: Path, command: str, cfg: ExperimentConfig) -> Path:
    manifest = {
        "artifact_version": __version__,
        "command": command,
        "seed": cfg.experiment.seed,
        "config": cfg.to_dict(),
    }
    path = out / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig().validate()
    return with_overrides(
        cfg,
        seed=getattr(args, "seed", None) if args.command != "generate" else None,
        planner=getattr(args, "planner", None),
        budget=getattr(args, "budget", None),
        depth=getattr(args, "depth", None),
        iterations=getattr(args, "iterations", None),
        jobs=getattr(args, "jobs", None),
    )


def cmd_generate(args) -> int:
    cfg = _load(args)
    scene_cfg = cfg.scene if args.seed is None else replace(cfg.scene, seed=int(args.seed))
    scene_cfg.validate()
    cfg = replace(cfg, scene=scene_cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scene = generate_synthetic_scene(scene_cfg)
    paths = save_scene(scene, out, scene_cfg, fmt=args.format)
    _write_manifest(out, "generate", cfg)
    for p in paths.values():
        print(p)
    return 0


def cmd_plan(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scene = build_scene(cfg)
    seed = trial_seed(cfg, 0)
    start = trial_start(cfg, scene, seed)
    log.info("planner %s from %s", cfg.planner, start)
    outcome = run_planner(cfg.planner, cfg, scene, start, seed)
    err = scene_reconstruction_error(outcome.library(), scene.orbital, cfg.solver)
    (out / "trace.json").write_text(json.dumps(outcome.trace(), indent=1) + "\n")
    _write_manifest(out, "plan", cfg)
    print(
        f"planner={cfg.planner} samples={outcome.n_samples} final_error={err!r} "
        f"path_cost={outcome.path_cost!r} mean_action_time_s={outcome.mean_action_time:.6f}"
    )
    return 0


def _emit(records, directory: Path, cfg: ExperimentConfig):
    directory.mkdir(parents=True, exist_ok=True)
    e = cfg.experiment
    write_csv(records, directory / "trials.csv", record_timing=e.record_timing)
    if not e.record_timing:
        # the report must be re-derivable from the CSV alone
        records = [replace(r, mean_action_time_s=None) for r in records]
    report = build_report(records, "nmpse", e.alpha, e.pooled_variance)
    report.write(directory / "report.json")
    traces = directory / "traces"
    traces.mkdir(exist_ok=True)
    for r in records:
        write_trace(r, traces / f"trial_{r.trial:03d}_{r.planner}.json")
    return report


def _parse_sweep(text):
    axis, _, values = text.partition("=")
    if not values:
        raise BadInput(f"--sweep expects AXIS=V1,V2,..., got {text!r}")
    try:
        return axis.strip(), tuple(float(v) if "." in v else int(v) for v in values.split(","))
    except ValueError:
        raise BadInput(f"--sweep values must be numbers, got {values!r}") from None


def cmd_evaluate(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    axis, values = cfg.experiment.sweep_axis, cfg.experiment.sweep_values
    if args.sweep:
        axis, values = _parse_sweep(args.sweep)
        cfg = replace(cfg, experiment=replace(cfg.experiment, sweep_axis=axis, sweep_values=values)).validate()
    _write_manifest(out, "evaluate", cfg)
    scene = build_scene(cfg)
    if axis:
        summary = []
        for point in sweep(cfg, axis, values, scene):
            name = f"{axis}_{point.value}"
            report = _emit(point.records, out / name, point.config)
            summary.append({"axis": axis, "value": point.value, "dir": name, "report": report.to_dict()})
            _print_report(f"{axis}={point.value}", report)
        (out / "sweep.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    else:
        records = run_experiment(cfg, scene)
        _print_report("experiment", _emit(records, out, cfg))
    return 0


def _print_report(label, report):
    for name, s in report.planners.items():
        t = "NA" if s.mean_action_time_s is None else f"{s.mean_action_time_s:.4f}s"
        print(f"{label} {name}: MRE={s.mre:.4f} SE={s.se:.4f} n={s.n} action_time={t}")
    for pair, test in report.comparisons.items():
        p = "NA" if test.p is None else f"{test.p:.3g}"
        print(f"{label} {pair}: p={p} significant={test.significant}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spexplore", description="Spatio-spectral exploration planning.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML/JSON config or run_manifest.json")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="override the seed")
        p.add_argument("-v", "--verbose", action="count", default=0)

    g = sub.add_parser("generate", help="write a synthetic scene")
    common(g)
    g.add_argument("--format", choices=("sser", "csv"), default="sser")

    for name, helptext in (("plan", "run one planner once"), ("evaluate", "run trials or a sweep")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--planner", choices=("nmpse", "gss", "fixed", "random"))
        p.add_argument("--budget", type=float, help="sample budget (or path length in path mode)")
        p.add_argument("--depth", type=int, help="MCTS max depth")
        p.add_argument("--iterations", type=int, help="MCTS iterations per decision")
        p.add_argument("--jobs", type=int, help="parallel trial workers")
        if name == "evaluate":
            p.add_argument("--sweep", help="AXIS=V1,V2,... with AXIS in depth, samples, path_length")
    return parser


COMMANDS = {"generate": cmd_generate, "plan": cmd_plan, "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except TrialFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc.__cause__, BadInput) else 1
    except BadInput as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ExplorationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort structured message
        log.debug("internal error", exc_info=True)
        print(f"error: internal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
