"""Result files: trial CSV, per-trial path traces and comparison reports.

Floats are written with ``repr`` so a CSV read back reproduces the in-process
values exactly and :func:`report_from_csv` equals :func:`build_report`.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DegenerateSample, ParseError
from .experiment import TrialRecord
from .stats import one_tailed_welch_test, standard_error

CSV_HEADER = ["trial", "seed", "planner", "budget", "final_error", "path_cost", "mean_action_time_s"]
MISSING = "NA"


def _fmt(v) -> str:
    if v is None:
        return MISSING
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def write_csv(records, path, record_timing: bool = True) -> Path:
    """One row per (trial, planner). Without timing the time column is ``NA``."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            t = r.mean_action_time_s if record_timing else None
            w.writerow([r.trial, r.seed, r.planner, _fmt(r.budget), _fmt(float(r.final_error)),
                        _fmt(float(r.path_cost)), _fmt(t)])
    return path


def _num(s: str):
    if s == MISSING:
        return None
    v = float(s)
    return int(v) if v.is_integer() and "." not in s and "e" not in s.lower() else v


def read_csv(path) -> list[TrialRecord]:
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror or exc})") from exc
    with fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_HEADER:
        raise ParseError(f"{path}: header must be {','.join(CSV_HEADER)}")
    out = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(CSV_HEADER):
            raise ParseError(f"{path}: line {i} has {len(row)} fields")
        try:
            out.append(TrialRecord(
                trial=int(row[0]), seed=int(row[1]), planner=row[2], budget=_num(row[3]),
                final_error=float(row[4]), path_cost=float(row[5]), mean_action_time_s=_num(row[6]),
            ))
        except ValueError as exc:
            raise ParseError(f"{path}: line {i}: {exc}") from None
    return out


def write_trace(record, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(record.trace(), indent=1) + "\n")
    return path


@dataclass
class PlannerSummary:
    mre: float
    se: float
    n: int
    mean_action_time_s: float | None


@dataclass
class PairTest:
    t: float | None
    p: float | None
    significant: bool
    note: str = ""


@dataclass
class ComparisonReport:
    reference: str | None
    alpha: float
    planners: dict[str, PlannerSummary] = field(default_factory=dict)
    comparisons: dict[str, PairTest] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        for v in d["comparisons"].values():
            if not v["note"]:
                del v["note"]
            for k in ("t", "p"):
                if v[k] is not None and not math.isfinite(v[k]):
                    v[k] = "inf" if v[k] > 0 else "-inf"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path

    def mre(self, planner: str) -> float:
        return self.planners[planner].mre


def build_report(records, reference: str | None = "nmpse", alpha: float = 0.05, pooled: bool = False) -> ComparisonReport:
    """Per-planner MRE and one-tailed tests of ``reference`` against each other planner."""
    by_planner: dict[str, list] = {}
    for r in records:
        by_planner.setdefault(r.planner, []).append(r)
    if reference not in by_planner:
        reference = None
    report = ComparisonReport(reference, alpha)
    for name, recs in by_planner.items():
        errs = [r.final_error for r in recs]
        times = [r.mean_action_time_s for r in recs if r.mean_action_time_s is not None]
        report.planners[name] = PlannerSummary(
            mre=float(np.mean(errs)),
            se=standard_error(errs),
            n=len(errs),
            mean_action_time_s=float(np.mean(times)) if times and len(times) == len(recs) else None,
        )
    if reference is not None:
        ref = [r.final_error for r in by_planner[reference]]
        for name, recs in by_planner.items():
            if name == reference:
                continue
            try:
                t, p = one_tailed_welch_test(ref, [r.final_error for r in recs], pooled=pooled)
                report.comparisons[f"{reference}_vs_{name}"] = PairTest(t, p, bool(p < alpha))
            except DegenerateSample as exc:
                report.comparisons[f"{reference}_vs_{name}"] = PairTest(None, None, False, str(exc))
    return report


def report_from_csv(path, reference="nmpse", alpha=0.05, pooled=False) -> ComparisonReport:
    return build_report(read_csv(path), reference, alpha, pooled)
