from .experiment import (
    TrialFailed,
    TrialRecord,
    build_scene,
    mean_reconstruction_error,
    run_experiment,
    run_planner,
    run_trial,
    trial_seed,
    trial_start,
)
from .report import (
    CSV_HEADER,
    ComparisonReport,
    PairTest,
    PlannerSummary,
    build_report,
    read_csv,
    report_from_csv,
    write_csv,
    write_trace,
)
from .stats import one_tailed_welch_test, standard_error
from .sweep import AXES, SweepPoint, configure_axis, sweep

__all__ = [
    "AXES",
    "CSV_HEADER",
    "ComparisonReport",
    "PairTest",
    "PlannerSummary",
    "SweepPoint",
    "TrialFailed",
    "TrialRecord",
    "build_report",
    "build_scene",
    "configure_axis",
    "mean_reconstruction_error",
    "one_tailed_welch_test",
    "read_csv",
    "report_from_csv",
    "run_experiment",
    "run_planner",
    "run_trial",
    "standard_error",
    "sweep",
    "trial_seed",
    "trial_start",
    "write_csv",
    "write_trace",
]
