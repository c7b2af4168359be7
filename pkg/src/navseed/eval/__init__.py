from .artifacts import emit_csv, emit_svg_curves, log_curves, read_eval_csv
from .compare import ComparisonReport, RunSummary, compare_offline, compare_online, config_hash, final_online_stats
from .metrics import (
    EpisodeRow, EvalMetrics, model_policy, rollout, run_policy, steps_to_convergence, steps_to_threshold, trailing_mean,
)

__all__ = [
    "ComparisonReport", "EpisodeRow", "EvalMetrics", "RunSummary", "compare_offline", "compare_online", "config_hash",
    "emit_csv", "emit_svg_curves", "final_online_stats", "log_curves", "model_policy", "read_eval_csv", "rollout",
    "run_policy", "steps_to_convergence", "steps_to_threshold", "trailing_mean",
]
