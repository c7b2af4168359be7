"""CSV and SVG emitters for logs, evaluation metrics and comparison reports."""

from __future__ import annotations

import csv
import math
import os
from xml.sax.saxutils import escape

import numpy as np

from ..drl.train import TrainLog
from .compare import ComparisonReport
from .metrics import EvalMetrics, metric_series, trailing_mean

EVAL_COLUMNS = ["episode", "outcome", "reward", "steps"]
REPORT_COLUMNS = ["label", "seed", "config_hash", "min_loss", "max_loss", "end_loss", "steps_to_threshold"]
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def report_rows(report: ComparisonReport, include_wall_time: bool = False) -> tuple[list[str], list[list[str]]]:
    extra = sorted({k for r in report.runs for k in r.extra})
    header = REPORT_COLUMNS + (["wall_time"] if include_wall_time else []) + extra
    rows = []
    for r in report.runs:
        row = [r.label, r.seed, r.config_hash, r.min_loss, r.max_loss, r.end_loss, r.steps_to_threshold]
        if include_wall_time:
            row.append(r.wall_time)
        row += [r.extra.get(k) for k in extra]
        rows.append([_fmt(v) for v in row])
    return header, rows


def emit_csv(obj, path: str | os.PathLike, include_wall_time: bool = False) -> None:
    """Write a TrainLog, EvalMetrics or ComparisonReport as CSV.

    Wall-clock times are left out unless asked for so that reruns are
    byte-identical.
    """
    if isinstance(obj, TrainLog):
        obj.write_csv(path)
        return
    if isinstance(obj, EvalMetrics):
        header = EVAL_COLUMNS
        rows = [[r.episode, r.outcome, repr(float(r.reward)), r.steps] for r in obj.rows]
    elif isinstance(obj, ComparisonReport):
        header, rows = report_rows(obj, include_wall_time)
    else:
        raise TypeError(f"cannot write {type(obj).__name__} as CSV")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_eval_csv(path: str | os.PathLike) -> EvalMetrics:
    from .metrics import EpisodeRow

    with open(path, newline="") as fh:
        rows = [EpisodeRow(int(r["episode"]), r["outcome"], float(r["reward"]), int(r["steps"])) for r in csv.DictReader(fh)]
    return EvalMetrics.from_rows(rows)


def log_curves(logs: dict, metric: str, smooth: int = 1) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """label -> (steps, trailing-mean values) for each TrainLog."""
    out = {}
    for label, log in logs.items():
        xs, ys = metric_series(log, metric)
        w = max(1, min(smooth, len(ys)))
        if len(ys) == 0:
            out[str(label)] = (xs, ys)
            continue
        out[str(label)] = (xs[w - 1 :], trailing_mean(ys, w))
    return out


def _thin(xs: np.ndarray, ys: np.ndarray, max_points: int) -> tuple[np.ndarray, np.ndarray]:
    if len(xs) <= max_points:
        return xs, ys
    idx = np.unique(np.linspace(0, len(xs) - 1, max_points).round().astype(int))
    return xs[idx], ys[idx]


def emit_svg_curves(curves: dict, path: str | os.PathLike, title: str = "", xlabel: str = "step", ylabel: str = "",
                    width: int = 720, height: int = 420, max_points: int = 600) -> None:
    """Line chart with one polyline per labelled (xs, ys) series and a legend."""
    left, right, top, bottom = 70, 170, 40, 50
    pw, ph = width - left - right, height - top - bottom
    series = []
    for label, (xs, ys) in curves.items():
        xs, ys = np.asarray(xs, np.float64), np.asarray(ys, np.float64)
        keep = np.isfinite(xs) & np.isfinite(ys)
        series.append((str(label), *_thin(xs[keep], ys[keep], max_points)))
    allx = np.concatenate([s[1] for s in series]) if series else np.empty(0)
    ally = np.concatenate([s[2] for s in series]) if series else np.empty(0)
    x0, x1 = (float(allx.min()), float(allx.max())) if allx.size else (0.0, 1.0)
    y0, y1 = (float(ally.min()), float(ally.max())) if ally.size else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{left + pw / 2:.1f}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for k in range(5):
        xv, yv = x0 + (x1 - x0) * k / 4, y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{px(xv):.1f}" y="{top + ph + 16}" text-anchor="middle" font-size="10">{xv:.4g}</text>')
        out.append(f'<text x="{left - 6}" y="{py(yv) + 3:.1f}" text-anchor="end" font-size="10">{yv:.4g}</text>')
    for n, (label, xs, ys) in enumerate(series):
        color = PALETTE[n % len(PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 14 + 18 * n
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly + 4}" font-size="11">{escape(label)}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
