"""Cross-run aggregation: merged degradation tables and summary figures.

Consumes the per-run CSV artifacts written by the runner. The summary CSV
is the primary output; PNG figures render the same aggregates for quick
inspection.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .config import parse_config_text
from .errors import DataError, IoError

_VIEW_STYLES = (("global", "-"), ("intra", "--"), ("cross", ":"))


@dataclass
class ReportPaths:
    summary_csv: str
    degradation_png: str
    curves_png: str


def find_run_dirs(runs_dir: str) -> list[str]:
    """Directories under runs_dir (or runs_dir itself) holding a degradation.csv."""
    hits = []
    for root, dirs, files in os.walk(runs_dir):
        dirs.sort()
        if "degradation.csv" in files:
            hits.append(root)
    if not hits:
        raise DataError(f"no degradation.csv found under {runs_dir}")
    return sorted(hits)


def _read_csv(path: str) -> list[dict[str, str]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def summarize_degradation(run_dirs: list[str]) -> list[tuple[str, int, int, float, float]]:
    """Merge per-run degradation tables into (cohort, sigma, n, mean, std) rows.

    Std is the sample standard deviation across runs (0 for a single run).
    Rows are sorted by cohort label then sigma.
    """
    cells: dict[tuple[str, int], list[float]] = {}
    for run_dir in run_dirs:
        for row in _read_csv(os.path.join(run_dir, "degradation.csv")):
            key = (row["cohort"], int(row["sigma"]))
            cells.setdefault(key, []).append(float(row["delta"]))
    out = []
    for (cohort, sigma), deltas in sorted(cells.items()):
        n = len(deltas)
        mean = sum(deltas) / n
        std = math.sqrt(sum((d - mean) ** 2 for d in deltas) / (n - 1)) if n > 1 else 0.0
        out.append((cohort, sigma, n, mean, std))
    return out


def write_degradation_summary(path: str, summary) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("cohort,sigma,n_runs,delta_mean,delta_std\n")
        for cohort, sigma, n, mean, std in summary:
            fh.write(f"{cohort},{sigma},{n},{mean!r},{std!r}\n")


def render_degradation_figure(path: str, summary) -> None:
    """Mean degradation vs blur level, one error-bar series per cohort."""
    cohorts: dict[str, list[tuple[int, float, float]]] = {}
    for cohort, sigma, _, mean, std in summary:
        cohorts.setdefault(cohort, []).append((sigma, mean, std))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for cohort, points in sorted(cohorts.items()):
        points.sort()
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        es = [p[2] for p in points]
        ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=cohort)
    ax.set_xlabel("blur level sigma")
    ax.set_ylabel("Macro-F1 drop vs sigma=0 block")
    ax.set_title("Recognition degradation under blur")
    ax.axhline(0.0, color="gray", linewidth=0.8)
    ax.legend(title="cohort")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _eval_start_block(run_dir: str) -> int | None:
    manifest = os.path.join(run_dir, "manifest.cfg")
    if not os.path.exists(manifest):
        return None
    with open(manifest, encoding="utf-8") as fh:
        cfg = parse_config_text(fh.read())
    return math.ceil(cfg.t_learn / cfg.t_block)


def collect_curves(run_dirs: list[str]):
    """Mean Macro-F1 per (cohort, view, block) across runs, plus eval boundary."""
    cells: dict[tuple[str, str, int], list[float]] = {}
    boundary = None
    for run_dir in run_dirs:
        if boundary is None:
            boundary = _eval_start_block(run_dir)
        metrics = os.path.join(run_dir, "metrics.csv")
        if not os.path.exists(metrics):
            continue
        for row in _read_csv(metrics):
            if row["view"] not in ("global", "intra", "cross") or not row["macro_f1"]:
                continue
            key = (row["cohort"], row["view"], int(row["block"]))
            cells.setdefault(key, []).append(float(row["macro_f1"]))
    curves: dict[tuple[str, str], list[tuple[int, float]]] = {}
    for (cohort, view, block), vals in sorted(cells.items()):
        curves.setdefault((cohort, view), []).append((block, sum(vals) / len(vals)))
    return curves, boundary


def render_curves_figure(path: str, curves, boundary: int | None) -> None:
    """Macro-F1 trajectories per cohort, one panel each, views as line styles."""
    cohorts = sorted({cohort for cohort, _ in curves})
    if not cohorts:
        raise DataError("no Macro-F1 curves to plot")
    fig, axes = plt.subplots(1, len(cohorts),
                             figsize=(4.0 * len(cohorts), 3.2),
                             sharey=True, squeeze=False)
    for ax, cohort in zip(axes[0], cohorts):
        for view, style in _VIEW_STYLES:
            points = curves.get((cohort, view))
            if not points:
                continue
            points.sort()
            ax.plot([p[0] for p in points], [p[1] for p in points],
                    style, label=view)
        if boundary is not None:
            ax.axvline(boundary - 0.5, color="red", linewidth=0.8)
        ax.set_title(f"cohort {cohort}")
        ax.set_xlabel("reporting window")
        ax.set_ylim(0.0, 1.0)
    axes[0][0].set_ylabel("Macro-F1")
    axes[0][-1].legend(loc="lower left", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def generate_report(runs_dir: str, out_dir: str) -> ReportPaths:
    """Merge every run under runs_dir and write summary CSV plus figures."""
    run_dirs = find_run_dirs(runs_dir)
    os.makedirs(out_dir, exist_ok=True)
    summary = summarize_degradation(run_dirs)
    paths = ReportPaths(
        summary_csv=os.path.join(out_dir, "degradation_summary.csv"),
        degradation_png=os.path.join(out_dir, "degradation.png"),
        curves_png=os.path.join(out_dir, "macro_f1_curves.png"),
    )
    write_degradation_summary(paths.summary_csv, summary)
    render_degradation_figure(paths.degradation_png, summary)
    curves, boundary = collect_curves(run_dirs)
    render_curves_figure(paths.curves_png, curves, boundary)
    return paths
