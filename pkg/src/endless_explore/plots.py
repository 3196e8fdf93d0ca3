"""Figure rendering for sweep reports.

Figures are drawn from the CSV files a sweep has already written, so the
plots can never disagree with the delimited output. PNG files land next to
the CSVs.
"""

from __future__ import annotations

import csv
import glob
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_COMPONENTS = (
    ("r_b", "cumulative behavior reward"),
    ("r_a", "cumulative arousal reward"),
    ("r_lambda", "cumulative blended reward"),
)


def _read_curve(path: str) -> dict[str, list[float | None]]:
    columns: dict[str, list[float | None]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            for name, raw in row.items():
                columns.setdefault(name, []).append(float(raw) if raw != "" else None)
    return columns


def _read_summary(path: str) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def render_sweep_figures(out_dir: str) -> list[str]:
    """Render reward-over-time figures per component plus a summary chart.

    Returns the list of files written.
    """
    written: list[str] = []
    curve_files = sorted(glob.glob(os.path.join(out_dir, "curves_*.csv")))
    curves = {
        os.path.basename(path)[len("curves_"):-len(".csv")]: _read_curve(path)
        for path in curve_files
    }

    for component, title in _COMPONENTS:
        fig, ax = plt.subplots(figsize=(7, 4))
        plotted = False
        for label, columns in curves.items():
            means = columns.get(f"mean_{component}", [])
            cis = columns.get(f"ci_{component}", [])
            times = columns.get("time_s", [])
            points = [(t, m, c) for t, m, c in zip(times, means, cis) if m is not None]
            if not points:
                continue
            xs = [p[0] for p in points]
            ys = [p[1] for p in points]
            lo = [p[1] - p[2] for p in points]
            hi = [p[1] + p[2] for p in points]
            ax.plot(xs, ys, label=label, linewidth=1.2)
            ax.fill_between(xs, lo, hi, alpha=0.15)
            plotted = True
        if not plotted:
            plt.close(fig)
            continue
        ax.set_xlabel("time (s)")
        ax.set_ylabel(title)
        ax.set_ylim(-0.02, 1.02)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, f"fig_{component}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    summary_path = os.path.join(out_dir, "summary.csv")
    if os.path.exists(summary_path):
        rows = _read_summary(summary_path)
        fig, ax = plt.subplots(figsize=(7, 4))
        labels = [r["label"] for r in rows]
        xs = range(len(labels))
        width = 0.27
        for offset, (component, _) in zip((-width, 0.0, width), _COMPONENTS):
            means = []
            cis = []
            for r in rows:
                raw_mean = r[f"mean_{component}"]
                means.append(float(raw_mean) if raw_mean != "" else float("nan"))
                raw_ci = r[f"ci_{component}"]
                cis.append(float(raw_ci) if raw_ci != "" else 0.0)
            ax.bar([x + offset for x in xs], means, width=width,
                   yerr=cis, capsize=2, label=component)
        ax.set_xticks(list(xs))
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
        ax.set_ylabel("final reward")
        ax.set_ylim(0.0, 1.05)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, "fig_summary.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written
