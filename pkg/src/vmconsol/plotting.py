"""Figures from experiment CSVs.

One file per metric per sweep, plus three panel figures per sweep grouping
the gain factors, the four migration cost factors and the summary overhead
metrics. x is the swept value, one series per algorithm, error bars are one
standard deviation across repetitions.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import ValidationError  # noqa: E402
from .harness import METRICS, read_csv  # noqa: E402

log = logging.getLogger(__name__)

LABELS = {
    "n_released_pm": "Released PMs",
    "packing_efficiency": "Packing efficiency (VMs / active PM)",
    "power_kw": "Power (kW)",
    "wastage": "Resource wastage",
    "md_tb": "Migration data (TB)",
    "mt_hours": "Migration time (h)",
    "dt_hours": "VM downtime (h)",
    "nc": "Network cost",
    "mo": "Migration overhead",
    "mec_kj": "Migration energy (kJ)",
    "msv": "SLA violation",
}
SWEEP_LABELS = {"np": "Number of PMs", "mean_rsc": "Mean resource demand", "sd_rsc": "SD of resource demand"}
PANELS = {
    "gain": ("n_released_pm", "packing_efficiency", "power_kw", "wastage"),
    "cost": ("md_tb", "mt_hours", "dt_hours", "nc"),
    "overhead": ("mo", "mec_kj", "msv"),
}
MARKERS = {"ffdl1": "s", "mmdvmc": "^", "amdvmc": "o"}
REQUIRED = ("sweep", "sweep_value", "algorithm")


def _series(rows, metric):
    out = defaultdict(lambda: ([], [], []))
    for row in rows:
        if row[metric] == "":
            continue
        xs, ys, es = out[row["algorithm"]]
        xs.append(float(row["sweep_value"]))
        ys.append(float(row[metric]))
        std = row.get(f"{metric}_std", "")
        es.append(float(std) if std else 0.0)
    return dict(sorted(out.items()))


def _draw(ax, rows, metric, sweep):
    for algorithm, (xs, ys, es) in _series(rows, metric).items():
        order = sorted(range(len(xs)), key=xs.__getitem__)
        ax.errorbar([xs[i] for i in order], [ys[i] for i in order], yerr=[es[i] for i in order],
                    marker=MARKERS.get(algorithm, "x"), capsize=3, label=algorithm.upper())
    ax.set_xlabel(SWEEP_LABELS.get(sweep, sweep))
    ax.set_ylabel(LABELS.get(metric, metric))
    if sweep == "np":
        ax.set_xscale("log", base=2)
    ax.grid(alpha=0.3)
    ax.legend(fontsize="small")


def emit_plots(csv_path, out_dir, fmt: str = "svg", metrics=METRICS) -> list[Path]:
    """Render figures for every sweep in ``csv_path``; returns the written paths."""
    rows = read_csv(csv_path)
    if not rows:
        log.warning("%s has no rows; nothing to plot", csv_path)
        return []
    for column in REQUIRED + tuple(metrics):
        if column not in rows[0]:
            raise ValidationError(f"{csv_path}: missing column {column!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_sweep = defaultdict(list)
    for row in rows:
        by_sweep[row["sweep"]].append(row)

    written = []
    for sweep, sweep_rows in sorted(by_sweep.items()):
        for metric in metrics:
            fig, ax = plt.subplots(figsize=(5, 3.6))
            _draw(ax, sweep_rows, metric, sweep)
            fig.tight_layout()
            path = out_dir / f"{sweep}_{metric}.{fmt}"
            fig.savefig(path)
            plt.close(fig)
            written.append(path)
        for name, panel in PANELS.items():
            panel = [m for m in panel if m in metrics]
            if not panel:
                continue
            ncols = 2
            nrows = (len(panel) + 1) // ncols
            fig, axes = plt.subplots(nrows, ncols, figsize=(10, 3.6 * nrows), squeeze=False)
            for ax, metric in zip(axes.flat, panel):
                _draw(ax, sweep_rows, metric, sweep)
            for ax in list(axes.flat)[len(panel):]:
                ax.set_visible(False)
            fig.tight_layout()
            path = out_dir / f"{sweep}_{name}.{fmt}"
            fig.savefig(path)
            plt.close(fig)
            written.append(path)
    return written
