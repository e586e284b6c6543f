"""Figure rendering for the report path.

Reads the study CSVs out of a run directory and renders one PNG per study
next to them.  Rendering never affects the delimited outputs; studies stay
plot-free and the report command is the only caller.
"""

from __future__ import annotations

import math
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .manifest import read_csv

__all__ = ["render_report_figures", "apply_style"]


def apply_style():
    plt.rcParams.update(
        {
            "figure.figsize": (7.0, 4.4),
            "font.size": 11,
            "axes.grid": True,
            "grid.alpha": 0.3,
            "lines.linewidth": 1.6,
            "legend.frameon": False,
        }
    )


def _median_curves(rows, key_cols, x_col, y_col):
    """rows of strings -> {key: (xs, median ys across the remaining col)}."""
    series = defaultdict(lambda: defaultdict(list))
    for row in rows:
        key = tuple(row[c] for c in key_cols)
        series[key][float(row[x_col])].append(float(row[y_col]))
    out = {}
    for key, pts in series.items():
        xs = sorted(pts)
        out[key] = (xs, [float(np.median(pts[x])) for x in xs])
    return out


def _plot_median_curves(path, rows, key_cols, x_col, y_col, xlabel, ylabel, title):
    apply_style()
    fig, ax = plt.subplots()
    for key, (xs, ys) in sorted(_median_curves(rows, key_cols, x_col, y_col).items()):
        ax.plot(xs, ys, marker="o", markersize=3, label=" ".join(map(str, key)))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report_figures(out_dir: str) -> list[str]:
    """Renders figures for every known CSV present; returns created names."""
    created = []

    def maybe(fname, fn):
        path = os.path.join(out_dir, fname)
        if os.path.exists(path):
            target = fname.replace(".csv", ".png")
            fn(path, os.path.join(out_dir, target))
            created.append(target)

    def depth_fig(src, dst):
        cols, rows = read_csv(src)
        _plot_median_curves(
            dst, rows, key_cols=[cols.index("depth")],
            x_col=cols.index("iteration"), y_col=cols.index("eval_cost"),
            xlabel="iteration", ylabel="median evaluation cost",
            title="Depth sweep (shaped reward)",
        )

    def reward_fig(src, dst):
        cols, rows = read_csv(src)
        _plot_median_curves(
            dst, rows,
            key_cols=[cols.index("reward_kind"), cols.index("depth")],
            x_col=cols.index("iteration"), y_col=cols.index("eval_cost"),
            xlabel="iteration", ylabel="median evaluation cost",
            title="Reward comparison",
        )

    def datasize_fig(src, dst):
        cols, rows = read_csv(src)
        _plot_median_curves(
            dst, rows, key_cols=[cols.index("depth")],
            x_col=cols.index("samples_consumed"), y_col=cols.index("eval_cost"),
            xlabel="consumed training samples", ylabel="median evaluation cost",
            title="Data-size study (without replacement)",
        )

    def recsys_fig(src, dst):
        cols, rows = read_csv(src)
        _plot_median_curves(
            dst, rows,
            key_cols=[cols.index("policy"), cols.index("depth")],
            x_col=cols.index("step"), y_col=cols.index("mean_reward"),
            xlabel="training iteration", ylabel="median mean reward",
            title="Recommender policies",
        )

    def certify_fig(src, dst):
        cols, rows = read_csv(src)
        apply_style()
        fig, ax = plt.subplots()
        measured = [float(r[cols.index("measured_error")]) for r in rows]
        bound = [float(r[cols.index("bound")]) for r in rows]
        ok = [r[cols.index("pass")] == "true" for r in rows]
        eps = 1e-12
        ax.scatter(
            [b + eps for b, o in zip(bound, ok) if o],
            [m + eps for m, o in zip(measured, ok) if o],
            s=18, label="pass",
        )
        if not all(ok):
            ax.scatter(
                [b + eps for b, o in zip(bound, ok) if not o],
                [m + eps for m, o in zip(measured, ok) if not o],
                s=26, marker="x", color="crimson", label="fail",
            )
        lim = max(max(bound, default=1.0), max(measured, default=1.0), 1e-6)
        grid = np.geomspace(1e-6, lim * 1.5, 50)
        ax.plot(grid, grid, ls="--", color="gray", label="measured = bound")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("certified error bound")
        ax.set_ylabel("measured L1 error")
        ax.set_title("Constructive approximation certification")
        ax.legend()
        fig.tight_layout()
        fig.savefig(dst, dpi=150)
        plt.close(fig)

    def rate_fig(src, dst):
        cols, rows = read_csv(src)
        apply_style()
        fig, ax = plt.subplots()
        budgets = [float(r[cols.index("budget")]) for r in rows]
        errs = [float(r[cols.index("measured_error")]) for r in rows
                if r[cols.index("measured_error")] not in ("nan", "")]
        kept_budgets = [b for b, r in zip(budgets, rows)
                        if r[cols.index("measured_error")] not in ("nan", "")]
        bounds = [float(r[cols.index("predicted_bound")]) for r in rows]
        ax.scatter(kept_budgets, errs, s=20, label="measured")
        ax.plot(sorted(set(budgets)),
                [b for _, b in sorted(set(zip(budgets, bounds)))],
                ls="--", color="gray", label="predicted scaling")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("parameter budget factor")
        ax.set_ylabel("L^p error")
        ax.set_title("Empirical rate study")
        ax.legend()
        fig.tight_layout()
        fig.savefig(dst, dpi=150)
        plt.close(fig)

    def bounds_fig(src, dst):
        cols, rows = read_csv(src)
        apply_style()
        fig, ax = plt.subplots()
        names = [r[cols.index("bound")] for r in rows]
        vals = [float(r[cols.index("value")]) for r in rows]
        ax.barh(names, vals)
        ax.set_xlabel("bound value (unknown constants = 1)")
        ax.set_title("Generalization-bound report")
        fig.tight_layout()
        fig.savefig(dst, dpi=150)
        plt.close(fig)

    def curve_fig(src, dst):
        cols, rows = read_csv(src)
        _plot_median_curves(
            dst, rows, key_cols=[cols.index("seed")],
            x_col=cols.index("iteration"), y_col=cols.index("eval_score"),
            xlabel="iteration", ylabel="evaluation score",
            title="Learning curve",
        )

    maybe("depth_sweep.csv", depth_fig)
    maybe("reward_compare.csv", reward_fig)
    maybe("data_size.csv", datasize_fig)
    maybe("recommender.csv", recsys_fig)
    maybe("approx_certify.csv", certify_fig)
    maybe("rate_study.csv", rate_fig)
    maybe("bounds.csv", bounds_fig)
    maybe("curve.csv", curve_fig)
    return created
