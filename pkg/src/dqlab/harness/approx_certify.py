"""Certification suite for the constructive approximants.

Builds the depth-2 nets across a randomized grid of dimensions, partition
resolutions, sparsities, and ramp widths, measures L^1 errors with the
midpoint oracle, and checks each against the certified bound.  Failing rows
serialize their target spec to a side file for replay.  Midpoint grids are
chosen so the grid step resolves the ramp bands (step <= ~0.6 tau); the
three-dimensional rows therefore draw coarser partitions and the wide ramp
option, keeping the whole suite inside a one-minute budget.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ..approx import (
    CubicPartition,
    approximate_piecewise_constant,
    construction_error_bound,
    lp_error,
    net_evaluator,
    random_constant_spec,
)
from ..core import RngContract

__all__ = ["CertifyRow", "certify_resolution", "default_certify_config", "run_approx_certify"]


@dataclass(frozen=True)
class CertifyRow:
    d: int
    N: int
    s: int
    tau: float
    p: float
    measured_error: float
    bound: float
    passed: bool
    spec_file: str = ""


SCHEMA = ("approx-certify-v1",
          ["d", "N", "s", "tau", "p", "measured_error", "bound", "pass", "spec_file"])


def certify_resolution(d: int, tau: float) -> int:
    """Per-row midpoint resolution: the step must resolve the ramp width."""
    if d == 1:
        return 8192
    if d == 2:
        need = int(math.ceil(1.7 / tau))
        return max(256, min(2048, 1 << (need - 1).bit_length()))
    return 128


def default_certify_config() -> dict:
    return {
        "figure_cell": {
            "d": 2, "N": 6, "s": 4, "C0": 1.0, "tau": 0.01, "resolution": 2000,
            "values": [1.0, -1.0, 1.0, -1.0], "support": [3, 11, 22, 30],
        },
        "specs_per_dim": 10,
        "dims": [1, 2, 3],
        "C0": 1.0,
        "halving_dims": [1, 2],
    }


def _measure(spec, tau: float, p: float, resolution: int) -> tuple[float, float]:
    net = approximate_piecewise_constant(spec, tau)
    err = lp_error(spec.evaluate, net_evaluator(net), p, resolution, spec.partition.dim)
    bound = construction_error_bound(
        spec.partition.dim, spec.bound, spec.sparsity, tau, spec.partition.resolution
    )
    return err, bound


def run_approx_certify(cfg: dict, master_seed: int, out_dir: str | None = None) -> list[CertifyRow]:
    """Returns one row per (spec, tau) cell, the fixed reference cell first."""
    rng = RngContract(master_seed)
    rows: list[CertifyRow] = []

    def add_row(spec, tau, p, resolution):
        err, bound = _measure(spec, tau, p, resolution)
        passed = err <= bound
        spec_file = ""
        if not passed and out_dir is not None:
            spec_file = f"failed_spec_{len(rows)}.json"
            with open(os.path.join(out_dir, spec_file), "w") as fh:
                fh.write(spec.to_json() + "\n")
        rows.append(CertifyRow(spec.partition.dim, spec.partition.resolution,
                               spec.sparsity, tau, p, err, bound, passed, spec_file))

    fc = cfg["figure_cell"]
    from ..approx import PiecewiseConstantSpec

    fig_spec = PiecewiseConstantSpec(
        CubicPartition(fc["d"], fc["N"]), tuple(fc["support"]), tuple(fc["values"]), fc["C0"]
    )
    add_row(fig_spec, fc["tau"], 1.0, fc["resolution"])

    for d in cfg["dims"]:
        for i in range(cfg["specs_per_dim"]):
            stream = rng.stream(f"certify-{d}", i)
            if d == 3:
                # coarse partitions and the wide ramp keep 3-d integration honest
                N = int(stream.integers(1, 4))
                tau = 0.1 / N
            else:
                N = int(stream.integers(1, 7))
                narrow_ok = d == 1 or N <= 3
                tau = (0.01 if (i % 2 == 1 and narrow_ok) else 0.1) / N
            s = int(stream.integers(0, N**d + 1))
            spec = random_constant_spec(CubicPartition(d, N), s, cfg["C0"], stream)
            add_row(spec, tau, 1.0, certify_resolution(d, tau))
            if d in cfg.get("halving_dims", []) and tau > 0.02 / N:
                add_row(spec, tau / 2, 1.0, certify_resolution(d, tau / 2))
    return rows
