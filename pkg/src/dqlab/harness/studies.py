"""Study runners: depth sweep, reward comparison, data-size study, and the
recommender comparison.

Each runner maps a grid of (cell, seed) pairs to learning curves, emits
fixed-schema CSV rows, and isolates per-cell failures (a crashed cell is
recorded in the manifest and its siblings continue).  Cells are pure
functions of plain-dict payloads, so grids can run across processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..core import RngContract
from ..nets import widths_for_budget
from ..qlearn import dqn_train
from .config import build_dqn_config, build_env

__all__ = [
    "SCHEMAS",
    "best_window",
    "run_depth_sweep",
    "run_reward_compare",
    "run_data_size_study",
    "run_recommender_study",
    "stabilization_point",
]

SCHEMAS = {
    "depth_sweep": ("depth-sweep-v1", ["depth", "seed", "iteration", "eval_cost"]),
    "depth_segments": (
        "depth-sweep-segments-v1",
        ["depth", "seed", "window", "start_iteration", "mean_cost"],
    ),
    "reward_compare": (
        "reward-compare-v1",
        ["reward_kind", "depth", "seed", "iteration", "eval_cost", "eval_stderr"],
    ),
    "data_size": ("data-size-v1", ["depth", "seed", "samples_consumed", "eval_cost"]),
    "data_size_stab": (
        "data-size-stabilization-v1",
        ["depth", "seed", "bs_cost", "band", "reach_samples"],
    ),
    "recommender": (
        "recommender-v1",
        ["policy", "depth", "seed", "step", "mean_reward"],
    ),
    "recommender_final": (
        "recommender-final-v1",
        ["policy", "depth", "median_final_mean_reward"],
    ),
}


def best_window(values: list[float], window: int) -> tuple[int, float]:
    """Start index and mean of the lowest-mean run of `window` consecutive
    entries (the best-performance segment of a cost curve)."""
    if window < 1 or window > len(values):
        raise ValueError("window must be in 1..len(values)")
    best_start, best_mean = 0, math.inf
    for i in range(len(values) - window + 1):
        m = sum(values[i:i + window]) / window
        if m < best_mean:
            best_start, best_mean = i, m
    return best_start, best_mean


def _train_cell(payload: dict):
    """One (env config, dqn config, depth, seed) training run; returns the
    curve as plain tuples so results cross process boundaries."""
    env = build_env(payload["env"])
    dqn_cfg = build_dqn_config(payload["dqn"], payload["master_seed"], payload["seed"])
    input_dim = env.problem.state_dims[0] + env.problem.action_dims[0]
    widths = widths_for_budget(input_dim, payload["depth"], payload["param_budget"])[1:]
    res = dqn_train(env, widths=widths, cfg=dqn_cfg)
    return [
        (p.iteration, p.samples_consumed, p.train_loss, p.eval_score, p.eval_stderr)
        for p in res.curve
    ]


def _random_policy_cell(payload: dict):
    """Evaluation curve of the uniform-random policy on the same iteration
    grid as the trained cells; it never learns, each point re-evaluates on
    its own derived streams."""
    env = build_env(payload["env"])
    dqn = payload["dqn"]
    rng = RngContract(payload["master_seed"])
    T = env.problem.horizon
    n_actions = len(env.problem.action_sets[0])
    points = []
    evals = dqn["eval_episodes"]
    for it in range(dqn["eval_every"], dqn["iterations"] + 1, dqn["eval_every"]):
        scores = np.empty(evals)
        for ep in range(evals):
            stream = rng.stream(f"random-eval-{payload['seed']}-{it}", ep)
            state = env.reset(stream)
            rewards, infos = [], []
            for t in range(1, T + 1):
                a = int(stream.integers(0, n_actions))
                state, r, info = env.step(t, state, a, stream)
                rewards.append(r)
                infos.append(info)
            scores[ep] = env.episode_score(rewards, infos)
        se = float(scores.std(ddof=1) / math.sqrt(evals)) if evals > 1 else 0.0
        points.append((it, 0, float("nan"), float(scores.mean()), se))
    return points


_CELL_FNS = {"train": _train_cell, "random": _random_policy_cell}


def _dispatch(payload: dict):
    return _CELL_FNS[payload["fn"]](payload)


def _run_cells(payloads: list[dict], threads: int):
    """Runs cells (in order, or across processes) with crash isolation.
    Returns ({key: curve}, [failure records])."""
    results: dict = {}
    failures: list[dict] = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(_dispatch, p): p for p in payloads}
            for fut, p in futures.items():
                try:
                    results[p["key"]] = fut.result()
                except Exception as exc:
                    failures.append({"cell": list(p["key"]), "error": repr(exc)})
    else:
        for p in payloads:
            try:
                results[p["key"]] = _dispatch(p)
            except Exception as exc:
                failures.append({"cell": list(p["key"]), "error": repr(exc)})
    return results, failures


def run_depth_sweep(cfg: dict, master_seed: int, threads: int = 1):
    """Shaped-reward learner at each depth; emits curve rows plus
    best-performance segments over the configured windows."""
    if not cfg["depths"]:
        raise ValueError("depth list must be non-empty")
    payloads = [
        {
            "fn": "train",
            "key": (depth, seed),
            "env": cfg["env"],
            "dqn": cfg["dqn"],
            "depth": depth,
            "seed": seed,
            "param_budget": cfg["param_budget"],
            "master_seed": master_seed,
        }
        for depth in cfg["depths"]
        for seed in cfg["seeds"]
    ]
    results, failures = _run_cells(payloads, threads)
    rows = []
    seg_rows = []
    for depth in cfg["depths"]:
        for seed in cfg["seeds"]:
            curve = results.get((depth, seed))
            if curve is None:
                continue
            costs = [pt[3] for pt in curve]
            for pt in curve:
                rows.append((depth, seed, pt[0], pt[3]))
            for window in cfg.get("segment_windows", [3]):
                if window <= len(costs):
                    start, mean = best_window(costs, window)
                    seg_rows.append((depth, seed, window, curve[start][0], mean))
    return rows, seg_rows, failures


def run_reward_compare(cfg: dict, master_seed: int, threads: int = 1):
    """Classical vs shaped rewards at shallow and deep depths; same seeds
    give each reward kind an identical environment stream."""
    payloads = []
    for kind in cfg["reward_kinds"]:
        env_cfg = dict(cfg["env"], reward_mode=kind)
        for depth in cfg["depths"]:
            for seed in cfg["seeds"]:
                payloads.append(
                    {
                        "fn": "train",
                        "key": (kind, depth, seed),
                        "env": env_cfg,
                        "dqn": cfg["dqn"],
                        "depth": depth,
                        "seed": seed,
                        "param_budget": cfg["param_budget"],
                        "master_seed": master_seed,
                    }
                )
    results, failures = _run_cells(payloads, threads)
    rows = []
    for kind in cfg["reward_kinds"]:
        for depth in cfg["depths"]:
            for seed in cfg["seeds"]:
                curve = results.get((kind, depth, seed))
                if curve is None:
                    continue
                for pt in curve:
                    rows.append((kind, depth, seed, pt[0], pt[3], pt[4]))
    return rows, failures


def stabilization_point(curve, bs_cost: float, band: float, sustain: int):
    """First consumed-sample count from which the cost stays at or below
    (1 + band) * bs_cost for `sustain` consecutive evaluation points.
    Returns None when the curve never stabilizes."""
    limit = (1.0 + band) * bs_cost
    ok = [pt[3] <= limit for pt in curve]
    for i in range(len(ok) - sustain + 1):
        if all(ok[i:i + sustain]):
            return curve[i][1]
    return None


def run_data_size_study(cfg: dict, master_seed: int, threads: int = 1):
    """Without-replacement sampling; tracks cost against consumed samples
    and reports each cell's stabilization point against the base-stock
    baseline band."""
    if cfg["dqn"].get("sampling") != "without_replacement":
        raise ValueError("data-size study requires the without-replacement discipline")
    payloads = [
        {
            "fn": "train",
            "key": (depth, seed),
            "env": cfg["env"],
            "dqn": cfg["dqn"],
            "depth": depth,
            "seed": seed,
            "param_budget": cfg["param_budget"],
            "master_seed": master_seed,
        }
        for depth in cfg["depths"]
        for seed in cfg["seeds"]
    ]
    results, failures = _run_cells(payloads, threads)
    env = build_env(cfg["env"])
    bs_cost = env.baseline_cost(
        cfg.get("baseline_episodes", 300), RngContract(master_seed).stream("baseline")
    )
    rows = []
    stab_rows = []
    for depth in cfg["depths"]:
        for seed in cfg["seeds"]:
            curve = results.get((depth, seed))
            if curve is None:
                continue
            for pt in curve:
                rows.append((depth, seed, pt[1], pt[3]))
            reach = stabilization_point(curve, bs_cost, cfg["band"], cfg["sustain_evals"])
            stab_rows.append((depth, seed, bs_cost, cfg["band"], reach))
    return rows, stab_rows, failures


def run_recommender_study(cfg: dict, master_seed: int, threads: int = 1):
    """DQN with expected and standard rewards at each depth, the myopic
    (gamma = 0) learner on the expected reward, and the uniform-random
    baseline; plus the median-final ranking table."""
    payloads = []
    for depth in cfg["depths"]:
        for seed in cfg["seeds"]:
            for kind, label in (("expected", "DQN-e"), ("standard", "DQN-s")):
                payloads.append(
                    {
                        "fn": "train",
                        "key": (label, depth, seed),
                        "env": dict(cfg["env"], reward_mode=kind),
                        "dqn": cfg["dqn"],
                        "depth": depth,
                        "seed": seed,
                        "param_budget": cfg["param_budget"],
                        "master_seed": master_seed,
                    }
                )
    myopic_depth = cfg.get("myopic_depth", 3)
    for seed in cfg["seeds"]:
        payloads.append(
            {
                "fn": "train",
                "key": ("Myopic", myopic_depth, seed),
                "env": dict(cfg["env"], reward_mode="expected"),
                "dqn": dict(cfg["dqn"], gamma=0.0),
                "depth": myopic_depth,
                "seed": seed,
                "param_budget": cfg["param_budget"],
                "master_seed": master_seed,
            }
        )
        payloads.append(
            {
                "fn": "random",
                "key": ("Random", 0, seed),
                "env": cfg["env"],
                "dqn": cfg["dqn"],
                "seed": seed,
                "master_seed": master_seed,
            }
        )
    results, failures = _run_cells(payloads, threads)
    rows = []
    finals: dict = {}
    for key in sorted(results.keys()):
        label, depth, seed = key
        curve = results[key]
        for pt in curve:
            rows.append((label, depth, seed, pt[0], pt[3]))
        if curve:
            finals.setdefault((label, depth), []).append(curve[-1][3])
    final_rows = [
        (label, depth, float(np.median(vals)))
        for (label, depth), vals in sorted(finals.items())
    ]
    return rows, final_rows, failures
