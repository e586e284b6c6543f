"""Experiment configuration: JSON-friendly defaults and constructors.

Study configs are plain dicts so they hash deterministically, serialize to
manifests, and cross process boundaries for parallel cells.
"""

from __future__ import annotations

import json
from dataclasses import asdict

from ..core import RngContract
from ..envs import BeerGameConfig, BeerGameEnv, RecommenderConfig, RecommenderEnv, TabularEnv
from ..envs.synthetic import benchmark_mdp
from ..qlearn import DqnConfig

__all__ = [
    "DEFAULT_BEER",
    "DEFAULT_RECSYS",
    "DEFAULT_DQN",
    "default_study_config",
    "load_config",
    "merge",
    "build_env",
    "build_dqn_config",
]

# Desk-scale beer game: low starting retailer stock plus two-sided costs make
# reaching the base-stock band require state feedback, not a constant offset.
DEFAULT_BEER = {
    "kind": "beer-game",
    "reward_mode": "shaped",
    "horizon": 20,
    "demand_lo": 0,
    "demand_hi": 8,
    "info_lead": 2,
    "ship_lead": 2,
    "holding_costs": [2.0, 1.0, 1.0, 1.0],
    "penalty_costs": [10.0, 2.0, 2.0, 2.0],
    "action_offsets": [-2, -1, 0, 1, 2],
    "init_inventory": [0, 12, 12, 12],
    "agent": 0,
    "shaping_weights": [1 / 3, 1 / 3, 1 / 3],
    "reward_scale": 100.0,
    "inv_cap": 50.0,
    "pipe_cap": 25.0,
    "on_order_cap": 60.0,
}

DEFAULT_RECSYS = {
    "kind": "recommender",
    "reward_mode": "expected",
    "n_topics": 5,
    "n_docs": 20,
    "slate_size": 2,
    "horizon": 10,
    "affinity_weight": 4.0,
    "quality_weight": 1.0,
    "no_click_utility": 1.5,
    "shift_rate": 0.25,
    "catalog_seed": 7,
}

DEFAULT_DQN = {
    "iterations": 20000,
    "minibatch": 16,
    "minibatches_per_iteration": 1,
    "warmup_iterations": 500,
    "replay_capacity": 20000,
    "target_update": 100,
    "gamma": 1.0,
    "epsilon_start": 1.0,
    "epsilon_end": 0.05,
    "epsilon_anneal_frac": 0.5,
    "sampling": "with_replacement",
    "learning_rate": 0.05,
    "momentum": 0.9,
    "grad_clip": 5.0,
    "eval_every": 1000,
    "eval_episodes": 8,
}


def default_study_config(kind: str) -> dict:
    if kind == "depth":
        return {
            "env": dict(DEFAULT_BEER),
            "dqn": dict(DEFAULT_DQN),
            "depths": [1, 3],
            "seeds": [0, 1, 2, 3, 4],
            "param_budget": 700,
            "segment_windows": [3, 5, 10],
        }
    if kind == "reward":
        return {
            "env": dict(DEFAULT_BEER),
            "dqn": dict(DEFAULT_DQN),
            "depths": [1, 3],
            "reward_kinds": ["classical", "shaped"],
            "seeds": [0, 1, 2, 3, 4],
            "param_budget": 700,
        }
    if kind == "datasize":
        return {
            "env": dict(DEFAULT_BEER),
            "dqn": dict(DEFAULT_DQN, sampling="without_replacement", eval_every=500),
            "depths": [1, 3],
            "seeds": [0, 1, 2, 3, 4],
            "param_budget": 700,
            "band": 0.2,
            "sustain_evals": 3,
            "baseline_episodes": 300,
        }
    if kind == "recsys":
        return {
            "env": dict(DEFAULT_RECSYS),
            "dqn": dict(
                DEFAULT_DQN,
                iterations=8000,
                warmup_iterations=300,
                eval_every=500,
                learning_rate=0.05,
                epsilon_end=0.1,
            ),
            "depths": [1, 3],
            "seeds": [0, 1, 2, 3, 4],
            "param_budget": 900,
            "myopic_depth": 3,
        }
    raise ValueError(f"unknown study kind {kind!r}")


def load_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def merge(base: dict, override: dict | None) -> dict:
    """One-level-deep merge: nested dicts merge, everything else replaces."""
    if not override:
        return dict(base)
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = {**out[k], **v}
        else:
            out[k] = v
    return out


def build_env(env_cfg: dict):
    kind = env_cfg.get("kind", "beer-game")
    if kind == "beer-game":
        fields = {k: v for k, v in env_cfg.items() if k not in ("kind", "reward_mode")}
        for tup in ("holding_costs", "penalty_costs", "action_offsets",
                    "init_inventory", "shaping_weights"):
            if tup in fields:
                fields[tup] = tuple(fields[tup])
        return BeerGameEnv(BeerGameConfig(**fields), reward_mode=env_cfg.get("reward_mode", "shaped"))
    if kind == "recommender":
        fields = {k: v for k, v in env_cfg.items() if k not in ("kind", "reward_mode")}
        for tup in ("topic_quality_mean", "init_interest_lo", "init_interest_hi"):
            if tup in fields:
                fields[tup] = tuple(fields[tup])
        return RecommenderEnv(RecommenderConfig(**fields), reward_mode=env_cfg.get("reward_mode", "standard"))
    if kind == "benchmark-mdp":
        return TabularEnv(benchmark_mdp())
    raise ValueError(f"unknown environment kind {kind!r}")


def build_dqn_config(dqn_cfg: dict, master_seed: int, seed_index: int) -> DqnConfig:
    fields = dict(dqn_cfg)
    fields.pop("kind", None)
    return DqnConfig(rng=RngContract(master_seed), seed_index=seed_index, **fields)
