"""Shared data model: problem descriptors, trajectories, datasets, seeding.

Everything downstream (environments, learners, the experiment harness) builds
on the types here. All types are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ProblemSpec",
    "Trajectory",
    "Provenance",
    "Dataset",
    "RngContract",
    "ValidationResult",
    "derive_stream",
    "validate_trajectory",
    "save_dataset",
    "load_dataset",
]


Point = tuple[float, ...]


@dataclass(frozen=True)
class ProblemSpec:
    """Static description of a T-stage decision problem.

    Attributes:
        horizon: number of stages T (>= 1).
        state_dims: state dimension per stage, length T+1 (the trailing entry
            is the dimension of the terminal state s_{T+1}).
        action_dims: action dimension per stage, length T.
        action_sets: per stage, the finite set of action points, each a tuple
            of coordinates inside [0, 1]^{action_dims[t]}.
        reward_bound: U, a hard sup-norm bound on every per-stage reward.
        mu: behavior-policy constant; every action must be chosen with
            probability at least 1/mu.  A uniform behavior policy needs
            mu >= max_t |A_t|.
    """

    horizon: int
    state_dims: tuple[int, ...]
    action_dims: tuple[int, ...]
    action_sets: tuple[tuple[Point, ...], ...]
    reward_bound: float
    mu: float

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if len(self.state_dims) != self.horizon + 1:
            raise ValueError("state_dims must have length T+1")
        if len(self.action_dims) != self.horizon:
            raise ValueError("action_dims must have length T")
        if len(self.action_sets) != self.horizon:
            raise ValueError("action_sets must have length T")
        for t, acts in enumerate(self.action_sets):
            if len(acts) == 0:
                raise ValueError(f"action set at stage {t} is empty")
            for a in acts:
                if len(a) != self.action_dims[t]:
                    raise ValueError(f"action dim mismatch at stage {t}")
                if any(c < 0.0 or c > 1.0 for c in a):
                    raise ValueError(f"action coordinate outside [0,1] at stage {t}")
        if self.reward_bound < 0:
            raise ValueError("reward_bound must be nonnegative")
        if self.mu < 1.0:
            raise ValueError("mu must be >= 1")

    @property
    def max_actions(self) -> int:
        return max(len(a) for a in self.action_sets)

    def to_json_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "state_dims": list(self.state_dims),
            "action_dims": list(self.action_dims),
            "action_sets": [[list(a) for a in acts] for acts in self.action_sets],
            "reward_bound": self.reward_bound,
            "mu": self.mu,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "ProblemSpec":
        return ProblemSpec(
            horizon=d["horizon"],
            state_dims=tuple(d["state_dims"]),
            action_dims=tuple(d["action_dims"]),
            action_sets=tuple(
                tuple(tuple(a) for a in acts) for acts in d["action_sets"]
            ),
            reward_bound=d["reward_bound"],
            mu=d["mu"],
        )


@dataclass(frozen=True)
class Trajectory:
    """One full-horizon sample: T+1 states, T actions, T rewards."""

    states: tuple[Point, ...]
    actions: tuple[Point, ...]
    rewards: tuple[float, ...]


@dataclass(frozen=True)
class Provenance:
    environment: str
    behavior: str
    seed: int


@dataclass(frozen=True)
class Dataset:
    """An i.i.d. collection of trajectories sharing one ProblemSpec."""

    problem: ProblemSpec
    trajectories: tuple[Trajectory, ...]
    provenance: Provenance

    def __len__(self) -> int:
        return len(self.trajectories)


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_trajectory(traj: Trajectory, spec: ProblemSpec) -> ValidationResult:
    """Check a trajectory against its problem spec.

    Returns the first violated invariant; a validation result is a value,
    never an exception.
    """
    T = spec.horizon
    if len(traj.states) != T + 1 or len(traj.actions) != T or len(traj.rewards) != T:
        return ValidationResult(False, "length mismatch")
    for t, s in enumerate(traj.states):
        if len(s) != spec.state_dims[t]:
            return ValidationResult(False, f"state dimension mismatch at stage {t + 1}")
        if any(c < 0.0 or c > 1.0 for c in s):
            return ValidationResult(False, f"state coordinate outside [0,1] at stage {t + 1}")
    for t, a in enumerate(traj.actions):
        if len(a) != spec.action_dims[t]:
            return ValidationResult(False, f"action dimension mismatch at stage {t + 1}")
        if any(c < 0.0 or c > 1.0 for c in a):
            return ValidationResult(False, f"action coordinate outside [0,1] at stage {t + 1}")
    for t, r in enumerate(traj.rewards):
        if not np.isfinite(r) or abs(r) > spec.reward_bound:
            return ValidationResult(False, "reward bound violated")
    return ValidationResult(True)


@dataclass(frozen=True)
class RngContract:
    """Deterministic stream derivation: child = hash(master_seed, label, index).

    The derivation is platform independent (SHA-256 over a canonical string),
    so identical (master_seed, label, index) triples reproduce identical
    streams everywhere.
    """

    master_seed: int

    def stream(self, label: str, index: int = 0) -> np.random.Generator:
        return derive_stream(self, label, index)

    def child(self, label: str, index: int = 0) -> "RngContract":
        """A derived contract, for components that fan out further."""
        return RngContract(_child_seed(self.master_seed, label, index) & 0xFFFFFFFFFFFFFFFF)


def _child_seed(master_seed: int, label: str, index: int) -> int:
    key = f"{master_seed}:{label}:{index}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:16], "little")


def derive_stream(rng: RngContract, label: str, index: int = 0) -> np.random.Generator:
    seed = _child_seed(rng.master_seed, label, index)
    return np.random.Generator(np.random.PCG64(seed))


# ---------------------------------------------------------------------------
# On-disk dataset format: line-delimited JSON.  The header record carries the
# problem spec and provenance; each following line is one trajectory with
# states/actions/rewards as flat numeric arrays.  Floats round-trip exactly
# (json emits repr, the shortest exact decimal).
# ---------------------------------------------------------------------------

_DATASET_KIND = "dqlab-dataset"
_DATASET_VERSION = 1


def save_dataset(dataset: Dataset, path) -> None:
    with open(path, "w") as fh:
        header = {
            "kind": _DATASET_KIND,
            "version": _DATASET_VERSION,
            "problem": dataset.problem.to_json_dict(),
            "provenance": {
                "environment": dataset.provenance.environment,
                "behavior": dataset.provenance.behavior,
                "seed": dataset.provenance.seed,
            },
        }
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for traj in dataset.trajectories:
            rec = {
                "states": [list(s) for s in traj.states],
                "actions": [list(a) for a in traj.actions],
                "rewards": list(traj.rewards),
            }
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def load_dataset(path) -> Dataset:
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != _DATASET_KIND:
            raise ValueError(f"not a {_DATASET_KIND} file: {path}")
        if header.get("version") != _DATASET_VERSION:
            raise ValueError(f"unsupported dataset version {header.get('version')}")
        problem = ProblemSpec.from_json_dict(header["problem"])
        prov = Provenance(**header["provenance"])
        trajectories = []
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            trajectories.append(
                Trajectory(
                    states=tuple(tuple(s) for s in rec["states"]),
                    actions=tuple(tuple(a) for a in rec["actions"]),
                    rewards=tuple(rec["rewards"]),
                )
            )
    return Dataset(problem=problem, trajectories=tuple(trajectories), provenance=prov)
