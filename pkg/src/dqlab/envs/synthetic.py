"""Synthetic MDP families with exactly known optimal Q-functions.

Tabular mode: explicit row-stochastic transition tables and mean-reward
tables, solvable exactly by backward induction.  Piecewise mode: the mean
reward per (stage, action) is a piecewise-constant function of the state,
so in the single-stage case the optimal Q-function is a known member of the
piecewise-constant target class by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..approx import PiecewiseConstantSpec
from ..core import ProblemSpec, RngContract
from .base import Environment

__all__ = [
    "TabularMdp",
    "TabularEnv",
    "PiecewiseMdp",
    "PiecewiseEnv",
    "benchmark_mdp",
    "rollout_batch_tabular",
    "state_point",
    "action_point",
]


def state_point(i: int, n: int) -> tuple[float, ...]:
    return ((i + 0.5) / n,)


def action_point(j: int, n: int) -> tuple[float, ...]:
    return ((j + 0.5) / n,)


@dataclass(frozen=True)
class TabularMdp:
    """Finite MDP with stage-indexed kernels.

    transitions[t, s, a] is the distribution of s_{t+1}; reward_means[t, s, a]
    the conditional mean reward; realized rewards add uniform noise of the
    given half width.
    """

    horizon: int
    transitions: np.ndarray     # (T, S, A, S)
    reward_means: np.ndarray    # (T, S, A)
    init_dist: np.ndarray       # (S,)
    reward_noise: float = 0.0
    reward_bound: float = 1.0
    name: str = "tabular-mdp"

    def __post_init__(self):
        T, S, A, S2 = self.transitions.shape
        if S != S2 or self.reward_means.shape != (T, S, A) or T != self.horizon:
            raise ValueError("inconsistent table shapes")
        if not np.allclose(self.transitions.sum(axis=3), 1.0):
            raise ValueError("transition rows must sum to 1")
        if np.abs(self.reward_means).max() + self.reward_noise > self.reward_bound:
            raise ValueError("reward mean plus noise exceeds the reward bound")

    @property
    def n_states(self) -> int:
        return self.transitions.shape[1]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[2]


class TabularEnv(Environment):
    def __init__(self, mdp: TabularMdp):
        self.mdp = mdp
        self.name = mdp.name
        S, A, T = mdp.n_states, mdp.n_actions, mdp.horizon
        acts = tuple(action_point(j, A) for j in range(A))
        self.problem = ProblemSpec(
            horizon=T,
            state_dims=(1,) * (T + 1),
            action_dims=(1,) * T,
            action_sets=(acts,) * T,
            reward_bound=mdp.reward_bound,
            mu=float(A),
        )
        self._cum = np.cumsum(mdp.transitions, axis=3)
        self._init_cum = np.cumsum(mdp.init_dist)

    def state_index(self, state) -> int:
        return int(round(state[0] * self.mdp.n_states - 0.5))

    def reset(self, stream):
        s = int(np.searchsorted(self._init_cum, stream.random(), side="right"))
        return state_point(s, self.mdp.n_states)

    def step(self, t, state, action, stream):
        s = self.state_index(state)
        u = stream.random()
        s_next = int(np.searchsorted(self._cum[t - 1, s, action], u, side="right"))
        s_next = min(s_next, self.mdp.n_states - 1)
        r = float(self.mdp.reward_means[t - 1, s, action])
        if self.mdp.reward_noise:
            r += float(stream.uniform(-self.mdp.reward_noise, self.mdp.reward_noise))
        return state_point(s_next, self.mdp.n_states), r, {}


def rollout_batch_tabular(
    mdp: TabularMdp, action_table: np.ndarray | None, n: int, stream: np.random.Generator
):
    """Vectorized episodes under a per-stage action table ((T, S) ints) or,
    when action_table is None, uniform random actions.

    Returns (states (n, T+1), actions (n, T), rewards (n, T)) as int/float
    arrays.  Rewards include the configured noise.
    """
    T, S, A = mdp.horizon, mdp.n_states, mdp.n_actions
    cum = np.cumsum(mdp.transitions, axis=3)
    states = np.empty((n, T + 1), dtype=int)
    actions = np.empty((n, T), dtype=int)
    rewards = np.empty((n, T))
    states[:, 0] = np.searchsorted(np.cumsum(mdp.init_dist), stream.random(n), side="right")
    for t in range(T):
        s = states[:, t]
        if action_table is None:
            a = stream.integers(0, A, size=n)
        else:
            a = action_table[t, s]
        u = stream.random(n)
        rows = cum[t, s, a]                      # (n, S)
        nxt = (rows < u[:, None]).sum(axis=1)
        states[:, t + 1] = np.minimum(nxt, S - 1)
        r = mdp.reward_means[t, s, a]
        if mdp.reward_noise:
            r = r + stream.uniform(-mdp.reward_noise, mdp.reward_noise, size=n)
        actions[:, t] = a
        rewards[:, t] = r
    return states, actions, rewards


def benchmark_mdp() -> TabularMdp:
    """The fixed 4-state, 3-action, 3-stage benchmark with comfortable
    action margins in Q*, used by the oracle-equivalence and regret checks."""
    S, A, T = 4, 3, 3
    base = np.array(
        [
            [0.40, 0.10, -0.20],
            [-0.10, 0.30, 0.05],
            [0.20, -0.30, 0.45],
            [-0.40, 0.08, 0.35],
        ]
    )
    reward_means = np.stack([base + 0.05 * t for t in range(T)])
    transitions = np.zeros((T, S, A, S))
    for t in range(T):
        for s in range(S):
            for a in range(A):
                row = np.full(S, 0.1)
                row[(s + a + t) % S] += 0.6
                transitions[t, s, a] = row / row.sum()
    init = np.full(S, 0.25)
    return TabularMdp(
        horizon=T,
        transitions=transitions,
        reward_means=reward_means,
        init_dist=init,
        reward_noise=0.1,
        reward_bound=1.0,
        name="benchmark-mdp",
    )


@dataclass(frozen=True)
class PiecewiseMdp:
    """Mean reward per (stage, action) given by a piecewise-constant spec of
    the state; transitions draw the next state uniformly from a designated
    cube family per (current cube, action), or uniformly on the whole box."""

    horizon: int
    reward_specs: tuple[tuple[PiecewiseConstantSpec, ...], ...]  # [stage][action]
    reward_noise: float = 0.0
    target_cubes: dict | None = None   # (stage, cube, action) -> tuple of cube indices
    name: str = "piecewise-mdp"

    @property
    def dim(self) -> int:
        return self.reward_specs[0][0].partition.dim

    @property
    def n_actions(self) -> int:
        return len(self.reward_specs[0])

    @property
    def reward_bound(self) -> float:
        return max(sp.bound for stage in self.reward_specs for sp in stage) + self.reward_noise


class PiecewiseEnv(Environment):
    def __init__(self, mdp: PiecewiseMdp):
        self.mdp = mdp
        self.name = mdp.name
        T, A, d = mdp.horizon, mdp.n_actions, mdp.dim
        acts = tuple(action_point(j, A) for j in range(A))
        self.problem = ProblemSpec(
            horizon=T,
            state_dims=(d,) * (T + 1),
            action_dims=(1,) * T,
            action_sets=(acts,) * T,
            reward_bound=mdp.reward_bound,
            mu=float(A),
        )

    def reset(self, stream):
        return tuple(float(c) for c in stream.uniform(0.0, 1.0, size=self.mdp.dim))

    def step(self, t, state, action, stream):
        spec = self.mdp.reward_specs[t - 1][action]
        r = float(spec.evaluate(np.array([state]))[0])
        if self.mdp.reward_noise:
            r += float(stream.uniform(-self.mdp.reward_noise, self.mdp.reward_noise))
        part = spec.partition
        if self.mdp.target_cubes is not None:
            cube = int(part.cube_of(np.array([state]))[0])
            family = self.mdp.target_cubes.get((t, cube, action))
            if family:
                target = family[int(stream.integers(0, len(family)))]
                lo, hi = part.bounds(target)
                nxt = tuple(float(c) for c in stream.uniform(lo, hi))
                return nxt, r, {}
        nxt = tuple(float(c) for c in stream.uniform(0.0, 1.0, size=self.mdp.dim))
        return nxt, r, {}
