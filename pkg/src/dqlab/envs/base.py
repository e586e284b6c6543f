"""Environment interface and offline dataset generation.

An environment realizes the per-stage transition densities and rewards
behind one ProblemSpec.  Internal states may be arbitrary objects; the
featurize hook maps them to the unit-box vectors the descriptor declares,
which is what policies consume and what datasets record.  Rewards must
respect the descriptor's bound; violations are a hard error, never a clamp,
since they indicate a misconfigured environment.
"""

from __future__ import annotations

import numpy as np

from ..core import Dataset, ProblemSpec, Provenance, RngContract, Trajectory

__all__ = [
    "Environment",
    "RewardBoundExceeded",
    "UniformBehavior",
    "EpsGreedyBehavior",
    "rollout",
    "generate_dataset",
]


class RewardBoundExceeded(RuntimeError):
    pass


class Environment:
    """Base class; subclasses fill in problem, reset, and step.

    step is a pure function of (stage, state, action index, stream draw);
    independent instances may run concurrently.
    """

    name: str = "env"
    problem: ProblemSpec

    def reset(self, stream: np.random.Generator):
        raise NotImplementedError

    def step(self, t: int, state, action: int, stream: np.random.Generator):
        """One transition at stage t (1-based). Returns (next state, reward, info)."""
        raise NotImplementedError

    def featurize(self, t: int, state) -> tuple[float, ...]:
        """Unit-box feature vector of an internal state at stage t (1..T+1).
        The default assumes states already are feature tuples."""
        return state

    def episode_score(self, rewards: list[float], infos: list[dict]) -> float:
        """Evaluation metric for one episode; defaults to the return."""
        return float(sum(rewards))

    def action_features(self, t: int) -> np.ndarray:
        """The stage-t action set as an array of feature points."""
        return np.array(self.problem.action_sets[t - 1], dtype=float)


class UniformBehavior:
    """Uniform draws over the finite action set; satisfies the
    minimum-selection-probability assumption with mu = max_t |A_t|."""

    ident = "uniform"

    def act(self, t: int, features, n_actions: int, stream: np.random.Generator) -> int:
        return int(stream.integers(0, n_actions))


class EpsGreedyBehavior:
    """Follows a policy, exploring uniformly with probability eps."""

    def __init__(self, policy, eps: float):
        self.policy = policy
        self.eps = eps
        self.ident = f"eps-greedy({eps})"

    def act(self, t: int, features, n_actions: int, stream: np.random.Generator) -> int:
        if self.eps > 0 and stream.random() < self.eps:
            return int(stream.integers(0, n_actions))
        return int(self.policy.act(t, features))


def rollout(env: Environment, behavior, stream: np.random.Generator):
    """One full-horizon episode.

    Returns (feature states, action indices, rewards, infos); feature states
    has T+1 entries including the terminal state.
    """
    spec = env.problem
    state = env.reset(stream)
    feats = [env.featurize(1, state)]
    actions: list[int] = []
    rewards: list[float] = []
    infos: list[dict] = []
    for t in range(1, spec.horizon + 1):
        a = behavior.act(t, feats[-1], len(spec.action_sets[t - 1]), stream)
        state, r, info = env.step(t, state, a, stream)
        if not np.isfinite(r) or abs(r) > spec.reward_bound:
            raise RewardBoundExceeded(
                f"reward {r} exceeds bound {spec.reward_bound} at stage {t} of {env.name}"
            )
        feats.append(env.featurize(t + 1, state))
        actions.append(a)
        rewards.append(float(r))
        infos.append(info)
    return feats, actions, rewards, infos


def generate_dataset(env: Environment, behavior, m: int, seed: int) -> Dataset:
    """m independent full-horizon trajectories, one derived stream each."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = RngContract(seed)
    spec = env.problem
    trajectories = []
    for i in range(m):
        stream = rng.stream("rollout", i)
        feats, actions, rewards, _ = rollout(env, behavior, stream)
        trajectories.append(
            Trajectory(
                states=tuple(tuple(float(c) for c in s) for s in feats),
                actions=tuple(spec.action_sets[t][a] for t, a in enumerate(actions)),
                rewards=tuple(rewards),
            )
        )
    ident = behavior.ident if hasattr(behavior, "ident") else str(behavior)
    return Dataset(
        problem=spec,
        trajectories=tuple(trajectories),
        provenance=Provenance(environment=env.name, behavior=ident, seed=seed),
    )
