"""Learning algorithms: batch fitted-Q iteration over pluggable hypothesis
spaces, online DQN with replay and a target network, exact dynamic
programming on tabular problems, Monte Carlo policy evaluation, and the
regret identity check.

Fitted-Q solves the horizon's least-squares problems backward in time; the
stage-t regression target is the realized reward plus the best next-stage
fitted value.  Every fitted Q-function is hard-bounded by the hypothesis
space's clamp (normally twice the reward bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Dataset, RngContract
from .envs.base import Environment, rollout
from .envs.synthetic import TabularMdp, rollout_batch_tabular, state_point
from .nets import (
    NetArchitecture,
    ReluNet,
    TrainerConfig,
    TrainingDiverged,
    forward_batch,
    gradient,
    init_net,
)

__all__ = [
    "HypothesisSpace",
    "TabularQ",
    "LinearQ",
    "NetQ",
    "ZeroQ",
    "Policy",
    "ReplayMemory",
    "DqnConfig",
    "DqnResult",
    "CurvePoint",
    "DpSolution",
    "bellman_targets",
    "fitted_q_iteration",
    "fitted_q_iteration_exact",
    "dp_solve",
    "evaluate_policy",
    "regret_identity_check",
    "RegretCheck",
    "dqn_train",
    "policy_table",
]


# ---------------------------------------------------------------------------
# Q-function representations
# ---------------------------------------------------------------------------


class ZeroQ:
    def evaluate(self, X: np.ndarray) -> np.ndarray:
        return np.zeros(len(X))


@dataclass
class TabularQ:
    """Per-cell table over 1-d state and action grids embedded in [0,1]."""

    table: np.ndarray       # (S, A)
    clamp: float

    def _indices(self, X: np.ndarray):
        S, A = self.table.shape
        s = np.clip(np.rint(X[:, 0] * S - 0.5).astype(int), 0, S - 1)
        a = np.clip(np.rint(X[:, 1] * A - 0.5).astype(int), 0, A - 1)
        return s, a

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        s, a = self._indices(np.atleast_2d(X))
        return self.table[s, a]


@dataclass
class LinearQ:
    weights: np.ndarray
    features: object        # callable (m, d) -> (m, k)
    clamp: float

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        phi = self.features(np.atleast_2d(X))
        return np.clip(phi @ self.weights, -self.clamp, self.clamp)


@dataclass
class NetQ:
    net: ReluNet

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        return forward_batch(self.net, np.atleast_2d(X))


@dataclass(frozen=True)
class HypothesisSpace:
    """One of four families, all hard-bounded by clamp in sup norm:
    tabular (per state-action cell), linear (fixed basis, least squares),
    shallow (one hidden layer), deep (two or more hidden layers, optional
    sparse mask)."""

    kind: str
    clamp: float
    n_state_cells: int = 0
    n_actions: int = 0
    features: object = None
    feature_dim: int = 0
    widths: tuple[int, ...] = ()
    mask: object = None

    def __post_init__(self):
        if self.kind not in ("tabular", "linear", "shallow", "deep"):
            raise ValueError(f"unknown hypothesis kind {self.kind!r}")
        if self.clamp <= 0:
            raise ValueError("clamp must be positive")
        if self.kind == "tabular" and (self.n_state_cells < 1 or self.n_actions < 1):
            raise ValueError("tabular space needs state and action cell counts")
        if self.kind == "linear" and (self.features is None or self.feature_dim < 1):
            raise ValueError("linear space needs a feature map and its dimension")
        if self.kind == "shallow" and len(self.widths) != 1:
            raise ValueError("shallow space has exactly one hidden layer")
        if self.kind == "deep" and len(self.widths) < 2:
            raise ValueError("deep space has at least two hidden layers")


@dataclass
class Policy:
    """Greedy policy over per-stage Q-functions; ties break to the lowest
    action index."""

    stage_qs: list
    action_sets: list[np.ndarray]

    def q_values(self, t: int, features) -> np.ndarray:
        A = self.action_sets[t - 1]
        feat = np.asarray(features, dtype=float)
        X = np.empty((len(A), feat.size + A.shape[1]))
        X[:, : feat.size] = feat
        X[:, feat.size:] = A
        return self.stage_qs[t - 1].evaluate(X)

    def act(self, t: int, features) -> int:
        return int(np.argmax(self.q_values(t, features)))


# ---------------------------------------------------------------------------
# Dataset staging and Bellman targets
# ---------------------------------------------------------------------------


def _stage_arrays(dataset: Dataset, t: int):
    """(states_t, action_feats_t, rewards_t, states_{t+1}) as arrays; t is 1-based."""
    T = dataset.problem.horizon
    if not (1 <= t <= T):
        raise IndexError(f"stage {t} out of range 1..{T}")
    s_t = np.array([tr.states[t - 1] for tr in dataset.trajectories], dtype=float)
    a_t = np.array([tr.actions[t - 1] for tr in dataset.trajectories], dtype=float)
    r_t = np.array([tr.rewards[t - 1] for tr in dataset.trajectories], dtype=float)
    s_next = np.array([tr.states[t] for tr in dataset.trajectories], dtype=float)
    return s_t, a_t, r_t, s_next


def _history_arrays(dataset: Dataset, t: int):
    s = np.hstack([np.array([tr.states[j] for tr in dataset.trajectories]) for j in range(t)])
    a = np.hstack([np.array([tr.actions[j] for tr in dataset.trajectories]) for j in range(t)])
    return s, a


def bellman_targets(dataset: Dataset, t: int, q_next, mode: str = "markov"):
    """Regression pairs for the stage-t least squares problem.

    Inputs are (s_t, a_t) rows in Markov mode or the concatenated history in
    general mode; targets are R_t plus the maximum of q_next over the
    stage-(t+1) action set (zero at the final stage, where q_next may be
    None).
    """
    T = dataset.problem.horizon
    if not (1 <= t <= T):
        raise IndexError(f"stage {t} out of range 1..{T}")
    s_t, a_t, r_t, s_next = _stage_arrays(dataset, t)
    if mode == "markov":
        X = np.hstack([s_t, a_t])
        next_state_part = s_next
    elif mode == "history":
        hs, ha = _history_arrays(dataset, t)
        X = np.hstack([hs, ha])
        next_state_part = np.hstack([hs, s_next, ha])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    y = r_t.copy()
    if t < T and q_next is not None and not isinstance(q_next, ZeroQ):
        A_next = np.array(dataset.problem.action_sets[t], dtype=float)
        m, k = len(X), len(A_next)
        rows = np.empty((m * k, next_state_part.shape[1] + A_next.shape[1]))
        rows[:, : next_state_part.shape[1]] = np.repeat(next_state_part, k, axis=0)
        rows[:, next_state_part.shape[1]:] = np.tile(A_next, (m, 1))
        vals = q_next.evaluate(rows).reshape(m, k)
        y = y + vals.max(axis=1)
    return X, y


def _fit_space(space: HypothesisSpace, X: np.ndarray, y: np.ndarray,
               trainer: TrainerConfig, stage: int):
    if space.kind == "tabular":
        if X.shape[1] != 2:
            raise ValueError("tabular space expects 1-d state and action features")
        S, A = space.n_state_cells, space.n_actions
        s = np.clip(np.rint(X[:, 0] * S - 0.5).astype(int), 0, S - 1)
        a = np.clip(np.rint(X[:, 1] * A - 0.5).astype(int), 0, A - 1)
        sums = np.zeros((S, A))
        counts = np.zeros((S, A))
        np.add.at(sums, (s, a), y)
        np.add.at(counts, (s, a), 1.0)
        with np.errstate(invalid="ignore"):
            table = np.where(counts > 0, sums / np.maximum(counts, 1.0), 0.0)
        table = np.clip(table, -space.clamp, space.clamp)
        q = TabularQ(table, space.clamp)
        loss = float(np.mean((q.evaluate(X) - y) ** 2))
        return q, loss
    if space.kind == "linear":
        phi = space.features(X)
        w, *_ = np.linalg.lstsq(phi, y, rcond=None)
        q = LinearQ(w, space.features, space.clamp)
        loss = float(np.mean((q.evaluate(X) - y) ** 2))
        return q, loss
    # shallow / deep nets
    from .nets import train as net_train

    arch = NetArchitecture(widths=(X.shape[1],) + tuple(space.widths),
                           clamp=space.clamp, mask=space.mask)
    net0 = init_net(arch, trainer.rng.stream(f"fitq-init-{stage}", trainer.index))
    cfg = replace(trainer, label=f"fitq-train-{stage}")
    net, trace = net_train(net0, X, y, cfg)
    loss = trace[-1] if trace else float("nan")
    q = NetQ(net)
    loss = float(np.mean((q.evaluate(X) - y) ** 2))
    return q, loss


@dataclass
class FittedQResult:
    policy: Policy
    stage_qs: list
    stage_losses: list[float]


def fitted_q_iteration(
    dataset: Dataset,
    spaces: list[HypothesisSpace],
    trainer: TrainerConfig | None = None,
    mode: str = "markov",
) -> FittedQResult:
    """Backward recursion: fit stage T down to stage 1, each stage minimizing
    the empirical squared loss of its Bellman targets over its space."""
    T = dataset.problem.horizon
    if len(dataset.trajectories) == 0:
        raise ValueError("empty dataset")
    if len(spaces) != T:
        raise ValueError("need one hypothesis space per stage")
    trainer = trainer or TrainerConfig()
    stage_qs: list = [None] * T
    losses = [0.0] * T
    q_next = None
    for t in range(T, 0, -1):
        X, y = bellman_targets(dataset, t, q_next, mode=mode)
        try:
            q, loss = _fit_space(spaces[t - 1], X, y, trainer, t)
        except TrainingDiverged as exc:
            raise TrainingDiverged(f"stage {t}: {exc}") from exc
        stage_qs[t - 1] = q
        losses[t - 1] = loss
        q_next = q
    action_sets = [np.array(a, dtype=float) for a in dataset.problem.action_sets]
    return FittedQResult(Policy(stage_qs, action_sets), stage_qs, losses)


# ---------------------------------------------------------------------------
# Exact dynamic programming
# ---------------------------------------------------------------------------


@dataclass
class DpSolution:
    q: np.ndarray        # (T, S, A)
    v: np.ndarray        # (T+1, S); v[T] = 0
    policy: np.ndarray   # (T, S) greedy actions
    value: float         # expected optimal value under the initial distribution


def dp_solve(mdp: TabularMdp) -> DpSolution:
    """Backward induction with exact conditional expectations."""
    T, S, A = mdp.horizon, mdp.n_states, mdp.n_actions
    q = np.zeros((T, S, A))
    v = np.zeros((T + 1, S))
    pol = np.zeros((T, S), dtype=int)
    for t in range(T - 1, -1, -1):
        q[t] = mdp.reward_means[t] + mdp.transitions[t] @ v[t + 1]
        v[t] = q[t].max(axis=1)
        pol[t] = q[t].argmax(axis=1)
    return DpSolution(q, v, pol, float(mdp.init_dist @ v[0]))


def fitted_q_iteration_exact(mdp: TabularMdp, clamp: float | None = None) -> list[TabularQ]:
    """Fitted-Q in the full-information limit: the stage regressions use
    exact conditional means instead of samples, evaluated through the same
    tabular Q machinery.  With a non-binding clamp this equals dp_solve."""
    T, S, A = mdp.horizon, mdp.n_states, mdp.n_actions
    clamp = clamp if clamp is not None else 2.0 * mdp.reward_bound
    acts = np.array([[(j + 0.5) / A] for j in range(A)])
    states = np.array([[(i + 0.5) / S] for i in range(S)])
    stage_qs: list[TabularQ] = [None] * T  # type: ignore[list-item]
    next_best = np.zeros(S)
    for t in range(T - 1, -1, -1):
        table = mdp.reward_means[t] + mdp.transitions[t] @ next_best
        table = np.clip(table, -clamp, clamp)
        q = TabularQ(table, clamp)
        stage_qs[t] = q
        rows = np.hstack([np.repeat(states, A, axis=0), np.tile(acts, (S, 1))])
        next_best = q.evaluate(rows).reshape(S, A).max(axis=1)
    return stage_qs


def policy_table(policy_like, mdp: TabularMdp) -> np.ndarray | None:
    """Normalize a policy to a (T, S) action table; None means uniform."""
    if policy_like is None or (isinstance(policy_like, str) and policy_like == "uniform"):
        return None
    if isinstance(policy_like, np.ndarray):
        return policy_like.astype(int)
    table = np.zeros((mdp.horizon, mdp.n_states), dtype=int)
    for t in range(1, mdp.horizon + 1):
        for s in range(mdp.n_states):
            if callable(policy_like) and not hasattr(policy_like, "act"):
                table[t - 1, s] = policy_like(t, s)
            else:
                table[t - 1, s] = policy_like.act(t, state_point(s, mdp.n_states))
    return table


# ---------------------------------------------------------------------------
# Monte Carlo evaluation and the regret identity
# ---------------------------------------------------------------------------


class _GreedyBehavior:
    def __init__(self, policy):
        self.policy = policy
        self.ident = "greedy"

    def act(self, t, features, n_actions, stream):
        return int(self.policy.act(t, features))


def evaluate_policy(env: Environment, policy, n_rollouts: int, seed: int):
    """Monte Carlo estimate of the policy value from the environment's
    initial distribution: (mean cumulative reward, standard error).
    Deterministic given the seed; rollout i uses derived stream i."""
    if n_rollouts < 1:
        raise ValueError("n_rollouts must be >= 1")
    rng = RngContract(seed)
    behavior = _GreedyBehavior(policy)
    returns = np.empty(n_rollouts)
    for i in range(n_rollouts):
        stream = rng.stream("eval-rollout", i)
        _, _, rewards, _ = rollout(env, behavior, stream)
        returns[i] = sum(rewards)
    se = float(returns.std(ddof=1) / math.sqrt(n_rollouts)) if n_rollouts > 1 else 0.0
    return float(returns.mean()), se


@dataclass
class RegretCheck:
    lhs: float
    rhs: float
    stderr: float
    ok: bool


def regret_identity_check(mdp: TabularMdp, policy_like, n_rollouts: int, seed: int) -> RegretCheck:
    """Checks that the optimality gap equals the expected sum of optimal
    advantage temporal differences along the policy.

    lhs: exact optimal value minus a Monte Carlo estimate of the policy
    value; rhs: an independent Monte Carlo estimate of the summed
    differences max_a Q*_t(S_t, a) - Q*_t(S_t, A_t).  The flag accepts when
    the two sides agree within 3 combined standard errors.
    """
    rng = RngContract(seed)
    sol = dp_solve(mdp)
    table = policy_table(policy_like, mdp)

    states, actions, rewards = rollout_batch_tabular(mdp, table, n_rollouts, rng.stream("regret-lhs"))
    returns = rewards.sum(axis=1)
    v_pi = returns.mean()
    se_a = returns.std(ddof=1) / math.sqrt(n_rollouts)
    lhs = sol.value - float(v_pi)

    states, actions, _ = rollout_batch_tabular(mdp, table, n_rollouts, rng.stream("regret-rhs"))
    td = np.zeros(n_rollouts)
    for t in range(mdp.horizon):
        s = states[:, t]
        a = actions[:, t]
        td += sol.v[t, s] - sol.q[t, s, a]
    rhs = float(td.mean())
    se_b = td.std(ddof=1) / math.sqrt(n_rollouts)
    se = float(math.sqrt(se_a**2 + se_b**2))
    # the 1e-9 floor absorbs float accumulation noise on deterministic
    # problems, where both standard errors are exactly zero
    ok = abs(lhs - rhs) <= 3.0 * se + 1e-9
    return RegretCheck(lhs, rhs, se, ok)


# ---------------------------------------------------------------------------
# Online DQN with replay and target network
# ---------------------------------------------------------------------------


class ReplayMemory:
    """Bounded transition store with two sampling disciplines:
    with_replacement keeps items (ring eviction on overflow);
    without_replacement removes every sampled item."""

    def __init__(self, capacity: int, discipline: str = "with_replacement"):
        if discipline not in ("with_replacement", "without_replacement"):
            raise ValueError(f"unknown sampling discipline {discipline!r}")
        self.capacity = capacity
        self.discipline = discipline
        self.items: list = []
        self._pos = 0

    def __len__(self) -> int:
        return len(self.items)

    def push(self, item) -> None:
        if len(self.items) < self.capacity:
            self.items.append(item)
        else:
            self.items[self._pos] = item
            self._pos = (self._pos + 1) % self.capacity

    def sample(self, k: int, stream: np.random.Generator):
        n = len(self.items)
        if self.discipline == "with_replacement":
            idx = stream.integers(0, n, size=k)
            return [self.items[i] for i in idx]
        if n < k:
            return None
        # Floyd's k distinct indices, then swap-pop removal
        chosen: set[int] = set()
        for j in range(n - k, n):
            t = int(stream.integers(0, j + 1))
            chosen.add(j if t in chosen else t)
        out = [self.items[i] for i in chosen]
        for i in sorted(chosen, reverse=True):
            last = self.items.pop()
            if i < len(self.items):
                self.items[i] = last
        self._pos = min(self._pos, len(self.items))
        return out


@dataclass(frozen=True)
class DqnConfig:
    iterations: int = 20000
    minibatch: int = 16
    minibatches_per_iteration: int = 1
    warmup_iterations: int = 500
    replay_capacity: int = 20000
    target_update: int = 100
    gamma: float = 1.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_anneal_frac: float = 0.5
    sampling: str = "with_replacement"
    learning_rate: float = 0.05
    momentum: float = 0.0
    grad_clip: float | None = 5.0
    eval_every: int = 1000
    eval_episodes: int = 8
    rng: RngContract = field(default_factory=lambda: RngContract(0))
    seed_index: int = 0

    def epsilon(self, it: int) -> float:
        horizon = max(1.0, self.epsilon_anneal_frac * self.iterations)
        frac = min(1.0, it / horizon)
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)


@dataclass
class CurvePoint:
    iteration: int
    samples_consumed: int
    train_loss: float
    eval_score: float
    eval_stderr: float
    seed: int


@dataclass
class DqnResult:
    policy: Policy
    net: ReluNet
    curve: list[CurvePoint]


def _greedy_action(net: ReluNet, feat, A_feat: np.ndarray, X_buf: np.ndarray, d_s: int) -> int:
    X_buf[:, :d_s] = feat
    return int(np.argmax(forward_batch(net, X_buf)))


def _dqn_eval(env: Environment, net: ReluNet, A_feat, X_buf, d_s, cfg: DqnConfig):
    scores = np.empty(cfg.eval_episodes)
    T = env.problem.horizon
    for ep in range(cfg.eval_episodes):
        stream = cfg.rng.stream("dqn-eval", cfg.seed_index * 100003 + ep)
        state = env.reset(stream)
        rewards = []
        infos = []
        for t in range(1, T + 1):
            feat = env.featurize(t, state)
            a = _greedy_action(net, feat, A_feat, X_buf, d_s)
            state, r, info = env.step(t, state, a, stream)
            rewards.append(r)
            infos.append(info)
        scores[ep] = env.episode_score(rewards, infos)
    se = float(scores.std(ddof=1) / math.sqrt(len(scores))) if len(scores) > 1 else 0.0
    return float(scores.mean()), se


def dqn_train(env: Environment, widths: tuple[int, ...], cfg: DqnConfig) -> DqnResult:
    """Episode-structured DQN.

    One iteration interacts a full episode with epsilon-greedy exploration,
    then (after the warmup) consumes minibatches against a periodically
    frozen target copy, realizing the incremental update
    Q(s,a) <- alpha [r + gamma max Q_frozen(s',a')] + (1-alpha) Q(s,a)
    as an SGD step on squared error.  gamma = 0 trains the myopic variant.
    Deterministic given the config's seed contract; the evaluation episodes
    reuse fixed streams so curve points are comparable across iterations.
    """
    spec = env.problem
    T = spec.horizon
    A_feat = env.action_features(1)
    for t in range(2, T + 1):
        if not np.array_equal(env.action_features(t), A_feat):
            raise ValueError("dqn_train expects a stage-constant action set")
    d_s = spec.state_dims[0]
    d_a = A_feat.shape[1]
    arch = NetArchitecture(widths=(d_s + d_a,) + tuple(widths), clamp=2.0 * spec.reward_bound)
    net = init_net(arch, cfg.rng.stream("dqn-init", cfg.seed_index))
    W = [w.copy() for w in net.weights]
    b = [v.copy() for v in net.biases]
    a_out = net.output.copy()
    target = ReluNet(arch, tuple(w.copy() for w in W), tuple(v.copy() for v in b), a_out.copy())
    vel = ([np.zeros_like(w) for w in W], [np.zeros_like(v) for v in b], np.zeros_like(a_out))

    env_stream = cfg.rng.stream("dqn-env", cfg.seed_index)
    replay_stream = cfg.rng.stream("dqn-replay", cfg.seed_index)
    replay = ReplayMemory(cfg.replay_capacity, cfg.sampling)
    X_act = np.empty((len(A_feat), d_s + d_a))
    X_act[:, d_s:] = A_feat

    consumed = 0
    curve: list[CurvePoint] = []
    recent_losses: list[float] = []
    mb = cfg.minibatch

    for it in range(1, cfg.iterations + 1):
        cur = ReluNet(arch, tuple(W), tuple(b), a_out)
        eps = cfg.epsilon(it)
        state = env.reset(env_stream)
        feat = env.featurize(1, state)
        for t in range(1, T + 1):
            if env_stream.random() < eps:
                act = int(env_stream.integers(0, len(A_feat)))
            else:
                act = _greedy_action(cur, feat, A_feat, X_act, d_s)
            state, r, _ = env.step(t, state, act, env_stream)
            if not np.isfinite(r) or abs(r) > spec.reward_bound:
                raise TrainingDiverged(f"reward {r} violates the bound at stage {t}")
            nxt_feat = env.featurize(t + 1, state)
            replay.push((feat, act, r, nxt_feat, t))
            feat = nxt_feat

        if it > cfg.warmup_iterations:
            for _ in range(cfg.minibatches_per_iteration):
                batch = replay.sample(mb, replay_stream)
                if batch is None:
                    continue
                consumed += len(batch)
                Xb = np.empty((len(batch), d_s + d_a))
                yb = np.empty(len(batch))
                boot_rows = []
                boot_pos = []
                for i, (f, act, r, nf, t) in enumerate(batch):
                    Xb[i, :d_s] = f
                    Xb[i, d_s:] = A_feat[act]
                    yb[i] = r
                    if t < T and cfg.gamma != 0.0:
                        boot_pos.append(i)
                        boot_rows.append(nf)
                if boot_pos:
                    k = len(A_feat)
                    rows = np.empty((len(boot_pos) * k, d_s + d_a))
                    rows[:, :d_s] = np.repeat(np.array(boot_rows), k, axis=0)
                    rows[:, d_s:] = np.tile(A_feat, (len(boot_pos), 1))
                    best = forward_batch(target, rows).reshape(len(boot_pos), k).max(axis=1)
                    yb[boot_pos] += cfg.gamma * best
                cur = ReluNet(arch, tuple(W), tuple(b), a_out)
                g = gradient(cur, Xb, yb)
                if not np.isfinite(g.loss):
                    raise TrainingDiverged(f"non-finite training loss at iteration {it}")
                recent_losses.append(g.loss)
                if cfg.grad_clip is not None:
                    nrm = g.norm()
                    if nrm > cfg.grad_clip:
                        g.scale(cfg.grad_clip / nrm)
                vW, vb_, va = vel
                for k_ in range(len(W)):
                    vW[k_] = cfg.momentum * vW[k_] + g.d_weights[k_]
                    vb_[k_] = cfg.momentum * vb_[k_] + g.d_biases[k_]
                    W[k_] -= cfg.learning_rate * vW[k_]
                    b[k_] -= cfg.learning_rate * vb_[k_]
                va[...] = cfg.momentum * va + g.d_output
                a_out -= cfg.learning_rate * va

        if it % cfg.target_update == 0:
            target = ReluNet(arch, tuple(w.copy() for w in W), tuple(v.copy() for v in b), a_out.copy())

        if it % cfg.eval_every == 0 or it == cfg.iterations:
            cur = ReluNet(arch, tuple(W), tuple(b), a_out)
            score, se = _dqn_eval(env, cur, A_feat, X_act, d_s, cfg)
            loss = float(np.mean(recent_losses)) if recent_losses else float("nan")
            curve.append(CurvePoint(it, consumed, loss, score, se, cfg.seed_index))
            recent_losses = []

    final = ReluNet(arch, tuple(w.copy() for w in W), tuple(v.copy() for v in b), a_out.copy())
    action_sets = [A_feat] * T
    policy = Policy([NetQ(final)] * T, action_sets)
    return DqnResult(policy=policy, net=final, curve=curve)
