"""Minimal ReLU feed-forward network engine.

Architecture description with exact tunable-parameter counting, forward pass
with a hard output clamp, analytic mean-squared-error gradients, minibatch
SGD training, and exact text serialization.  Weight matrices follow the
h_k = relu(W_k h_{k-1} + b_k) convention with a scalar output a . h_L, and
the scalar output is truncated to [-M, M] so every net is a member of the
clamped hypothesis class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .core import RngContract

__all__ = [
    "NetArchitecture",
    "ReluNet",
    "TrainerConfig",
    "Gradient",
    "TrainingDiverged",
    "param_count",
    "init_net",
    "forward",
    "forward_batch",
    "gradient",
    "train",
    "net_to_json",
    "net_from_json",
    "widths_for_budget",
]


class TrainingDiverged(RuntimeError):
    """Raised when a training loss stops being finite."""


@dataclass(frozen=True)
class NetArchitecture:
    """Layer widths d_0..d_L (d_0 = input dim, L hidden layers), clamp M,
    and an optional per-layer boolean connection mask for sparse structures.

    mask[k] has shape (d_{k+1}, d_k) and marks which weight entries are
    tunable; biases and the d_L output weights are always tunable.
    """

    widths: tuple[int, ...]
    clamp: float
    mask: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        if len(self.widths) < 2:
            raise ValueError("need at least input width and one hidden width")
        if any(int(w) < 1 for w in self.widths):
            raise ValueError("all widths must be positive")
        if not (self.clamp > 0):
            raise ValueError("clamp bound must be positive")
        if self.mask is not None:
            if len(self.mask) != self.depth:
                raise ValueError("mask must have one entry per hidden layer")
            for k, m in enumerate(self.mask):
                want = (self.widths[k + 1], self.widths[k])
                if m.shape != want:
                    raise ValueError(f"mask shape {m.shape} != {want} at layer {k + 1}")

    @property
    def depth(self) -> int:
        return len(self.widths) - 1

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    @property
    def max_width(self) -> int:
        return max(self.widths)


def param_count(arch: NetArchitecture) -> int:
    """Exact number of tunable parameters.

    Dense: sum_j (d_j d_{j+1} + d_{j+1}) + d_L.  Masked: unmasked weight
    entries plus all biases plus the d_L output weights.
    """
    widths = arch.widths
    total = 0
    for k in range(arch.depth):
        if arch.mask is None:
            total += widths[k] * widths[k + 1]
        else:
            total += int(arch.mask[k].sum())
        total += widths[k + 1]  # biases
    total += widths[-1]  # output weights
    return total


@dataclass(frozen=True)
class ReluNet:
    architecture: NetArchitecture
    weights: tuple[np.ndarray, ...]   # W_k, shape (d_k, d_{k-1})
    biases: tuple[np.ndarray, ...]    # b_k, shape (d_k,)
    output: np.ndarray                # a, shape (d_L,)

    def __call__(self, x) -> float:
        return forward(self, x)


def init_net(arch: NetArchitecture, stream: np.random.Generator) -> ReluNet:
    """Scale-balanced uniform init: W ~ U(+-sqrt(6/(fan_in+fan_out))).

    Biases start at a small positive constant so units stay alive on
    unit-box inputs."""
    weights = []
    biases = []
    for k in range(arch.depth):
        d_in, d_out = arch.widths[k], arch.widths[k + 1]
        bound = np.sqrt(6.0 / (d_in + d_out))
        W = stream.uniform(-bound, bound, size=(d_out, d_in))
        if arch.mask is not None:
            W = W * arch.mask[k]
        weights.append(W)
        biases.append(np.full(d_out, 0.1))
    # zero output weights: predictions start at 0 and each unit's output
    # sign is free to grow toward the target, avoiding dead-unit traps
    a = np.zeros(arch.widths[-1])
    return ReluNet(arch, tuple(weights), tuple(biases), a)


def forward(net: ReluNet, x) -> float:
    """Scalar output for one input vector, clamped to [-M, M]."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.architecture.input_dim,):
        raise ValueError(f"input dim {x.shape} != ({net.architecture.input_dim},)")
    h = x
    for W, b in zip(net.weights, net.biases):
        h = np.maximum(W @ h + b, 0.0)
    M = net.architecture.clamp
    return float(np.clip(net.output @ h, -M, M))


def forward_batch(net: ReluNet, X: np.ndarray) -> np.ndarray:
    """Clamped outputs for a batch of inputs, shape (n, d_0) -> (n,)."""
    H = np.asarray(X, dtype=float)
    if H.ndim != 2 or H.shape[1] != net.architecture.input_dim:
        raise ValueError(f"batch shape {H.shape} incompatible with d_0={net.architecture.input_dim}")
    for W, b in zip(net.weights, net.biases):
        H = np.maximum(H @ W.T + b, 0.0)
    M = net.architecture.clamp
    return np.clip(H @ net.output, -M, M)


@dataclass
class Gradient:
    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]
    d_output: np.ndarray
    loss: float

    def norm(self) -> float:
        sq = float(self.d_output @ self.d_output)
        for dW, db in zip(self.d_weights, self.d_biases):
            sq += float((dW * dW).sum() + db @ db)
        return np.sqrt(sq)

    def scale(self, c: float) -> None:
        for dW in self.d_weights:
            dW *= c
        for db in self.d_biases:
            db *= c
        self.d_output *= c


def gradient(net: ReluNet, X: np.ndarray, y: np.ndarray) -> Gradient:
    """Gradient of mean squared error over the batch.

    At ReLU kinks and at clamp saturation the flat-side subgradient 0 is
    used: relu passes gradient only where the pre-activation is > 0, the
    clamp only where the raw output is strictly inside (-M, M).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(X) == 0:
        raise ValueError("empty batch")
    acts = [X]
    H = X
    for W, b in zip(net.weights, net.biases):
        H = np.maximum(H @ W.T + b, 0.0)
        acts.append(H)
    raw = acts[-1] @ net.output
    M = net.architecture.clamp
    out = np.clip(raw, -M, M)
    resid = out - y
    loss = float(resid @ resid) / len(X)

    # d loss / d raw output, zero where the clamp saturates
    g = (2.0 / len(X)) * resid * (np.abs(raw) < M)
    d_output = acts[-1].T @ g
    delta = np.outer(g, net.output)
    d_weights: list[np.ndarray] = [None] * len(net.weights)  # type: ignore[list-item]
    d_biases: list[np.ndarray] = [None] * len(net.biases)  # type: ignore[list-item]
    for k in range(len(net.weights) - 1, -1, -1):
        delta = delta * (acts[k + 1] > 0)
        d_weights[k] = delta.T @ acts[k]
        d_biases[k] = delta.sum(axis=0)
        if k > 0:
            delta = delta @ net.weights[k]
    if net.architecture.mask is not None:
        for k, m in enumerate(net.architecture.mask):
            d_weights[k] = d_weights[k] * m
    return Gradient(d_weights, d_biases, d_output, loss)


@dataclass(frozen=True)
class TrainerConfig:
    """Knobs for minibatch SGD.

    schedule: "constant" keeps the step size fixed; "inv_sqrt" uses
    learning_rate / sqrt(1 + iter / decay_iters).
    """

    learning_rate: float = 0.05
    iterations: int = 1000
    minibatch: int = 16
    momentum: float = 0.0
    grad_clip: float | None = None
    schedule: str = "constant"
    decay_iters: int = 1000
    snapshot_every: int | None = None
    rng: RngContract = field(default_factory=lambda: RngContract(0))
    label: str = "train"
    index: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.iterations < 0:
            raise ValueError("iteration budget must be >= 0")
        if self.schedule not in ("constant", "inv_sqrt"):
            raise ValueError(f"unknown schedule {self.schedule!r}")

    def step_size(self, it: int) -> float:
        if self.schedule == "constant":
            return self.learning_rate
        return self.learning_rate / np.sqrt(1.0 + it / self.decay_iters)


def _full_loss(net: ReluNet, X: np.ndarray, y: np.ndarray) -> float:
    r = forward_batch(net, X) - y
    return float(r @ r) / len(X)


def _params_of(net: ReluNet):
    return ([W.copy() for W in net.weights], [b.copy() for b in net.biases], net.output.copy())


def train(net: ReluNet, X: np.ndarray, y: np.ndarray, cfg: TrainerConfig) -> tuple[ReluNet, list[float]]:
    """Minibatch SGD on mean squared error.

    Deterministic given the config's seed contract.  Keeps the best iterate
    on full empirical loss (checked at snapshot points), so the returned
    net's loss never exceeds the starting net's.  Returns (net, loss trace)
    with one minibatch-loss entry per iteration.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(X) == 0:
        raise ValueError("empty training data")
    if cfg.iterations == 0:
        return net, []

    stream = cfg.rng.stream(cfg.label, cfg.index)
    W = [w.copy() for w in net.weights]
    b = [v.copy() for v in net.biases]
    a = net.output.copy()
    vel = None
    if cfg.momentum:
        vel = ([np.zeros_like(w) for w in W], [np.zeros_like(v) for v in b], np.zeros_like(a))

    snap_every = cfg.snapshot_every or max(1, cfg.iterations // 20)
    best_loss = _full_loss(net, X, y)
    best = _params_of(net)
    trace: list[float] = []
    m = len(X)
    batch = min(cfg.minibatch, m)

    for it in range(cfg.iterations):
        idx = stream.integers(0, m, size=batch) if batch < m else np.arange(m)
        cur = ReluNet(net.architecture, tuple(W), tuple(b), a)
        g = gradient(cur, X[idx], y[idx])
        if not np.isfinite(g.loss):
            raise TrainingDiverged(f"non-finite minibatch loss at iteration {it}")
        trace.append(g.loss)
        if cfg.grad_clip is not None:
            nrm = g.norm()
            if nrm > cfg.grad_clip:
                g.scale(cfg.grad_clip / nrm)
        lr = cfg.step_size(it)
        if vel is None:
            for k in range(len(W)):
                W[k] -= lr * g.d_weights[k]
                b[k] -= lr * g.d_biases[k]
            a -= lr * g.d_output
        else:
            vW, vb, va = vel
            for k in range(len(W)):
                vW[k] = cfg.momentum * vW[k] + g.d_weights[k]
                vb[k] = cfg.momentum * vb[k] + g.d_biases[k]
                W[k] -= lr * vW[k]
                b[k] -= lr * vb[k]
            va[...] = cfg.momentum * va + g.d_output
            a -= lr * va
        if (it + 1) % snap_every == 0 or it + 1 == cfg.iterations:
            cur = ReluNet(net.architecture, tuple(W), tuple(b), a)
            fl = _full_loss(cur, X, y)
            if not np.isfinite(fl):
                raise TrainingDiverged(f"non-finite empirical loss at iteration {it + 1}")
            if fl < best_loss:
                best_loss = fl
                best = _params_of(cur)

    bw, bb, ba = best
    return ReluNet(net.architecture, tuple(bw), tuple(bb), ba), trace


# ---------------------------------------------------------------------------
# Serialization: a JSON document listing architecture, mask, and parameters.
# Floats round-trip exactly through repr, so load(save(net)) is bit-identical.
# ---------------------------------------------------------------------------


def net_to_json(net: ReluNet) -> str:
    arch = net.architecture
    doc = {
        "kind": "dqlab-relunet",
        "version": 1,
        "widths": list(arch.widths),
        "clamp": arch.clamp,
        "mask": None if arch.mask is None else [m.astype(int).tolist() for m in arch.mask],
        "weights": [W.tolist() for W in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "output": net.output.tolist(),
    }
    return json.dumps(doc)


def net_from_json(text: str) -> ReluNet:
    doc = json.loads(text)
    if doc.get("kind") != "dqlab-relunet":
        raise ValueError("not a serialized net")
    mask = doc["mask"]
    arch = NetArchitecture(
        widths=tuple(doc["widths"]),
        clamp=doc["clamp"],
        mask=None if mask is None else tuple(np.array(m, dtype=bool) for m in mask),
    )
    return ReluNet(
        arch,
        tuple(np.array(W, dtype=float) for W in doc["weights"]),
        tuple(np.array(b, dtype=float) for b in doc["biases"]),
        np.array(doc["output"], dtype=float),
    )


def widths_for_budget(input_dim: int, depth: int, budget: int) -> tuple[int, ...]:
    """Hidden widths (constant across layers) whose dense parameter count is
    the largest not exceeding the budget; width 1 is the floor."""
    def count(w: int) -> int:
        widths = (input_dim,) + (w,) * depth
        return param_count(NetArchitecture(widths=widths, clamp=1.0))

    w = 1
    while count(w + 1) <= budget:
        w += 1
    return (input_dim,) + (w,) * depth
