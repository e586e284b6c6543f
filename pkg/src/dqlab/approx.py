"""Target-function classes on cubic partitions and their constructive
two-hidden-layer ReLU approximants.

A target is supported on s of the N^d axis-aligned sub-cubes of [0,1]^d and
is constant (or polynomial) on each supported cube.  The constructive
approximant sums one indicator gadget per supported cube: a first hidden
layer of four-unit trapezoid ramps per coordinate and a soft-AND second
layer.  L^p errors are measured against a midpoint-rule integration oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import RngContract
from .nets import (
    NetArchitecture,
    ReluNet,
    TrainerConfig,
    forward_batch,
    init_net,
    param_count,
    train,
    widths_for_budget,
)

__all__ = [
    "CubicPartition",
    "PiecewiseConstantSpec",
    "Polynomial",
    "PiecewiseSmoothSpec",
    "TrapezoidGadget",
    "build_indicator_net",
    "approximate_piecewise_constant",
    "construction_error_bound",
    "band_lp_bound",
    "lp_error",
    "lp_error_stable",
    "net_evaluator",
    "random_constant_spec",
    "smooth_depth",
    "empirical_rate_study",
    "RateRow",
    "RateReport",
]


@dataclass(frozen=True)
class CubicPartition:
    """The N^d sub-cubes of [0,1]^d with side 1/N, indexed lexicographically
    by multi-index (j_1..j_d) with j_1 most significant."""

    dim: int
    resolution: int

    def __post_init__(self):
        if self.dim < 1 or self.resolution < 1:
            raise ValueError("dimension and resolution must be >= 1")

    @property
    def n_cubes(self) -> int:
        return self.resolution ** self.dim

    def multi_index(self, j: int) -> tuple[int, ...]:
        if not (0 <= j < self.n_cubes):
            raise IndexError(f"cube index {j} out of range")
        digits = []
        for _ in range(self.dim):
            digits.append(j % self.resolution)
            j //= self.resolution
        return tuple(reversed(digits))

    def bounds(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        mi = np.array(self.multi_index(j), dtype=float)
        return mi / self.resolution, (mi + 1.0) / self.resolution

    def center(self, j: int) -> np.ndarray:
        lo, hi = self.bounds(j)
        return (lo + hi) / 2.0

    def cube_of(self, X: np.ndarray) -> np.ndarray:
        """Cube index per row; boundary points go to the higher cube except
        at 1.0, which belongs to the last cube."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        N = self.resolution
        digits = np.clip(np.floor(X * N).astype(int), 0, N - 1)
        idx = np.zeros(len(X), dtype=int)
        for k in range(self.dim):
            idx = idx * N + digits[:, k]
        return idx


@dataclass(frozen=True)
class PiecewiseConstantSpec:
    """A bound-C0 function constant on each of s supported cubes, zero elsewhere."""

    partition: CubicPartition
    support: tuple[int, ...]
    values: tuple[float, ...]
    bound: float

    def __post_init__(self):
        if len(self.support) != len(set(self.support)):
            raise ValueError("support indices must be distinct")
        if len(self.values) != len(self.support):
            raise ValueError("one value per supported cube")
        if len(self.support) > self.partition.n_cubes:
            raise ValueError("support larger than the partition")
        if any(abs(v) > self.bound for v in self.values):
            raise ValueError("piece value exceeds the declared bound")

    @property
    def sparsity(self) -> int:
        return len(self.support)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        lookup = np.zeros(self.partition.n_cubes)
        for j, v in zip(self.support, self.values):
            lookup[j] = v
        return lookup[self.partition.cube_of(X)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "piecewise-constant",
                "d": self.partition.dim,
                "N": self.partition.resolution,
                "support": list(self.support),
                "values": list(self.values),
                "bound": self.bound,
            }
        )

    @staticmethod
    def from_json(text: str) -> "PiecewiseConstantSpec":
        doc = json.loads(text)
        if doc.get("kind") != "piecewise-constant":
            raise ValueError("not a piecewise-constant spec")
        return PiecewiseConstantSpec(
            partition=CubicPartition(doc["d"], doc["N"]),
            support=tuple(doc["support"]),
            values=tuple(doc["values"]),
            bound=doc["bound"],
        )


def random_constant_spec(
    partition: CubicPartition, s: int, bound: float, stream: np.random.Generator
) -> PiecewiseConstantSpec:
    support = tuple(int(j) for j in stream.choice(partition.n_cubes, size=s, replace=False))
    values = tuple(float(v) for v in stream.uniform(-bound, bound, size=s))
    return PiecewiseConstantSpec(partition, support, values, bound)


# ---------------------------------------------------------------------------
# Polynomial pieces for the smooth class
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Polynomial:
    """Multivariate polynomial as (coefficient, exponent multi-index) terms."""

    terms: tuple[tuple[float, tuple[int, ...]], ...]

    def degree(self) -> int:
        return max((sum(e) for _, e in self.terms), default=0)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros(len(X))
        for c, exps in self.terms:
            term = np.full(len(X), c)
            for k, e in enumerate(exps):
                if e:
                    term = term * X[:, k] ** e
            out += term
        return out

    def partial(self, alpha: tuple[int, ...]) -> "Polynomial":
        """Exact mixed partial derivative of multi-order alpha."""
        new_terms = []
        for c, exps in self.terms:
            coeff = c
            new_exps = []
            dead = False
            for e, a in zip(exps, alpha):
                if e < a:
                    dead = True
                    break
                for i in range(a):
                    coeff *= e - i
                new_exps.append(e - a)
            if not dead and coeff != 0.0:
                new_terms.append((coeff, tuple(new_exps)))
        return Polynomial(tuple(new_terms))


def _multi_indices(dim: int, total: int) -> list[tuple[int, ...]]:
    if dim == 1:
        return [(total,)]
    out = []
    for head in range(total + 1):
        for rest in _multi_indices(dim - 1, total - head):
            out.append((head,) + rest)
    return out


def holder_ratio(
    poly: "Polynomial",
    order: int,
    exponent: float,
    lipschitz: float,
    lo: np.ndarray,
    hi: np.ndarray,
    grid: int = 5,
) -> float:
    """Worst sampled ratio |D^a f(x) - D^a f(x')| / (c0 ||x - x'||^v) over
    all order-`order` partials and grid-point pairs in the box [lo, hi].
    A value <= 1 certifies the sampled Holder condition."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dim = len(lo)
    axes = (np.arange(grid) + 0.5) / grid
    pts = np.stack(
        np.meshgrid(*[lo[k] + axes * (hi[k] - lo[k]) for k in range(dim)], indexing="ij"),
        axis=-1,
    ).reshape(-1, dim)
    worst = 0.0
    for alpha in _multi_indices(dim, order):
        vals = poly.partial(alpha).evaluate(pts)
        diff = np.abs(vals[:, None] - vals[None, :])
        dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = diff / (lipschitz * dist ** exponent)
        ratio[~np.isfinite(ratio)] = 0.0
        worst = max(worst, float(ratio.max()))
    return worst


@dataclass(frozen=True)
class PiecewiseSmoothSpec:
    """Polynomial pieces on s supported cubes with a declared (r, c0)
    Lipschitz smoothness record; r = u + v, u the shared polynomial degree
    cap, 0 < v <= 1."""

    partition: CubicPartition
    support: tuple[int, ...]
    pieces: tuple[Polynomial, ...]
    smoothness: float          # r
    lipschitz: float           # c0

    def __post_init__(self):
        if len(self.pieces) != len(self.support):
            raise ValueError("one polynomial per supported cube")
        if self.smoothness <= 0 or self.lipschitz <= 0:
            raise ValueError("smoothness and Lipschitz constant must be positive")
        u = self.degree_cap
        if any(p.degree() > u for p in self.pieces):
            raise ValueError("piece degree exceeds the smoothness degree cap")

    @property
    def degree_cap(self) -> int:
        # r = u + v with 0 < v <= 1, so u = ceil(r) - 1
        return max(int(math.ceil(self.smoothness)) - 1, 0)

    @property
    def sparsity(self) -> int:
        return len(self.support)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        idx = self.partition.cube_of(X)
        out = np.zeros(len(X))
        for j, poly in zip(self.support, self.pieces):
            sel = idx == j
            if sel.any():
                out[sel] = poly.evaluate(X[sel])
        return out

    def is_piecewise_constant(self) -> bool:
        return all(p.degree() == 0 for p in self.pieces)

    def certify_smoothness(self, grid: int = 5) -> tuple[bool, float]:
        """Sample-based check of the order-u Holder condition on each cube.

        Evaluates every order-u partial derivative on a grid inside each
        supported cube and returns (holds, worst ratio of derivative gap to
        c0 * distance^v over all sampled pairs).  With the degree cap in
        force the order-u partials are constants, so well-formed specs
        certify trivially; the check guards hand-edited spec files.
        """
        v = self.smoothness - self.degree_cap
        worst = 0.0
        for j, poly in zip(self.support, self.pieces):
            lo, hi = self.partition.bounds(j)
            worst = max(
                worst,
                holder_ratio(poly, self.degree_cap, v, self.lipschitz, lo, hi, grid),
            )
        return worst <= 1.0 + 1e-9, worst


# ---------------------------------------------------------------------------
# Constructive approximants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrapezoidGadget:
    """Four ReLU units realizing a unit plateau on [a+tau, b-tau] with
    linear ramps of width tau, zero outside [a, b]."""

    lo: float
    hi: float
    tau: float

    def __post_init__(self):
        if not (0 < self.tau < (self.hi - self.lo) / 2):
            raise ValueError("ramp width must satisfy 0 < tau < (b-a)/2")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = np.maximum
        a, b, t = self.lo, self.hi, self.tau
        return (r(x - a, 0) - r(x - a - t, 0) - r(x - b + t, 0) + r(x - b, 0)) / t


def _check_tau(tau: float, N: int) -> None:
    if not (0 < tau < 1.0 / (2 * N)):
        raise ValueError(f"ramp width must satisfy 0 < tau < 1/(2N) = {1.0 / (2 * N)}")


# Slack subtracted in the soft-AND bias.  Outside the cube the coordinate
# gadgets cancel only up to float rounding (~1e-13/tau); the slack swallows
# that residue so the support containment is exact in float arithmetic, at
# the cost of a 1e-9 dent in the plateau value.
_AND_GUARD = 1e-9


def build_indicator_net(partition: CubicPartition, cube: int, tau: float, clamp: float = 1.0) -> ReluNet:
    """Two-hidden-layer net equal to 1 (up to a 1e-9 guard) on the cube's
    inner plateau, exactly 0 outside the cube, and in [0, 1] on the
    width-tau ramp band.

    First hidden layer: one trapezoid gadget (4 units) per coordinate, ramps
    placed inward so the support stays inside the closed cube.  Second
    hidden layer: a single soft-AND unit relu(sum_k t_k - (d-1) - guard).
    """
    _check_tau(tau, partition.resolution)
    d = partition.dim
    lo, hi = partition.bounds(cube)
    W1 = np.zeros((4 * d, d))
    b1 = np.zeros(4 * d)
    for k in range(d):
        base = 4 * k
        W1[base:base + 4, k] = 1.0
        b1[base + 0] = -lo[k]
        b1[base + 1] = -(lo[k] + tau)
        b1[base + 2] = -(hi[k] - tau)
        b1[base + 3] = -hi[k]
    W2 = np.zeros((1, 4 * d))
    for k in range(d):
        base = 4 * k
        W2[0, base:base + 4] = np.array([1.0, -1.0, -1.0, 1.0]) / tau
    b2 = np.array([-(d - 1.0) - _AND_GUARD])
    arch = NetArchitecture(widths=(d, 4 * d, 1), clamp=clamp)
    return ReluNet(arch, (W1, W2), (b1, b2), np.array([1.0]))


def approximate_piecewise_constant(spec: PiecewiseConstantSpec, tau: float) -> ReluNet:
    """The depth-2 constructive approximant: one indicator gadget per
    supported cube, output weights equal to the piece values.

    Equals the target exactly outside the union of the cubes' ramp bands.
    An empty support yields the zero net.
    """
    _check_tau(tau, spec.partition.resolution)
    d = spec.partition.dim
    s = spec.sparsity
    clamp = max(spec.bound, 1e-12)
    if s == 0:
        arch = NetArchitecture(widths=(d, 1, 1), clamp=clamp)
        return ReluNet(arch, (np.zeros((1, d)), np.zeros((1, 1))),
                       (np.zeros(1), np.zeros(1)), np.zeros(1))
    W1 = np.zeros((4 * d * s, d))
    b1 = np.zeros(4 * d * s)
    W2 = np.zeros((s, 4 * d * s))
    b2 = np.full(s, -(d - 1.0) - _AND_GUARD)
    for i, j in enumerate(spec.support):
        g = build_indicator_net(spec.partition, j, tau)
        rows = slice(4 * d * i, 4 * d * (i + 1))
        W1[rows] = g.weights[0]
        b1[rows] = g.biases[0]
        W2[i, rows] = g.weights[1][0]
    arch = NetArchitecture(widths=(d, 4 * d * s, s), clamp=clamp)
    return ReluNet(arch, (W1, W2), (b1, b2), np.array(spec.values, dtype=float))


def construction_error_bound(d: int, C0: float, s: int, tau: float, N: int) -> float:
    """Certified L^1 error bound of the constructive approximant:
    2 d C0 s tau N^(1-d)."""
    return 2.0 * d * C0 * s * tau * N ** (1 - d)


def band_lp_bound(d: int, C0: float, s: int, tau: float, N: int, p: float) -> float:
    """Geometric band bound for p >= 1: the error lives on a set of measure
    at most 2 d s tau N^(1-d) with height at most C0."""
    return C0 * (2.0 * d * s * tau * N ** (1 - d)) ** (1.0 / p)


# ---------------------------------------------------------------------------
# Midpoint-rule L^p integration oracle
# ---------------------------------------------------------------------------


def net_evaluator(net: ReluNet):
    return lambda X: forward_batch(net, X)


def lp_error(f, g, p: float, resolution: int, dim: int, chunk: int = 1 << 18) -> float:
    """Midpoint-rule estimate of the L^p([0,1]^dim) distance between two
    batched evaluables.

    Exact for functions piecewise constant on the evaluation grid.  The
    estimate should be re-checked by doubling the resolution (see
    lp_error_stable); accuracy requires the grid step to resolve the
    integrands' features.
    """
    if resolution < 16:
        raise ValueError("resolution must be >= 16")
    if p < 1:
        raise ValueError("p must be >= 1")
    total = resolution ** dim
    acc = 0.0
    step = 1.0 / resolution
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        flat = np.arange(start, stop, dtype=np.int64)
        X = np.empty((stop - start, dim))
        rem = flat
        for k in range(dim - 1, -1, -1):
            X[:, k] = (rem % resolution + 0.5) * step
            rem = rem // resolution
        diff = np.abs(np.asarray(f(X), dtype=float) - np.asarray(g(X), dtype=float))
        acc += float((diff ** p).sum())
    return (acc / total) ** (1.0 / p)


def lp_error_stable(
    f, g, p: float, resolution: int, dim: int, rel_change: float = 0.05, max_doublings: int = 3
) -> tuple[float, bool]:
    """Doubles the resolution until the estimate moves by < rel_change.

    Returns (refined estimate, converged flag).
    """
    est = lp_error(f, g, p, resolution, dim)
    for _ in range(max_doublings):
        resolution *= 2
        nxt = lp_error(f, g, p, resolution, dim)
        denom = max(abs(nxt), 1e-300)
        if abs(nxt - est) / denom < rel_change:
            return nxt, True
        est = nxt
    return est, False


# ---------------------------------------------------------------------------
# Empirical rate study for the smooth class
# ---------------------------------------------------------------------------


def smooth_depth(r: float, d: int, p: float, u: int | None = None) -> int:
    """Layer count prescribed for the smooth-class construction:
    2(d+u)ceil((r+2d)/(2d)) + 8(d+u) + 3 + ceil((rp+d+p+1)/(2d))."""
    if u is None:
        u = max(int(math.ceil(r)) - 1, 0)
    a = 2 * (d + u) * math.ceil((r + 2 * d) / (2 * d))
    b = 8 * (d + u) + 3
    c = math.ceil((r * p + d + p + 1) / (2 * d))
    return a + b + c


@dataclass(frozen=True)
class RateRow:
    budget: int
    depth: int
    measured_error: float
    predicted_bound: float
    seed: int
    failed: bool = False


@dataclass(frozen=True)
class RateReport:
    rows: tuple[RateRow, ...]
    fitted_slope: float
    predicted_slope: float
    constructive: RateRow | None = None


def empirical_rate_study(
    spec: PiecewiseSmoothSpec,
    budgets: tuple[int, ...],
    p: float,
    seeds: tuple[int, ...],
    rng: RngContract,
    n_train: int = 4000,
    trainer: TrainerConfig | None = None,
    error_resolution: int = 256,
) -> RateReport:
    """Trains nets at the prescribed depth and budget-scaled sizes against
    dense samples of the target and reports measured L^p errors beside the
    predicted n^(-r/d) s N^(-d/p) scaling.  The report asserts nothing by
    itself; failed training runs are marked, not raised.
    """
    if len(set(budgets)) < 3:
        raise ValueError("need at least 3 distinct parameter budgets")
    d = spec.partition.dim
    N = spec.partition.resolution
    r = spec.smoothness
    depth = smooth_depth(r, d, p, spec.degree_cap)
    base_trainer = trainer or TrainerConfig(
        learning_rate=0.01, iterations=3000, minibatch=64, momentum=0.9, rng=rng
    )
    rows: list[RateRow] = []
    target = spec.evaluate
    for seed_i, seed in enumerate(seeds):
        data_stream = rng.stream("rate-data", seed)
        X = data_stream.uniform(0.0, 1.0, size=(n_train, d))
        y = target(X)
        for budget in budgets:
            params = budget * spec.partition.n_cubes
            widths = widths_for_budget(d, depth, max(params, depth + 2))
            arch = NetArchitecture(widths=widths, clamp=max(spec.lipschitz * 4, 1.0))
            net0 = init_net(arch, rng.stream(f"rate-init-{budget}", seed))
            cfg = TrainerConfig(
                learning_rate=base_trainer.learning_rate,
                iterations=base_trainer.iterations,
                minibatch=base_trainer.minibatch,
                momentum=base_trainer.momentum,
                grad_clip=base_trainer.grad_clip,
                schedule=base_trainer.schedule,
                decay_iters=base_trainer.decay_iters,
                rng=rng,
                label=f"rate-train-{budget}",
                index=seed,
            )
            bound = budget ** (-r / d) * spec.sparsity * N ** (-d / p)
            try:
                fitted, _ = train(net0, X, y, cfg)
                err = lp_error(target, net_evaluator(fitted), p, error_resolution, d)
                rows.append(RateRow(budget, depth, err, bound, seed))
            except Exception:
                rows.append(RateRow(budget, depth, float("nan"), bound, seed, failed=True))
    ok = [(row.budget, row.measured_error) for row in rows
          if not row.failed and row.measured_error > 0]
    if len({b for b, _ in ok}) >= 2:
        lb = np.log([b for b, _ in ok])
        le = np.log([e for _, e in ok])
        slope = float(np.polyfit(lb, le, 1)[0])
    else:
        slope = float("nan")
    constructive = None
    if spec.is_piecewise_constant() and spec.sparsity > 0:
        tau = 0.01 / N
        values = tuple(pc.terms[0][0] if pc.terms else 0.0 for pc in spec.pieces)
        bound_c0 = max(max(abs(v) for v in values), 1e-12)
        const_spec = PiecewiseConstantSpec(spec.partition, spec.support, values, bound_c0)
        built = approximate_piecewise_constant(const_spec, tau)
        err = lp_error(const_spec.evaluate, net_evaluator(built), p, error_resolution, d)
        constructive = RateRow(
            budget=param_count(built.architecture),
            depth=2,
            measured_error=err,
            predicted_bound=construction_error_bound(d, bound_c0, spec.sparsity, tau, N),
            seed=-1,
        )
    return RateReport(tuple(rows), slope, -r / d, constructive)
