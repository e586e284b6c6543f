"""Closed-form capacity and generalization-bound arithmetic.

Every evaluator is a pure function of explicit inputs.  Unnamed absolute
constants from the underlying theory are exposed as input slots defaulting
to 1.0 and labeled as unknown; absolute bound values are therefore only
meaningful for relative comparisons and scalings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "StageInputs",
    "BoundInputs",
    "BoundReport",
    "covering_bound_linear_shallow",
    "covering_bound_deep",
    "horizon_factor",
    "horizon_factor_closed_form",
    "horizon_factor_paper_form",
    "oracle_bound",
    "corollary1_bound",
    "generalization_bound_constant",
    "generalization_bound_smooth",
    "invert_sample_size",
    "UNKNOWN_CONSTANTS",
]

# All default to 1.0: unknown absolute constants, relative comparisons only.
UNKNOWN_CONSTANTS = (
    "C", "C_prime", "C_dprime", "C_hat1", "C_hat2", "C_hat3",
    "C_star1", "C_star2", "C_1",
)


@dataclass(frozen=True)
class StageInputs:
    """Per-stage symbols feeding the bound formulas."""

    sparsity: int = 1            # s_t
    partitions: int = 1          # N_t
    dim: int = 1                 # effective input dimension of Q*_t
    smoothness: float = 1.0      # r_t
    params: int = 1              # n_t
    depth: int = 2               # L_t
    max_width: int = 2           # D_max at stage t
    linear_dim: int = 1          # k_t, for linear/shallow spaces
    beta: float = 0.0            # beta_t
    approx_error: float = 0.0    # min_h E[(h - Q*_t)^2]


@dataclass(frozen=True)
class BoundInputs:
    m: int
    horizon: int
    mu: float
    reward_bound: float
    p: float = 2.0
    distortion: float = 1.0      # J_{p,T}; 1 covers uniform sampling for p >= 2
    stages: tuple[StageInputs, ...] = ()
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.m < 1 or self.horizon < 1:
            raise ValueError("m and horizon must be positive")
        if self.mu < 1.0:
            raise ValueError("mu must be >= 1")
        if self.stages and len(self.stages) != self.horizon:
            raise ValueError("need one StageInputs per stage")
        for name in self.constants:
            if name not in UNKNOWN_CONSTANTS:
                raise ValueError(f"unknown constant slot {name!r}")

    def constant(self, name: str) -> float:
        return float(self.constants.get(name, 1.0))

    def stage(self, t: int) -> StageInputs:
        """1-based stage lookup; stage T+1 falls back to a zero-size record."""
        if 1 <= t <= self.horizon and self.stages:
            return self.stages[t - 1]
        if t == self.horizon + 1:
            return StageInputs(sparsity=0, partitions=1, dim=0, linear_dim=0)
        raise IndexError(f"stage {t} out of range")


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    terms: tuple[tuple[str, float], ...]
    constants: tuple[tuple[str, float], ...]

    def term(self, label: str) -> float:
        for k, v in self.terms:
            if k == label:
                return v
        raise KeyError(label)


def covering_bound_linear_shallow(k: int, M: float, eps: float, C_1: float = 1.0) -> float:
    """log covering number bound for k-dimensional linear models and shallow
    nets with k tunable parameters: C_1 * k * log(M / eps)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if M <= 0 or eps <= 0:
        raise ValueError("M and eps must be positive")
    if eps >= M:
        raise ValueError("eps must be < M (log term must stay positive)")
    return C_1 * k * math.log(M / eps)


def covering_bound_deep(
    n: int, L: int, D_max: int, M: float, eps: float, C_star1: float = 1.0
) -> float:
    """log covering number bound for clamped deep nets with n tunable
    parameters on L layers: C*_1 * L * n * log(D_max) * log(M / eps)."""
    if D_max < 2:
        raise ValueError("D_max must be >= 2")
    if M <= 0 or eps <= 0 or eps >= M:
        raise ValueError("need 0 < eps < M")
    return C_star1 * L * n * math.log(D_max) * math.log(M / eps)


def horizon_factor(T: int, mu: float) -> float:
    """The geometric horizon weight sum_{t=1}^T sum_{j=t}^T (3 mu)^(j-t),
    evaluated directly."""
    x = 3.0 * mu
    return float(sum(x ** (j - t) for t in range(1, T + 1) for j in range(t, T + 1)))


def horizon_factor_closed_form(T: int, mu: float) -> float:
    """Closed form of the double sum: T/(1-x) - x(1-x^T)/(1-x)^2 for x = 3 mu."""
    x = 3.0 * mu
    if x == 1.0:
        return T * (T + 1) / 2.0
    return T / (1.0 - x) - x * (1.0 - x ** T) / (1.0 - x) ** 2


def horizon_factor_paper_form(T: int, mu: float) -> float:
    """The closed form as printed in the source theory (second term not
    squared); kept for reporting, does not equal the double sum in general."""
    x = 3.0 * mu
    if x == 1.0:
        return float("nan")
    return T / (1.0 - x) - x * (1.0 - x ** T) / (1.0 - x)


def _stage_pairs(T: int, mu: float):
    for t in range(1, T + 1):
        for j in range(t, T + 1):
            yield t, j, (3.0 * mu) ** (j - t)


def oracle_bound(inputs: BoundInputs, covering_values: tuple[float, ...]) -> BoundReport:
    """Oracle-inequality evaluator.

    covering_values holds one value per stage 1..T+1; supply 0.0 at stage
    T+1 for the singleton zero class.  Per stage-pair (t, j) the term is
    (3 mu)^(j-t) * sqrt(approx_j + beta_j + 1/m
                        + exp(-C' beta_j m) (Ncov_j + Ncov_{j+1}) / m).
    """
    T = inputs.horizon
    if len(covering_values) != T + 1:
        raise ValueError("need covering values for stages 1..T+1")
    C = inputs.constant("C")
    C_prime = inputs.constant("C_prime")
    m = inputs.m
    total = 0.0
    terms = []
    for t, j, w in _stage_pairs(T, inputs.mu):
        st = inputs.stage(j)
        inner = (
            st.approx_error
            + st.beta
            + 1.0 / m
            + math.exp(-C_prime * st.beta * m) * (covering_values[j - 1] + covering_values[j]) / m
        )
        term = w * math.sqrt(inner)
        terms.append((f"t={t},j={j}", term))
        total += term
    value = C * total
    return BoundReport(
        "oracle", value, tuple(terms),
        (("C", C), ("C_prime", C_prime)),
    )


def corollary1_bound(inputs: BoundInputs) -> BoundReport:
    """Linear/shallow specialization of the oracle inequality:
    C'' sum_t sum_j (3 mu)^(j-t) sqrt(approx_j + max(k_j, k_{j+1}) log(2m)/m)."""
    T = inputs.horizon
    C_dprime = inputs.constant("C_dprime")
    m = inputs.m
    total = 0.0
    terms = []
    for t, j, w in _stage_pairs(T, inputs.mu):
        st = inputs.stage(j)
        k_next = inputs.stage(j + 1).linear_dim if j < T else 0
        kmax = max(st.linear_dim, k_next)
        term = w * math.sqrt(st.approx_error + kmax * math.log(2.0 * m) / m)
        terms.append((f"t={t},j={j}", term))
        total += term
    return BoundReport("corollary1", C_dprime * total, tuple(terms), (("C_dprime", C_dprime),))


def _guarded_log(N: int) -> float:
    return math.log(2.0) if N < 2 else math.log(N)


def generalization_bound_constant(inputs: BoundInputs) -> BoundReport:
    """Generalization bound for piecewise-constant optimal Q-functions.

    Value: C_hat1 * J * sqrt(log m / m)
           * sum_t sum_j (3 mu)^(j-t) N_t^(max(d_j, d_{j+1})/2) sqrt(log N_j).
    The report also carries the stage-constant simplification
    C_hat1 * J * sqrt(N^D log N log m / m) * horizon_factor when dimensions
    and partition counts are stage-constant, plus both closed forms of the
    horizon factor.
    """
    T = inputs.horizon
    C_hat1 = inputs.constant("C_hat1")
    m = inputs.m
    lead = C_hat1 * inputs.distortion * math.sqrt(math.log(max(m, 1)) / m)
    total = 0.0
    terms = []
    for t, j, w in _stage_pairs(T, inputs.mu):
        st_t = inputs.stage(t)
        st_j = inputs.stage(j)
        d_next = inputs.stage(j + 1).dim if j < T else 0
        expo = max(st_j.dim, d_next) / 2.0
        term = w * st_t.partitions ** expo * math.sqrt(_guarded_log(st_j.partitions))
        terms.append((f"t={t},j={j}", term))
        total += term
    value = lead * total
    extras = [("double_sum", total)]
    hf = horizon_factor(T, inputs.mu)
    extras.append(("horizon_factor", hf))
    extras.append(("horizon_factor_closed_form", horizon_factor_closed_form(T, inputs.mu)))
    extras.append(("horizon_factor_paper_form", horizon_factor_paper_form(T, inputs.mu)))
    if inputs.stages:
        dims = {s.dim for s in inputs.stages}
        parts = {s.partitions for s in inputs.stages}
        if len(dims) == 1 and len(parts) == 1:
            N = inputs.stages[0].partitions
            D = inputs.stages[0].dim
            simple = (
                C_hat1 * inputs.distortion
                * math.sqrt(N ** D * _guarded_log(N) * math.log(max(m, 1)) / m)
                * hf
            )
            extras.append(("stage_constant_simplification", simple))
    return BoundReport(
        "generalization_constant", value, tuple(terms) + tuple(extras),
        (("C_hat1", C_hat1),),
    )


def generalization_bound_smooth(inputs: BoundInputs) -> BoundReport:
    """Generalization bound for piecewise-smooth optimal Q-functions.

    Per stage-pair term:
    (3 mu)^(j-t) m^(-r_j/(2r_j+d_j)) s_j^(d_j/(2r_j+d_j))
      N_j^((p r_j max(d_j, d_{j+1}) - d_j^2)/((2r_j+d_j) p))
      max(d_j, d_{j+1})^(3/2) log(m N_j).
    The report echoes the balancing parameter-count choice n_t per stage and
    the stage-constant simplification
    m^(-r/(2r+D)) log(mN) s^(D/(2r+D)) N^((2r-D)D/(4r+2D)) * horizon_factor.
    """
    T = inputs.horizon
    C_hat2 = inputs.constant("C_hat2")
    C_hat3 = inputs.constant("C_hat3")
    m = inputs.m
    p = inputs.p
    total = 0.0
    terms = []
    for t, j, w in _stage_pairs(T, inputs.mu):
        st = inputs.stage(j)
        d_next = inputs.stage(j + 1).dim if j < T else 0
        dmax = max(st.dim, d_next)
        r = st.smoothness
        dd = st.dim
        term = (
            w
            * m ** (-r / (2 * r + dd))
            * st.sparsity ** (dd / (2 * r + dd))
            * st.partitions ** ((p * r * dmax - dd * dd) / ((2 * r + dd) * p))
            * dmax ** 1.5
            * math.log(m * st.partitions)
        )
        terms.append((f"t={t},j={j}", term))
        total += term
    value = C_hat2 * inputs.distortion * total
    extras = []
    for t in range(1, T + 1):
        st = inputs.stage(t)
        d_next = inputs.stage(t + 1).dim if t < T else 0
        dmax = max(st.dim, d_next)
        n_t = (m * st.sparsity ** 2 / st.partitions ** (dmax + 2 * st.dim / p)) ** (
            st.dim / (2 * st.smoothness + st.dim)
        )
        extras.append((f"n_{t}", n_t))
    hf = horizon_factor(T, inputs.mu)
    extras.append(("horizon_factor", hf))
    if inputs.stages:
        dims = {s.dim for s in inputs.stages}
        parts = {s.partitions for s in inputs.stages}
        spars = {s.sparsity for s in inputs.stages}
        smooth = {s.smoothness for s in inputs.stages}
        if len(dims) == len(parts) == len(spars) == len(smooth) == 1:
            D = inputs.stages[0].dim
            N = inputs.stages[0].partitions
            s = inputs.stages[0].sparsity
            r = inputs.stages[0].smoothness
            simple = (
                C_hat3
                * m ** (-r / (2 * r + D))
                * math.log(m * N)
                * s ** (D / (2 * r + D))
                * N ** ((2 * r - D) * D / (4 * r + 2 * D))
                * hf
            )
            extras.append(("stage_constant_simplification", simple))
    return BoundReport(
        "generalization_smooth", value, tuple(terms) + tuple(extras),
        (("C_hat2", C_hat2), ("C_hat3", C_hat3)),
    )


def invert_sample_size(bound_at_m, target: float, lo: int = 2, hi: int = 1 << 50) -> int:
    """Smallest integer m with bound_at_m(m) <= target, by bisection.

    bound_at_m must be nonincreasing in m over [lo, hi] (true of the bound
    evaluators for m >= 3).  Deterministic and reproducible bit-exactly.
    """
    if bound_at_m(lo) <= target:
        return lo
    if bound_at_m(hi) > target:
        raise ValueError("target not reachable within the search range")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound_at_m(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi
