import math

import numpy as np
import pytest

from dqlab.capacity import (
    BoundInputs,
    StageInputs,
    corollary1_bound,
    covering_bound_deep,
    covering_bound_linear_shallow,
    generalization_bound_constant,
    generalization_bound_smooth,
    horizon_factor,
    horizon_factor_closed_form,
    invert_sample_size,
    oracle_bound,
)
from dqlab.core import RngContract


def stage_const_inputs(m, T, mu, stage: StageInputs, **kw) -> BoundInputs:
    return BoundInputs(m=m, horizon=T, mu=mu, reward_bound=1.0, stages=(stage,) * T, **kw)


class TestCoveringLinear:
    def test_spot_value(self):
        got = covering_bound_linear_shallow(k=10, M=2.0, eps=0.2, C_1=1.0)
        assert got == 10 * math.log(10.0)          # independent hand evaluation
        assert got == pytest.approx(23.026, abs=1e-3)

    def test_log_term_one(self):
        eps = 0.31
        assert covering_bound_linear_shallow(1, math.e * eps, eps) == pytest.approx(1.0)

    def test_linear_in_k(self):
        a = covering_bound_linear_shallow(7, 2.0, 0.1)
        b = covering_bound_linear_shallow(14, 2.0, 0.1)
        assert b == pytest.approx(2 * a)

    def test_eps_at_least_M_rejected(self):
        with pytest.raises(ValueError):
            covering_bound_linear_shallow(3, 1.0, 1.0)


class TestCoveringDeep:
    def test_spot_value(self):
        got = covering_bound_deep(n=100, L=2, D_max=50, M=2.0, eps=0.2, C_star1=1.0)
        assert got == 2 * 100 * math.log(50.0) * math.log(10.0)
        assert got == pytest.approx(1801.9, rel=1e-3)

    def test_linear_in_depth(self):
        a = covering_bound_deep(50, 1, 8, 2.0, 0.2)
        b = covering_bound_deep(50, 2, 8, 2.0, 0.2)
        assert b == pytest.approx(2 * a)

    def test_monotone_in_eps(self):
        vals = [covering_bound_deep(50, 2, 8, 2.0, e) for e in (0.5, 0.25, 0.1, 0.01)]
        assert all(x < y for x, y in zip(vals, vals[1:]))

    def test_small_width_rejected(self):
        with pytest.raises(ValueError):
            covering_bound_deep(50, 2, 1, 2.0, 0.2)


class TestHorizonFactor:
    @pytest.mark.parametrize("mu", [1.0, 2.0, 5.0])
    @pytest.mark.parametrize("T", list(range(1, 21)))
    def test_identity(self, T, mu):
        direct = horizon_factor(T, mu)
        closed = horizon_factor_closed_form(T, mu)
        assert closed == pytest.approx(direct, rel=1e-12)

    def test_hand_value(self):
        # T=2, mu=1: (1 + 3) + 1 = 5
        assert horizon_factor(2, 1.0) == 5.0


class TestOracleBound:
    def test_vanishing_with_huge_m(self):
        st = StageInputs(beta=0.0, approx_error=0.0)
        inputs = BoundInputs(m=10**12, horizon=1, mu=1.0, reward_bound=1.0, stages=(st,))
        rep = oracle_bound(inputs, covering_values=(5.0, 0.0))
        assert rep.value < 1e-5

    def test_equal_terms_hand_expansion(self):
        # T=2, all stage terms equal v: weights (1 + 3mu) + 1
        v = 0.09
        mu = 2.0
        st = StageInputs(beta=v / 3, approx_error=v / 3)
        inputs = BoundInputs(
            m=3, horizon=2, mu=mu, reward_bound=1.0, stages=(st, st),
            constants={"C_prime": 0.0},
        )
        # with C' = 0: inner = approx + beta + 1/m + (cov_j + cov_{j+1})/m
        cov = (0.0, 0.0, 0.0)
        rep = oracle_bound(inputs, cov)
        inner = v / 3 + v / 3 + 1 / 3
        want = (2 + 3 * mu) * math.sqrt(inner)
        assert rep.value == pytest.approx(want, rel=1e-12)

    def test_corollary1_shape(self):
        # with the balancing beta, the oracle bound matches the corollary's
        # shape: per-pair terms proportional within a constant factor
        m = 10_000
        st = StageInputs(linear_dim=6, approx_error=0.01)
        inputs = BoundInputs(m=m, horizon=3, mu=1.0, reward_bound=1.0, stages=(st,) * 3)
        rep1 = corollary1_bound(inputs)
        assert rep1.value > 0
        # direct formula re-derivation
        want = sum(
            (3.0) ** (j - t) * math.sqrt(0.01 + 6 * math.log(2 * m) / m)
            for t in range(1, 4)
            for j in range(t, 4)
        )
        assert rep1.value == pytest.approx(want, rel=1e-12)

    def test_covering_length_checked(self):
        st = StageInputs()
        inputs = BoundInputs(m=10, horizon=2, mu=1.0, reward_bound=1.0, stages=(st, st))
        with pytest.raises(ValueError):
            oracle_bound(inputs, covering_values=(1.0,))


class TestGeneralizationConstant:
    def test_T1_collapse_matches_closed_form(self):
        st = StageInputs(partitions=4, dim=3)
        inputs = stage_const_inputs(1000, 1, 1.0, st, distortion=1.3)
        rep = generalization_bound_constant(inputs)
        want = 1.3 * math.sqrt(4**3 * math.log(4) * math.log(1000) / 1000)
        assert rep.value == pytest.approx(want, rel=1e-12)
        assert rep.term("stage_constant_simplification") == pytest.approx(want, rel=1e-12)

    def test_shrinks_with_m(self):
        st = StageInputs(partitions=3, dim=2)
        a = generalization_bound_constant(stage_const_inputs(1000, 2, 1.0, st)).value
        b = generalization_bound_constant(stage_const_inputs(4000, 2, 1.0, st)).value
        assert b < a
        assert b / a == pytest.approx(math.sqrt(math.log(4000) / math.log(1000) / 4), rel=1e-12)

    def test_log_guard(self):
        st = StageInputs(partitions=1, dim=1)
        rep = generalization_bound_constant(stage_const_inputs(100, 1, 1.0, st))
        assert rep.value > 0  # log N treated as log 2 for N < 2

    def test_sample_complexity_inversion(self):
        st = StageInputs(partitions=3, dim=2)

        def bound(m):
            return generalization_bound_constant(stage_const_inputs(m, 2, 1.0, st)).value

        m1 = invert_sample_size(bound, 0.1)
        m2 = invert_sample_size(bound, 0.1)
        assert m1 == m2
        assert bound(m1) <= 0.1 < bound(m1 - 1)


class TestGeneralizationSmooth:
    def test_large_r_exponent(self):
        # with growing r the m-rate approaches -1/2
        vals = []
        for r in (1.0, 4.0, 16.0, 64.0):
            st = StageInputs(partitions=1, dim=2, smoothness=r, sparsity=1)
            a = generalization_bound_smooth(stage_const_inputs(10_000, 1, 1.0, st)).value
            b = generalization_bound_smooth(stage_const_inputs(40_000, 1, 1.0, st)).value
            # remove the log(m) part before reading off the m-exponent
            ratio = (b / math.log(40_000)) / (a / math.log(10_000))
            vals.append(math.log(ratio) / math.log(4.0))
        assert vals[-1] == pytest.approx(-0.5, abs=0.02)
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_quarter_rate_case(self):
        # d_a = d_s = 1 (dim 2), r = 1, s = 1, N = 1: rate m^(-1/4) log m
        st = StageInputs(partitions=1, dim=2, smoothness=1.0, sparsity=1)
        inputs = stage_const_inputs(4096, 1, 1.0, st)
        rep = generalization_bound_smooth(inputs)
        want = 4096 ** (-0.25) * math.log(4096) * 2 ** 1.5
        assert rep.value == pytest.approx(want, rel=1e-12)
        assert rep.term("stage_constant_simplification") == pytest.approx(
            4096 ** (-0.25) * math.log(4096), rel=1e-12
        )

    def test_sparsity_power_law(self):
        def value(s):
            st = StageInputs(partitions=2, dim=2, smoothness=1.0, sparsity=s)
            return generalization_bound_smooth(stage_const_inputs(1000, 1, 1.0, st)).value

        ratio = value(2) / value(1)
        assert ratio == pytest.approx(2 ** (2 / (2 * 1.0 + 2)), rel=1e-12)

    def test_balancing_parameter_echoed(self):
        st = StageInputs(partitions=2, dim=2, smoothness=1.5, sparsity=3)
        inputs = stage_const_inputs(500, 2, 1.0, st, p=2.0)
        rep = generalization_bound_smooth(inputs)
        want_n1 = (500 * 9 / 2 ** (2 + 2)) ** (2 / (3 + 2))
        assert rep.term("n_1") == pytest.approx(want_n1, rel=1e-12)


class TestMonotonicityAndPurity:
    def test_randomized_monotone_perturbations(self):
        stream = RngContract(42).stream("mono")
        for _ in range(25):
            m = int(stream.integers(10, 100_000))
            T = int(stream.integers(1, 6))
            mu = float(stream.uniform(1.0, 4.0))
            st = StageInputs(
                partitions=int(stream.integers(1, 6)),
                dim=int(stream.integers(1, 4)),
                smoothness=float(stream.uniform(0.5, 3.0)),
                sparsity=int(stream.integers(1, 10)),
            )
            base = stage_const_inputs(m, T, mu, st)
            v0 = generalization_bound_constant(base).value
            # nondecreasing in mu and T
            assert generalization_bound_constant(stage_const_inputs(m, T, mu + 0.5, st)).value >= v0
            assert generalization_bound_constant(stage_const_inputs(m, T + 1, mu, st)).value >= v0
            if m >= 3:
                assert generalization_bound_constant(stage_const_inputs(4 * m, T, mu, st)).value <= v0
            s0 = generalization_bound_smooth(base).value
            bigger_s = StageInputs(
                partitions=st.partitions, dim=st.dim,
                smoothness=st.smoothness, sparsity=st.sparsity + 1,
            )
            assert generalization_bound_smooth(stage_const_inputs(m, T, mu, bigger_s)).value >= s0

    def test_reports_are_pure(self):
        st = StageInputs(partitions=3, dim=2, smoothness=1.0, sparsity=2)
        a = generalization_bound_smooth(stage_const_inputs(777, 3, 2.0, st))
        b = generalization_bound_smooth(stage_const_inputs(777, 3, 2.0, st))
        assert a == b

    def test_unknown_constant_slot_rejected(self):
        with pytest.raises(ValueError):
            BoundInputs(m=10, horizon=1, mu=1.0, reward_bound=1.0, constants={"bogus": 2.0})
