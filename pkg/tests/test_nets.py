import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import (
    away_from_kinks,
    brute_force_param_count,
    finite_difference_grad,
    random_arch,
)
from dqlab.core import RngContract
from dqlab.nets import (
    NetArchitecture,
    ReluNet,
    TrainerConfig,
    forward,
    forward_batch,
    gradient,
    init_net,
    net_from_json,
    net_to_json,
    param_count,
    train,
    widths_for_budget,
)


class TestParamCount:
    def test_hand_values(self):
        assert param_count(NetArchitecture((2, 3, 2), clamp=1.0)) == 19
        assert param_count(NetArchitecture((1, 1), clamp=1.0)) == 3
        assert param_count(NetArchitecture((5, 1), clamp=1.0)) == 7

    def test_against_enumeration_100_random(self):
        stream = RngContract(101).stream("arch")
        for i in range(100):
            arch = random_arch(stream, with_mask=(i % 2 == 1))
            net = init_net(arch, stream)
            assert param_count(arch) == brute_force_param_count(net)


class TestForward:
    def test_zero_net(self):
        arch = NetArchitecture((3, 4, 2), clamp=1.0)
        net = ReluNet(
            arch,
            (np.zeros((4, 3)), np.zeros((2, 4))),
            (np.zeros(4), np.zeros(2)),
            np.zeros(2),
        )
        stream = RngContract(0).stream("probe")
        for _ in range(10):
            assert forward(net, stream.random(3)) == 0.0

    def test_identity_gadget(self):
        # relu(x) - relu(-x) = x on [-M, M]
        arch = NetArchitecture((1, 2), clamp=10.0)
        net = ReluNet(arch, (np.array([[1.0], [-1.0]]),), (np.zeros(2),), np.array([1.0, -1.0]))
        for x in (-9.5, -1.0, 0.0, 0.3, 7.7):
            assert forward(net, [x]) == pytest.approx(x, abs=1e-15)

    def test_hand_evaluation(self):
        arch = NetArchitecture((1, 1), clamp=10.0)
        net = ReluNet(arch, (np.array([[1.0]]),), (np.array([-0.5]),), np.array([2.0]))
        assert forward(net, [1.0]) == pytest.approx(1.0)

    def test_clamp_is_exact(self):
        arch = NetArchitecture((2, 3), clamp=0.7)
        stream = RngContract(5).stream("init")
        net = init_net(arch, stream)
        net = ReluNet(arch, net.weights, net.biases, net.output * 1e6)
        X = stream.random((10_000, 2))
        out = forward_batch(net, X)
        assert np.all(np.abs(out) <= 0.7)

    def test_dimension_mismatch_rejected(self):
        arch = NetArchitecture((2, 2), clamp=1.0)
        net = init_net(arch, RngContract(0).stream("init"))
        with pytest.raises(ValueError):
            forward(net, [1.0, 2.0, 3.0])


class TestGradient:
    def test_zero_net_zero_target(self):
        arch = NetArchitecture((2, 3, 2), clamp=1.0)
        net = ReluNet(
            arch,
            (np.zeros((3, 2)), np.zeros((2, 3))),
            (np.zeros(3), np.zeros(2)),
            np.zeros(2),
        )
        g = gradient(net, np.array([[0.4, 0.6]]), np.array([0.0]))
        assert g.loss == 0.0
        assert all(np.all(dW == 0) for dW in g.d_weights)
        assert all(np.all(db == 0) for db in g.d_biases)
        assert np.all(g.d_output == 0)

    def test_perfect_fit_zero_gradient(self):
        stream = RngContract(3).stream("init")
        arch = NetArchitecture((3, 5, 4), clamp=5.0)
        net = init_net(arch, stream)
        X = stream.random((6, 3))
        y = forward_batch(net, X)
        g = gradient(net, X, y)
        assert g.loss == 0.0
        assert g.norm() == 0.0

    def test_matches_finite_differences(self):
        stream = RngContract(12).stream("fd")
        arch = NetArchitecture((3, 4, 4), clamp=5.0)
        net = init_net(arch, stream)
        X = stream.random((8, 3))
        keep = away_from_kinks(net, X)
        X = X[keep][:8]
        assert len(X) >= 4
        y = stream.random(len(X))
        g = gradient(net, X, y)
        fW, fb, fa = finite_difference_grad(net, X, y)
        for k in range(len(fW)):
            denom = np.maximum(np.abs(fW[k]), 1e-4)
            assert np.max(np.abs(g.d_weights[k] - fW[k]) / denom) < 1e-5
            denom = np.maximum(np.abs(fb[k]), 1e-4)
            assert np.max(np.abs(g.d_biases[k] - fb[k]) / denom) < 1e-5
        denom = np.maximum(np.abs(fa), 1e-4)
        assert np.max(np.abs(g.d_output - fa) / denom) < 1e-5

    def test_masked_entries_stay_zero(self):
        stream = RngContract(9).stream("mask")
        mask = (np.array([[True, False], [False, True], [True, True]]),)
        arch = NetArchitecture((2, 3), clamp=2.0, mask=mask)
        net = init_net(arch, stream)
        assert net.weights[0][0, 1] == 0.0
        g = gradient(net, stream.random((5, 2)), stream.random(5))
        assert g.d_weights[0][0, 1] == 0.0
        assert g.d_weights[0][1, 0] == 0.0


class TestTrain:
    def test_fit_constant(self):
        stream = RngContract(21).stream("data")
        X = stream.random((100, 1))
        y = np.full(100, 0.3)
        arch = NetArchitecture((1, 1), clamp=2.0)
        net = init_net(arch, RngContract(21).stream("init"))
        cfg = TrainerConfig(
            learning_rate=0.2, momentum=0.9, iterations=2000, minibatch=32, rng=RngContract(21)
        )
        fitted, trace = train(net, X, y, cfg)
        final = float(np.mean((forward_batch(fitted, X) - y) ** 2))
        assert final <= 1e-4
        assert len(trace) == 2000

    def test_zero_budget_noop(self):
        arch = NetArchitecture((2, 3), clamp=1.0)
        net = init_net(arch, RngContract(1).stream("init"))
        out, trace = train(net, np.zeros((4, 2)), np.zeros(4), TrainerConfig(iterations=0))
        assert out is net
        assert trace == []

    def test_fit_step_function(self):
        stream = RngContract(33).stream("data")
        X = stream.random((1000, 1))
        y = (X[:, 0] >= 0.5).astype(float)
        arch = NetArchitecture((1, 32, 32), clamp=2.0)
        net = init_net(arch, RngContract(33).stream("init"))
        cfg = TrainerConfig(
            learning_rate=0.05, iterations=4000, minibatch=64, momentum=0.9, rng=RngContract(33)
        )
        fitted, _ = train(net, X, y, cfg)
        final = float(np.mean((forward_batch(fitted, X) - y) ** 2))
        assert final <= 0.01

    def test_never_worse_than_start(self):
        stream = RngContract(44).stream("data")
        X = stream.random((50, 2))
        y = stream.random(50)
        arch = NetArchitecture((2, 8), clamp=2.0)
        net = init_net(arch, RngContract(44).stream("init"))
        start = float(np.mean((forward_batch(net, X) - y) ** 2))
        # deliberately crude step size
        cfg = TrainerConfig(learning_rate=1.5, iterations=300, rng=RngContract(44))
        fitted, _ = train(net, X, y, cfg)
        final = float(np.mean((forward_batch(fitted, X) - y) ** 2))
        assert final <= start

    def test_deterministic(self):
        stream = RngContract(55).stream("data")
        X = stream.random((64, 3))
        y = stream.random(64)
        arch = NetArchitecture((3, 6, 6), clamp=2.0)
        net = init_net(arch, RngContract(55).stream("init"))
        cfg = TrainerConfig(learning_rate=0.05, iterations=500, rng=RngContract(55))
        a, _ = train(net, X, y, cfg)
        b, _ = train(net, X, y, cfg)
        assert all(np.array_equal(x, y_) for x, y_ in zip(a.weights, b.weights))
        assert all(np.array_equal(x, y_) for x, y_ in zip(a.biases, b.biases))
        assert np.array_equal(a.output, b.output)


class TestSerialization:
    def test_round_trip_exact(self):
        stream = RngContract(66).stream("arch")
        for i in range(5):
            arch = random_arch(stream, with_mask=(i % 2 == 0))
            net = init_net(arch, stream)
            back = net_from_json(net_to_json(net))
            assert back.architecture.widths == net.architecture.widths
            assert back.architecture.clamp == net.architecture.clamp
            assert all(np.array_equal(a, b) for a, b in zip(back.weights, net.weights))
            assert all(np.array_equal(a, b) for a, b in zip(back.biases, net.biases))
            assert np.array_equal(back.output, net.output)


@given(st.integers(1, 3), st.integers(10, 400))
@settings(max_examples=25, deadline=None)
def test_widths_for_budget_within(depth, budget):
    widths = widths_for_budget(4, depth, budget)
    arch = NetArchitecture(widths=widths, clamp=1.0)
    n = param_count(arch)
    assert n <= budget or widths[1] == 1
    bigger = NetArchitecture(widths=(4,) + (widths[1] + 1,) * depth, clamp=1.0)
    assert param_count(bigger) > budget or widths[1] == 1
