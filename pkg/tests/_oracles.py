"""Independent oracles shared by the unit and acceptance suites.

These deliberately re-derive quantities by brute force (enumeration, central
finite differences) so the fast paths they check cannot leak into them.
"""

import numpy as np

from dqlab.nets import NetArchitecture, ReluNet, forward_batch


def brute_force_param_count(net: ReluNet) -> int:
    """Enumerate every stored tunable entry."""
    arch = net.architecture
    total = 0
    for k, (W, b) in enumerate(zip(net.weights, net.biases)):
        if arch.mask is None:
            total += W.size
        else:
            total += int(arch.mask[k].sum())
        total += b.size
    total += net.output.size
    return total


def random_arch(stream, with_mask: bool) -> NetArchitecture:
    depth = int(stream.integers(1, 5))
    widths = tuple(int(w) for w in stream.integers(1, 9, size=depth + 1))
    mask = None
    if with_mask:
        mask = tuple(
            stream.random((widths[k + 1], widths[k])) < 0.6 for k in range(depth)
        )
    return NetArchitecture(widths=widths, clamp=2.0, mask=mask)


def finite_difference_grad(net: ReluNet, X, y, h=1e-6):
    """Central differences over every tunable parameter."""

    def loss_of(net2):
        r = forward_batch(net2, X) - y
        return float(r @ r) / len(X)

    grads_W, grads_b = [], []
    for k in range(len(net.weights)):
        gW = np.zeros_like(net.weights[k])
        for idx in np.ndindex(*net.weights[k].shape):
            for sign in (1, -1):
                Ws = [w.copy() for w in net.weights]
                Ws[k][idx] += sign * h
                val = loss_of(ReluNet(net.architecture, tuple(Ws), net.biases, net.output))
                gW[idx] += sign * val / (2 * h)
        grads_W.append(gW)
        gb = np.zeros_like(net.biases[k])
        for idx in np.ndindex(*net.biases[k].shape):
            for sign in (1, -1):
                bs = [b.copy() for b in net.biases]
                bs[k][idx] += sign * h
                val = loss_of(ReluNet(net.architecture, net.weights, tuple(bs), net.output))
                gb[idx] += sign * val / (2 * h)
        grads_b.append(gb)
    ga = np.zeros_like(net.output)
    for idx in np.ndindex(*net.output.shape):
        for sign in (1, -1):
            a = net.output.copy()
            a[idx] += sign * h
            ga[idx] += sign * loss_of(
                ReluNet(net.architecture, net.weights, net.biases, a)
            ) / (2 * h)
    return grads_W, grads_b, ga


def away_from_kinks(net: ReluNet, X, margin=1e-3) -> np.ndarray:
    """Rows whose pre-activations and raw output keep clear of relu kinks
    and the clamp boundary."""
    H = np.asarray(X, dtype=float)
    ok = np.ones(len(H), dtype=bool)
    for W, b in zip(net.weights, net.biases):
        Z = H @ W.T + b
        ok &= (np.abs(Z) > margin).all(axis=1)
        H = np.maximum(Z, 0.0)
    raw = H @ net.output
    M = net.architecture.clamp
    ok &= np.abs(np.abs(raw) - M) > margin
    return ok


def max_rel_grad_error(analytic, numeric, floor=1e-4) -> float:
    err = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.abs(n), floor)
        err = max(err, float(np.max(np.abs(a - n) / denom)))
    return err
