"""Finite-difference verification of every analytic gradient.

The checker perturbs each entry of each watched tensor by +-step,
re-runs the forward closure, and compares the central difference with
the gradient produced by backward().  The suite covers every layer the
matcher is assembled from, on seeded random instances small enough to
keep the whole run under a minute.
"""

from __future__ import annotations

import numpy as np

from .layers import attention_pool, gconv_cross, gconv_intra, linear, relu, softmax
from .loss import perm_xent_loss
from .sinkhorn import sinkhorn
from .tensor import Tensor, tsum

__all__ = ["gradcheck", "run_gradcheck_suite", "SUITE_LAYERS"]

SUITE_LAYERS = (
    "linear",
    "relu",
    "softmax",
    "attention_pool",
    "gconv_intra",
    "gconv_cross",
    "node_embedding",
    "perm_xent_loss",
    "sinkhorn",
)


def gradcheck(fn, wrt, step: float = 1e-5) -> float:
    """Max relative error between analytic and numeric gradients.

    `fn` must rebuild the forward pass from the current data of the
    tensors in `wrt` and return a scalar Tensor.  Relative error uses
    denominator max(|analytic|, |numeric|, 1e-3) so near-zero gradients
    are judged on an absolute scale.
    """
    for t in wrt:
        t.grad = None
    out = fn()
    if out.data.size != 1:
        raise ValueError("gradcheck: fn must return a scalar")
    out.backward()
    analytic = [
        (t.grad if t.grad is not None else np.zeros_like(t.data)).copy() for t in wrt
    ]
    worst = 0.0
    for t, grad in zip(wrt, analytic):
        flat = t.data.reshape(-1)
        gflat = grad.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + step
            f_plus = float(fn().data)
            flat[k] = orig - step
            f_minus = float(fn().data)
            flat[k] = orig
            numeric = (f_plus - f_minus) / (2.0 * step)
            denom = max(abs(gflat[k]), abs(numeric), 1e-3)
            worst = max(worst, abs(gflat[k] - numeric) / denom)
    return worst


def _away_from_zero(arr: np.ndarray, margin: float = 0.2) -> np.ndarray:
    """Push values out of the +-margin band so ReLU kinks stay clear of FD steps."""
    return arr + margin * np.sign(arr) + margin * (arr == 0.0)


def _weighted_sum(y: Tensor, rng: np.random.Generator) -> Tensor:
    """Contract a tensor to a scalar with fixed random weights."""
    return tsum(y * Tensor(rng.normal(size=y.shape)))


def _check_linear(rng):
    x = Tensor(rng.normal(size=(4, 3)), requires_grad=True)
    w = Tensor(rng.normal(size=(3, 2)), requires_grad=True)
    b = Tensor(rng.normal(size=2), requires_grad=True)
    c = rng.normal(size=(4, 2))
    return gradcheck(lambda: tsum(linear(x, w, b) * Tensor(c)), [x, w, b])


def _check_relu(rng):
    x = Tensor(_away_from_zero(rng.normal(size=(4, 5))), requires_grad=True)
    c = rng.normal(size=(4, 5))
    return gradcheck(lambda: tsum(relu(x) * Tensor(c)), [x])


def _check_softmax(rng):
    x = Tensor(rng.normal(size=(4, 6)), requires_grad=True)
    c = rng.normal(size=(4, 6))
    return gradcheck(lambda: tsum(softmax(x, axis=-1) * Tensor(c)), [x])


def _check_attention_pool(rng):
    X = Tensor(rng.normal(size=(5, 8)), requires_grad=True)
    w = Tensor(rng.normal(size=8) * 0.5, requires_grad=True)
    c_f = rng.normal(size=8)
    c_a = rng.normal(size=5)

    def fn():
        f, a = attention_pool(X, w)
        return tsum(f * Tensor(c_f)) + tsum(a * Tensor(c_a))

    return gradcheck(fn, [X, w])


def _complete_digraph(n: int):
    edges = [(i, j) for i in range(n) for j in range(n) if i != j]
    index = np.array(edges, dtype=np.intp)
    values = np.full(len(edges), 1.0 / (n - 1))
    return index, values


def _check_gconv_intra(rng):
    n, d, de = 4, 6, 3
    index, values = _complete_digraph(n)
    H = Tensor(rng.normal(size=(n, d)), requires_grad=True)
    E = Tensor(rng.normal(size=(len(index), de)), requires_grad=True)
    w_self = Tensor(rng.normal(size=(d, d)) * 0.5, requires_grad=True)
    w_msg = Tensor(rng.normal(size=(d + de, d)) * 0.5, requires_grad=True)
    c = rng.normal(size=(n, d))
    return gradcheck(
        lambda: tsum(gconv_intra(values, index, H, E, w_self, w_msg) * Tensor(c)),
        [H, E, w_self, w_msg],
    )


def _check_gconv_cross(rng):
    n1, n2, d = 4, 5, 6
    S = Tensor(rng.uniform(0.1, 0.9, size=(n1, n2)), requires_grad=True)
    H1 = Tensor(rng.normal(size=(n1, d)), requires_grad=True)
    H2 = Tensor(rng.normal(size=(n2, d)), requires_grad=True)
    w_self = Tensor(rng.normal(size=(d, d)) * 0.5, requires_grad=True)
    w_cross = Tensor(rng.normal(size=(d, d)) * 0.5, requires_grad=True)
    c = rng.normal(size=(n1, d))
    return gradcheck(
        lambda: tsum(gconv_cross(S, H1, H2, w_self, w_cross) * Tensor(c)),
        [S, H1, H2, w_self, w_cross],
    )


def _check_node_embedding(rng):
    from ..encoder import node_embedding_forward
    from .model import Model

    tiny = {
        "sem_proj": 3,
        "text_proj": 4,
        "vis_proj": 3,
        "node_dim": 5,
        "edge_proj": 3,
        "layout_dim": 4,
    }
    model = Model.init(int(rng.integers(1 << 31)), tiny)
    n = 2
    sem = Tensor(rng.normal(size=(n, model.hyper["sem_in"])), requires_grad=True)
    text = Tensor(rng.normal(size=(n, model.hyper["text_in"])), requires_grad=True)
    vis = Tensor(rng.normal(size=(n, model.hyper["vis_in"])), requires_grad=True)
    geo = Tensor(rng.normal(size=(n, model.hyper["geo_in"])), requires_grad=True)
    c = rng.normal(size=(n, model.hyper["node_dim"]))
    wrt = [sem, text, vis, geo] + [
        model.param(name)
        for name in (
            "enc.sem.w", "enc.sem.b", "enc.text.w", "enc.text.b",
            "enc.vis.w", "enc.vis.b", "enc.fuse.w", "enc.fuse.b",
            "enc.node.w", "enc.node.b",
        )
    ]
    return gradcheck(
        lambda: tsum(node_embedding_forward(model, sem, text, vis, geo) * Tensor(c)),
        wrt,
    )


def _check_perm_xent_loss(rng):
    S = Tensor(rng.uniform(0.05, 0.95, size=(4, 4)), requires_grad=True)
    G = rng.uniform(0.0, 1.0, size=(4, 4))
    return gradcheck(lambda: perm_xent_loss(S, G), [S])


def _check_sinkhorn(rng):
    M = Tensor(rng.normal(size=(4, 4)), requires_grad=True)
    c = rng.normal(size=(4, 4))
    return gradcheck(
        lambda: tsum(sinkhorn(M, tau=1.0, iters=15) * Tensor(c)), [M]
    )


_CHECKS = {
    "linear": _check_linear,
    "relu": _check_relu,
    "softmax": _check_softmax,
    "attention_pool": _check_attention_pool,
    "gconv_intra": _check_gconv_intra,
    "gconv_cross": _check_gconv_cross,
    "node_embedding": _check_node_embedding,
    "perm_xent_loss": _check_perm_xent_loss,
    "sinkhorn": _check_sinkhorn,
}


def run_gradcheck_suite(instances: int = 20, seed: int = 2024) -> dict:
    """Max relative gradient error per layer over seeded random instances."""
    results = {}
    for name in SUITE_LAYERS:
        check = _CHECKS[name]
        worst = 0.0
        for i in range(instances):
            rng = np.random.default_rng(seed * 1000 + i)
            worst = max(worst, check(rng))
        results[name] = worst
    return results
