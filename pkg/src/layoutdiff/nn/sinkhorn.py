"""Differentiable Sinkhorn normalization.

Alternating row/column normalization of exp(M/tau) toward prescribed
marginals.  With uniform marginals on a square matrix the result is
doubly stochastic; the matcher passes padded matrices whose slack
row/column carry the opposite side's node count so that every real row
and column still sums to 1.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, as_tensor, exp, tsum

__all__ = ["sinkhorn"]


def sinkhorn(M, tau: float = 1.0, iters: int = 50, row_marginals=None, col_marginals=None) -> Tensor:
    """Normalize a score matrix into a transport plan.

    Runs `iters` full row+column passes over exp(M/tau).  Overflow is
    guarded by subtracting the per-row max before exponentiation; row
    normalization cancels any per-row scaling, so the guard does not
    change the result and carries no gradient.
    """
    if tau <= 0.0:
        raise ValueError("sinkhorn: tau must be positive")
    if iters < 1:
        raise ValueError("sinkhorn: iters must be >= 1")
    M = as_tensor(M)
    n, m = M.shape
    r = np.ones(n) if row_marginals is None else np.asarray(row_marginals, dtype=np.float64)
    c = np.ones(m) if col_marginals is None else np.asarray(col_marginals, dtype=np.float64)
    if r.shape != (n,) or c.shape != (m,):
        raise ValueError("sinkhorn: marginal lengths must match matrix shape")

    shift = M.data.max(axis=1, keepdims=True)
    P = exp((M - Tensor(shift)) * (1.0 / tau))
    r_col = Tensor(r[:, None])
    c_row = Tensor(c[None, :])
    for _ in range(iters):
        P = P * (r_col / tsum(P, axis=1, keepdims=True))
        P = P * (c_row / tsum(P, axis=0, keepdims=True))
    return P
