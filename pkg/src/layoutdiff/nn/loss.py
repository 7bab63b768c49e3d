"""Matching loss over padded correspondence matrices."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, as_tensor, clip, log, tsum

__all__ = ["perm_xent_loss"]

_CLAMP = 1e-9


def perm_xent_loss(S_hat, S_gt) -> Tensor:
    """Cross-entropy between target correspondences and a transport plan.

    Computes -sum(G * log S) over the padded (n1+1)x(n2+1) matrix,
    normalized by the total target mass.  Cells with zero target
    contribute nothing directly; Sinkhorn's marginals make mass placed
    on a target cell mass removed from its competitors, so no explicit
    negative term is needed.  Fractional targets (split children at 1/m,
    merge sources sharing a column) pull the plan toward balanced mass
    because -sum(t log p) is minimized at p proportional to t.  The
    slack-slack corner is excluded: its capacity is fixed by the rest of
    the plan and can exceed 1.  Predictions are clamped to [1e-9, 1]
    before the log.
    """
    S_hat = as_tensor(S_hat)
    G = np.asarray(S_gt.data if isinstance(S_gt, Tensor) else S_gt, dtype=np.float64)
    if S_hat.shape != G.shape:
        raise ValueError(f"loss: prediction shape {S_hat.shape} != target shape {G.shape}")
    if G.min() < 0.0 or G.max() > 1.0:
        raise ValueError("loss: target entries must lie in [0,1]")
    weights = G.copy()
    weights[-1, -1] = 0.0
    mass = weights.sum()
    if mass == 0.0:
        return tsum(S_hat * 0.0)
    P = clip(S_hat, _CLAMP, 1.0)
    total = tsum(Tensor(weights) * log(P))
    return total * (-1.0 / mass)
