"""Differentiable layers for the layout matcher.

All layers are pure functions over Tensors.  Graph structure (adjacency
weights, edge endpoints) enters as plain numpy constants; everything
learnable or feature-valued is a Tensor so gradients flow to it.
"""

from __future__ import annotations

import numpy as np

from .tensor import (
    Tensor,
    as_tensor,
    concat,
    gather_rows,
    matmul,
    relu,
    segment_sum,
    softmax,
    zeros,
)

__all__ = [
    "linear",
    "relu",
    "softmax",
    "attention_pool",
    "gconv_intra",
    "gconv_cross",
]


def linear(x, weight, bias=None) -> Tensor:
    """Affine map y = x W + b for 1-D or 2-D x."""
    x, weight = as_tensor(x), as_tensor(weight)
    if x.shape[-1] != weight.shape[0]:
        raise ValueError(
            f"linear: input width {x.shape[-1]} does not match weight rows {weight.shape[0]}"
        )
    y = matmul(x, weight)
    if bias is not None:
        y = y + as_tensor(bias)
    return y


def attention_pool(X, w) -> tuple[Tensor, Tensor]:
    """Pool k row vectors into one by learned softmax attention.

    Returns (pooled d-vector, attention weights of length k).  An empty
    input pools to the zero vector with empty weights.
    """
    X, w = as_tensor(X), as_tensor(w)
    k = X.shape[0]
    if k == 0:
        return zeros(X.shape[1]), zeros(0)
    scores = matmul(X, w)
    attn = softmax(scores, axis=0)
    pooled = matmul(attn, X)
    return pooled, attn


def gconv_intra(adj_values, edge_index, H, edge_proj, w_self, w_msg) -> Tensor:
    """One intra-graph convolution pass.

    H'_i = ReLU(h_i W_self + sum_j A_ij [h_j || e_ij] W_msg), where e_ij
    is the projected edge feature for edge (i, j).  `adj_values` holds
    A_ij per edge in `edge_index` order; rows of A are normalized by the
    graph builder.  With no edges the layer is a pure self-transform.
    """
    H = as_tensor(H)
    n = H.shape[0]
    out = matmul(H, as_tensor(w_self))
    if len(edge_index):
        edge_index = np.asarray(edge_index, dtype=np.intp)
        receivers, senders = edge_index[:, 0], edge_index[:, 1]
        msg_in = concat([gather_rows(H, senders), as_tensor(edge_proj)], axis=1)
        msgs = matmul(msg_in, as_tensor(w_msg))
        weighted = msgs * Tensor(np.asarray(adj_values, dtype=np.float64)[:, None])
        out = out + segment_sum(weighted, receivers, n)
    return relu(out)


def gconv_cross(S, H_self, H_other, w_self, w_cross) -> Tensor:
    """Cross-graph convolution weighted by a soft correspondence.

    H'_i = ReLU(h_i W_self + (sum_j S_ij h'_j) W_cross).  With S = 0 the
    cross term vanishes and the layer degenerates to a self-transform.
    """
    S, H_self, H_other = as_tensor(S), as_tensor(H_self), as_tensor(H_other)
    if S.shape != (H_self.shape[0], H_other.shape[0]):
        raise ValueError(
            f"gconv_cross: correspondence shape {S.shape} does not match "
            f"node counts ({H_self.shape[0]}, {H_other.shape[0]})"
        )
    pulled = matmul(S, H_other)
    return relu(matmul(H_self, as_tensor(w_self)) + matmul(pulled, as_tensor(w_cross)))
