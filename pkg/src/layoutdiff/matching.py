"""Cross-graph block matching.

Runs the iterative matcher: one intra-graph convolution per graph, then
K rounds of cross-graph aggregation weighted by the previous soft
correspondence, a second intra-graph convolution, a scaled dot-product
affinity padded with a learned slack score, and Sinkhorn normalization.
The soft result is discretized into one-to-one or many-to-many block
correspondences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .docmodel import Document
from .encoder import embed_nodes, project_edges
from .layoutgraph import LayoutGraph, build_graph
from .nn import Model, Tensor, gconv_cross, gconv_intra, hungarian, sinkhorn
from .nn.tensor import concat, matmul, reshape, transpose

__all__ = [
    "MatchError",
    "MatchOptions",
    "SoftCorrespondence",
    "MatchSet",
    "match_graphs",
    "padded_marginals",
    "discretize",
    "match_documents",
]

_LOG_FLOOR = 1e-12
_DUMMY_COST = 30.0  # exceeds -ln(_LOG_FLOOR), so real cells win when available


class MatchError(ValueError):
    """Raised when matching cannot proceed (e.g. an empty graph)."""


@dataclass(frozen=True)
class MatchOptions:
    """Decision knobs for discretization plus matcher overrides."""

    mode: str = "one2one"
    K: int | None = None
    tau: float | None = None
    sinkhorn_iters: int | None = None
    theta: float = 0.10
    alpha: float = 0.5

    def __post_init__(self) -> None:
        if self.mode not in ("one2one", "many2many"):
            raise ValueError(f"unknown match mode {self.mode!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0,1]")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0,1]")


@dataclass(frozen=True, eq=False)
class SoftCorrespondence:
    """Padded (n1+1)x(n2+1) soft match matrix with slack row/column.

    Real rows and columns each sum to 1 after Sinkhorn; the slack
    row/column absorb unmatched mass.  The slack-slack corner aggregates
    all remaining capacity and may exceed 1 when the documents share
    many matched blocks.
    """

    ids1: tuple[str, ...]
    ids2: tuple[str, ...]
    S: np.ndarray

    def __post_init__(self) -> None:
        n1, n2 = len(self.ids1), len(self.ids2)
        if self.S.shape != (n1 + 1, n2 + 1):
            raise ValueError(
                f"correspondence shape {self.S.shape} does not match "
                f"{n1}+1 x {n2}+1 blocks"
            )

    @property
    def real(self) -> np.ndarray:
        return self.S[: len(self.ids1), : len(self.ids2)]


@dataclass(frozen=True)
class MatchSet:
    """Discrete correspondence: every block id lands in exactly one category."""

    pairs: tuple[tuple[str, str, float], ...] = ()
    splits: tuple[tuple[str, tuple[str, ...]], ...] = ()
    merges: tuple[tuple[tuple[str, ...], str], ...] = ()
    deleted: tuple[str, ...] = ()
    inserted: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        side1 = [p[0] for p in self.pairs]
        side1 += [s[0] for s in self.splits]
        side1 += [i for m in self.merges for i in m[0]]
        side1 += list(self.deleted)
        side2 = [p[1] for p in self.pairs]
        side2 += [j for s in self.splits for j in s[1]]
        side2 += [m[1] for m in self.merges]
        side2 += list(self.inserted)
        for label, ids in (("document 1", side1), ("document 2", side2)):
            if len(ids) != len(set(ids)):
                raise ValueError(f"block ids of {label} repeat across categories")
        for _, _, score in self.pairs:
            if not 0.0 <= score <= 1.0:
                raise ValueError("pair scores must lie in [0,1]")

    def to_dict(self) -> dict:
        return {
            "pairs": [
                {"a": a, "b": b, "score": round(float(s), 9)} for a, b, s in self.pairs
            ],
            "splits": [{"a": a, "b": list(bs)} for a, bs in self.splits],
            "merges": [{"a": list(as_), "b": b} for as_, b in self.merges],
            "deleted": list(self.deleted),
            "inserted": list(self.inserted),
        }

    @property
    def pair_map(self) -> dict:
        return {a: b for a, b, _ in self.pairs}


def padded_marginals(n1: int, n2: int) -> tuple[np.ndarray, np.ndarray]:
    """Target marginals giving every real row/column unit mass.

    The slack row carries the whole opposite side's capacity so the
    padded matrix has a feasible transport plan for any number of
    insertions and deletions.
    """
    r = np.ones(n1 + 1)
    r[n1] = n2
    c = np.ones(n2 + 1)
    c[n2] = n1
    return r, c


def _pad_with_slack(M: Tensor, slack: Tensor, n1: int, n2: int) -> Tensor:
    slack2d = reshape(slack, (1, 1))
    right = slack2d * Tensor(np.ones((n1, 1)))
    bottom = slack2d * Tensor(np.ones((1, n2 + 1)))
    return concat([concat([M, right], axis=1), bottom], axis=0)


def match_graphs(
    g1: LayoutGraph,
    g2: LayoutGraph,
    model: Model,
    K: int | None = None,
    tau: float | None = None,
    sinkhorn_iters: int | None = None,
) -> Tensor:
    """Soft correspondence between two layout graphs, as a padded Tensor.

    Weights are shared between the two graphs; graph 2 sees the running
    correspondence transposed.  The first round's cross messages vanish
    because the correspondence starts at zero.
    """
    if g1.n == 0 or g2.n == 0:
        raise MatchError("nothing to match: empty layout graph")
    K = int(model.hyper["K"]) if K is None else int(K)
    tau = float(model.hyper["tau"]) if tau is None else float(tau)
    iters = int(model.hyper["sinkhorn_iters"]) if sinkhorn_iters is None else int(sinkhorn_iters)
    if K < 1:
        raise ValueError("K must be >= 1")
    d = float(model.hyper["node_dim"])
    n1, n2 = g1.n, g2.n
    r, c = padded_marginals(n1, n2)

    E1, E2 = project_edges(g1, model), project_edges(g2, model)
    w1, wm = model.param("match.conv1.self"), model.param("match.conv1.msg")
    h1 = gconv_intra(g1.adj_values, g1.edge_index, embed_nodes(g1, model), E1, w1, wm)
    h2 = gconv_intra(g2.adj_values, g2.edge_index, embed_nodes(g2, model), E2, w1, wm)

    cs, cc = model.param("match.cross.self"), model.param("match.cross.cross")
    w2, wm2 = model.param("match.conv2.self"), model.param("match.conv2.msg")
    slack = model.param("match.slack")

    S_real = Tensor(np.zeros((n1, n2)))
    S_pad = None
    for _ in range(K):
        x1 = gconv_cross(S_real, h1, h2, cs, cc)
        x2 = gconv_cross(transpose(S_real), h2, h1, cs, cc)
        m1 = gconv_intra(g1.adj_values, g1.edge_index, x1, E1, w2, wm2)
        m2 = gconv_intra(g2.adj_values, g2.edge_index, x2, E2, w2, wm2)
        M = matmul(m1, transpose(m2)) * (1.0 / np.sqrt(d))
        S_pad = sinkhorn(_pad_with_slack(M, slack, n1, n2), tau, iters, r, c)
        S_real = S_pad[(slice(0, n1), slice(0, n2))]
    return S_pad


def _square_cost(R: np.ndarray) -> np.ndarray:
    n1, n2 = R.shape
    n = max(n1, n2)
    cost = np.full((n, n), _DUMMY_COST)
    cost[:n1, :n2] = -np.log(np.clip(R, _LOG_FLOOR, None))
    return cost


def _one2one(sc: SoftCorrespondence, theta: float) -> MatchSet:
    n1, n2 = len(sc.ids1), len(sc.ids2)
    R = sc.real
    cols = hungarian(_square_cost(R))
    pairs, deleted = [], []
    used2: set[int] = set()
    for i in range(n1):
        j = int(cols[i])
        ok = (
            j < n2
            and R[i, j] >= theta
            and sc.S[i, n2] <= R[i, j]
            and sc.S[n1, j] <= R[i, j]
        )
        if ok:
            pairs.append((sc.ids1[i], sc.ids2[j], float(min(R[i, j], 1.0))))
            used2.add(j)
        else:
            deleted.append(sc.ids1[i])
    inserted = [sc.ids2[j] for j in range(n2) if j not in used2]
    return MatchSet(
        pairs=tuple(pairs),
        deleted=tuple(deleted),
        inserted=tuple(inserted),
    )


def _components(keep: np.ndarray) -> list[tuple[list[int], list[int]]]:
    """Connected components of the bipartite kept-cell graph."""
    n1, n2 = keep.shape
    seen_r, seen_c = set(), set()
    comps = []
    for start in range(n1):
        if start in seen_r or not keep[start].any():
            continue
        rows, cols, stack = set(), set(), [("r", start)]
        while stack:
            side, k = stack.pop()
            if side == "r":
                if k in rows:
                    continue
                rows.add(k)
                for j in np.flatnonzero(keep[k]):
                    stack.append(("c", int(j)))
            else:
                if k in cols:
                    continue
                cols.add(k)
                for i in np.flatnonzero(keep[:, k]):
                    stack.append(("r", int(i)))
        seen_r |= rows
        seen_c |= cols
        comps.append((sorted(rows), sorted(cols)))
    return comps


def _many2many(sc: SoftCorrespondence, theta: float, alpha: float) -> MatchSet:
    n1, n2 = len(sc.ids1), len(sc.ids2)
    R = sc.real
    rowmax = R.max(axis=1, initial=0.0)
    colmax = R.max(axis=0, initial=0.0)
    keep = (R >= theta) & (R >= alpha * rowmax[:, None]) & (R >= alpha * colmax[None, :])

    pairs, splits, merges, deleted, inserted = [], [], [], [], []
    matched_r, matched_c = set(), set()
    for rows, cols in _components(keep):
        if len(rows) == 1 and len(cols) == 1:
            i, j = rows[0], cols[0]
            pairs.append((sc.ids1[i], sc.ids2[j], float(min(R[i, j], 1.0))))
        elif len(rows) == 1:
            splits.append((sc.ids1[rows[0]], tuple(sc.ids2[j] for j in cols)))
        elif len(cols) == 1:
            merges.append((tuple(sc.ids1[i] for i in rows), sc.ids2[cols[0]]))
        else:
            # overlapping split/merge evidence: fall back to assignment
            sub = R[np.ix_(rows, cols)]
            sub_cols = hungarian(_square_cost(sub))
            claimed: set[int] = set()
            for a, i in enumerate(rows):
                jj = int(sub_cols[a])
                if jj < len(cols) and sub[a, jj] >= theta:
                    j = cols[jj]
                    pairs.append((sc.ids1[i], sc.ids2[j], float(min(R[i, j], 1.0))))
                    claimed.add(j)
                else:
                    deleted.append(sc.ids1[i])
            inserted.extend(sc.ids2[j] for j in cols if j not in claimed)
        matched_r |= set(rows)
        matched_c |= set(cols)
    deleted.extend(sc.ids1[i] for i in range(n1) if i not in matched_r)
    inserted.extend(sc.ids2[j] for j in range(n2) if j not in matched_c)
    return MatchSet(
        pairs=tuple(pairs),
        splits=tuple(splits),
        merges=tuple(merges),
        deleted=tuple(sorted(deleted, key=lambda b: sc.ids1.index(b))),
        inserted=tuple(sorted(inserted, key=lambda b: sc.ids2.index(b))),
    )


def discretize(sc: SoftCorrespondence, mode: str = "one2one", theta: float = 0.10, alpha: float = 0.5) -> MatchSet:
    """Turn a soft correspondence into discrete decisions.

    one2one: minimum-cost assignment on -ln S over real cells; a pair is
    demoted to deleted+inserted when its score falls below `theta` or is
    beaten by the slack mass of its row or column.  many2many: every
    cell at or above `theta` and within factor `alpha` of both its row
    and column maxima is kept, and connected groups of kept cells become
    pairs, splits, or merges.
    """
    if mode == "one2one":
        return _one2one(sc, theta)
    if mode == "many2many":
        return _many2many(sc, theta, alpha)
    raise ValueError(f"unknown match mode {mode!r}")


def match_documents(
    doc1: Document,
    doc2: Document,
    model: Model,
    options: MatchOptions = MatchOptions(),
    text_embeddings1: dict | None = None,
    text_embeddings2: dict | None = None,
) -> MatchSet:
    """Full document-to-document matching."""
    include_semantic = bool(model.hyper.get("include_semantic", True))
    g1 = build_graph(doc1, include_semantic, text_embeddings1)
    g2 = build_graph(doc2, include_semantic, text_embeddings2)
    if g1.n == 0 and g2.n == 0:
        return MatchSet()
    if g1.n == 0:
        return MatchSet(inserted=tuple(g2.block_ids))
    if g2.n == 0:
        return MatchSet(deleted=tuple(g1.block_ids))
    S = match_graphs(g1, g2, model, options.K, options.tau, options.sinkhorn_iters)
    sc = SoftCorrespondence(g1.block_ids, g2.block_ids, S.data)
    return discretize(sc, options.mode, options.theta, options.alpha)
