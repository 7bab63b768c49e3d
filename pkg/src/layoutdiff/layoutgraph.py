"""Attributed layout graphs over document blocks.

Nodes carry the four per-block feature families (semantic one-hot,
hashed text embedding, normalized geometry, pooled visual statistics);
directed edges carry the 7-dim pairwise geometry vector.  Multi-page
documents are flattened onto one canvas by stacking pages vertically.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .docmodel import Block, Document
from .features import (
    EDGE_DIM,
    GEOMETRIC_DIM,
    SEMANTIC_DIM,
    VISUAL_DIM,
    edge_feature,
    geometric_feature,
    pool_visual,
    semantic_onehot,
)
from .textembed import EMBED_DIM, embed_text

__all__ = ["LayoutGraph", "build_graph", "COMPLETE_GRAPH_LIMIT", "KNN_NEIGHBORS"]

COMPLETE_GRAPH_LIMIT = 25
KNN_NEIGHBORS = 10


@dataclass(frozen=True, eq=False)
class LayoutGraph:
    """Feature matrices plus a directed edge list with row-normalized weights."""

    block_ids: tuple[str, ...]
    sem: np.ndarray
    text: np.ndarray
    geo: np.ndarray
    vis: np.ndarray
    edge_index: np.ndarray
    edge_feats: np.ndarray
    adj_values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.block_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edge_index)

    def as_dict(self) -> dict:
        return {
            "block_ids": list(self.block_ids),
            "semantic": self.sem.tolist(),
            "text": self.text.tolist(),
            "geometric": self.geo.tolist(),
            "visual": self.vis.tolist(),
            "edges": [
                {
                    "src": int(i),
                    "dst": int(j),
                    "feature": self.edge_feats[e].tolist(),
                    "weight": float(self.adj_values[e]),
                }
                for e, (i, j) in enumerate(self.edge_index)
            ],
        }


def _flattened_blocks(doc: Document) -> tuple[list[Block], float, float]:
    """Shift each block down by the heights of all earlier pages."""
    offsets = np.concatenate([[0.0], np.cumsum([p.height for p in doc.pages])])
    canvas_w = max(p.width for p in doc.pages)
    canvas_h = float(offsets[-1])
    shifted = [
        replace(b, bbox=b.bbox.shifted(0.0, float(offsets[b.page]))) for b in doc.blocks
    ]
    return shifted, canvas_w, canvas_h


def _page_edges(doc: Document, blocks: list[Block]) -> set[tuple[int, int]]:
    pages: dict[int, list[int]] = {}
    for idx, b in enumerate(doc.blocks):
        pages.setdefault(b.page, []).append(idx)
    edges: set[tuple[int, int]] = set()
    for members in pages.values():
        if len(members) <= COMPLETE_GRAPH_LIMIT:
            for i in members:
                for j in members:
                    if i != j:
                        edges.add((i, j))
        else:
            centers = np.array([[blocks[i].bbox.cx, blocks[i].bbox.cy] for i in members])
            for pos, i in enumerate(members):
                d = np.hypot(*(centers - centers[pos]).T)
                ranked = sorted(
                    (q for q in range(len(members)) if q != pos),
                    key=lambda q: (d[q], doc.blocks[members[q]].id),
                )
                for q in ranked[:KNN_NEIGHBORS]:
                    edges.add((i, members[q]))
    # reading-order links keep the graph connected across sparse pages
    for idx in range(len(doc.blocks) - 1):
        edges.add((idx, idx + 1))
        edges.add((idx + 1, idx))
    return edges


def build_graph(
    doc: Document,
    include_semantic: bool = True,
    text_embeddings: dict | None = None,
) -> LayoutGraph:
    """Build the attributed graph for one document.

    Pages with at most 25 blocks get a complete directed edge set; denser
    pages fall back to 10 nearest neighbors by centroid distance (ties by
    block id) plus reading-order predecessor/successor links.  Edge
    weights are 1/out-degree so each node's adjacency row sums to 1.
    `text_embeddings` maps block ids to externally supplied vectors;
    blocks not covered fall back to the built-in hashed embedder.
    """
    n = len(doc.blocks)
    if n == 0:
        return LayoutGraph(
            block_ids=(),
            sem=np.zeros((0, SEMANTIC_DIM)),
            text=np.zeros((0, EMBED_DIM)),
            geo=np.zeros((0, GEOMETRIC_DIM)),
            vis=np.zeros((0, VISUAL_DIM)),
            edge_index=np.zeros((0, 2), dtype=np.intp),
            edge_feats=np.zeros((0, EDGE_DIM)),
            adj_values=np.zeros(0),
        )

    blocks, canvas_w, canvas_h = _flattened_blocks(doc)
    sem = np.zeros((n, SEMANTIC_DIM))
    text = np.zeros((n, EMBED_DIM))
    geo = np.zeros((n, GEOMETRIC_DIM))
    vis = np.zeros((n, VISUAL_DIM))
    for idx, (orig, flat) in enumerate(zip(doc.blocks, blocks)):
        if include_semantic:
            sem[idx] = semantic_onehot(orig.class_label)
        if text_embeddings and orig.id in text_embeddings:
            text[idx] = np.asarray(text_embeddings[orig.id], dtype=np.float64)
        else:
            text[idx] = embed_text(orig.text)
        geo[idx] = geometric_feature(flat, canvas_w, canvas_h)
        vis[idx] = pool_visual(orig, doc.pages[orig.page].height)

    edge_set = _page_edges(doc, blocks)
    ordered = sorted(edge_set)
    edge_index = np.array(ordered, dtype=np.intp) if ordered else np.zeros((0, 2), dtype=np.intp)
    edge_feats = np.zeros((len(ordered), EDGE_DIM))
    for e, (i, j) in enumerate(ordered):
        edge_feats[e] = edge_feature(blocks[i], blocks[j], canvas_w, canvas_h)
    out_degree = np.bincount(edge_index[:, 0], minlength=n) if ordered else np.zeros(n, dtype=int)
    adj_values = (
        1.0 / out_degree[edge_index[:, 0]] if ordered else np.zeros(0)
    )
    return LayoutGraph(
        block_ids=tuple(b.id for b in doc.blocks),
        sem=sem,
        text=text,
        geo=geo,
        vis=vis,
        edge_index=edge_index,
        edge_feats=edge_feats,
        adj_values=adj_values,
    )
