"""Node embeddings and the whole-layout embedding.

Each block's four feature families are projected, fused and combined
with raw geometry into one node vector.  The layout embedding pools
intra-graph node features and per-edge relation features by learned
attention and projects the concatenation to a fixed-width vector used
as a layout-similarity diagnostic.
"""

from __future__ import annotations

import numpy as np

from .layoutgraph import LayoutGraph
from .nn import Model, Tensor, attention_pool, concat, gconv_intra, linear
from .nn.layers import relu
from .nn.tensor import gather_rows, zeros

__all__ = [
    "node_embedding_forward",
    "embed_nodes",
    "project_edges",
    "encode_layout",
    "layout_similarity",
]


def node_embedding_forward(model: Model, sem, text, vis, geo) -> Tensor:
    """Compose per-node embeddings from feature Tensors.

    Semantic, text and visual features are projected separately, fused
    through one layer, then concatenated with the raw 5-dim geometry
    (already normalized to [0,1]) and projected to the node width.
    """
    e_s = linear(sem, model.param("enc.sem.w"), model.param("enc.sem.b"))
    e_t = linear(text, model.param("enc.text.w"), model.param("enc.text.b"))
    e_v = linear(vis, model.param("enc.vis.w"), model.param("enc.vis.b"))
    fused = relu(linear(concat([e_s, e_t, e_v], axis=1), model.param("enc.fuse.w"), model.param("enc.fuse.b")))
    return relu(linear(concat([fused, geo], axis=1), model.param("enc.node.w"), model.param("enc.node.b")))


def _feature_tensors(graph: LayoutGraph, model: Model) -> tuple[Tensor, Tensor, Tensor, Tensor]:
    for name, width, got in (
        ("sem_in", model.hyper["sem_in"], graph.sem.shape[1]),
        ("text_in", model.hyper["text_in"], graph.text.shape[1]),
        ("vis_in", model.hyper["vis_in"], graph.vis.shape[1]),
        ("geo_in", model.hyper["geo_in"], graph.geo.shape[1]),
    ):
        if width != got:
            raise ValueError(f"model expects {name}={width} but graph provides {got}")
    return Tensor(graph.sem), Tensor(graph.text), Tensor(graph.vis), Tensor(graph.geo)


def embed_nodes(graph: LayoutGraph, model: Model) -> Tensor:
    """One embedding row per block, in block order."""
    sem, text, vis, geo = _feature_tensors(graph, model)
    return node_embedding_forward(model, sem, text, vis, geo)


def project_edges(graph: LayoutGraph, model: Model) -> Tensor:
    """Project raw 7-dim edge features to the shared edge width."""
    if graph.n_edges == 0:
        return zeros((0, model.hyper["edge_proj"]))
    return linear(Tensor(graph.edge_feats), model.param("edge.w"), model.param("edge.b"))


def encode_layout(graph: LayoutGraph, model: Model) -> Tensor:
    """Whole-layout embedding via attention pooling.

    Node branch: intra-graph convolution over node embeddings, pooled by
    a learned attention vector.  Relation branch: each edge's
    (sender, projected edge, receiver) triple through one layer, pooled
    the same way; with no edges this branch contributes zeros.  An empty
    graph encodes to the zero vector.
    """
    if graph.n == 0:
        return zeros(model.hyper["layout_dim"])
    H0 = embed_nodes(graph, model)
    E = project_edges(graph, model)
    H1 = gconv_intra(
        graph.adj_values,
        graph.edge_index,
        H0,
        E,
        model.param("match.conv1.self"),
        model.param("match.conv1.msg"),
    )
    f_node, _ = attention_pool(H1, model.param("head.attn_node"))
    if graph.n_edges:
        senders = graph.edge_index[:, 0]
        receivers = graph.edge_index[:, 1]
        triples = concat([gather_rows(H0, senders), E, gather_rows(H0, receivers)], axis=1)
        rel = relu(linear(triples, model.param("head.rel.w"), model.param("head.rel.b")))
        f_rel, _ = attention_pool(rel, model.param("head.attn_rel"))
    else:
        f_rel = zeros(model.hyper["layout_dim"])
    joint = concat([f_node, f_rel], axis=0)
    return linear(joint, model.param("head.out.w"), model.param("head.out.b"))


def layout_similarity(f1, f2) -> float:
    """Cosine similarity; zero vectors compare as 0."""
    a = np.asarray(f1.data if isinstance(f1, Tensor) else f1, dtype=np.float64)
    b = np.asarray(f2.data if isinstance(f2, Tensor) else f2, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))
