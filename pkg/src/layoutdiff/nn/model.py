"""Learned parameter set and its binary serialization format.

A Model owns every weight of the matcher and layout encoder as named
Parameters, plus the hyperparameter table that fixes layer dimensions
and matching defaults.  Files round-trip bit-exactly: magic "LGM1",
version, parameter records (name, dims, little-endian float64 data),
then a canonical-JSON hyperparameter table.
"""

from __future__ import annotations

import json
import struct
from collections import OrderedDict

import numpy as np

from .tensor import Tensor

__all__ = ["Parameter", "Model", "DEFAULT_HYPER", "MAGIC", "FORMAT_VERSION"]

MAGIC = b"LGM1"
FORMAT_VERSION = 1

DEFAULT_HYPER = {
    "sem_in": 11,
    "text_in": 128,
    "vis_in": 18,
    "geo_in": 5,
    "edge_in": 7,
    "sem_proj": 16,
    "text_proj": 64,
    "vis_proj": 16,
    "node_dim": 64,
    "edge_proj": 16,
    "layout_dim": 64,
    "K": 2,
    "tau": 1.0,
    "sinkhorn_iters": 50,
    "include_semantic": True,
}


class Parameter:
    """A named learnable tensor."""

    __slots__ = ("name", "tensor")

    def __init__(self, name: str, tensor: Tensor):
        self.name = name
        self.tensor = tensor

    @property
    def value(self) -> np.ndarray:
        return self.tensor.data

    @property
    def grad(self) -> np.ndarray | None:
        return self.tensor.grad

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.tensor.data.shape})"


def _parameter_plan(hyper: dict) -> list[tuple[str, tuple[int, ...], int]]:
    """Every parameter's name, shape and the fan-in used for init bounds."""
    sd, td, vd = hyper["sem_proj"], hyper["text_proj"], hyper["vis_proj"]
    nd, ed, ld = hyper["node_dim"], hyper["edge_proj"], hyper["layout_dim"]
    fuse_in = sd + td + vd
    node_in = nd + hyper["geo_in"]
    msg_in = nd + ed
    rel_in = nd + ed + nd
    out_in = nd + ld
    return [
        ("enc.sem.w", (hyper["sem_in"], sd), hyper["sem_in"]),
        ("enc.sem.b", (sd,), hyper["sem_in"]),
        ("enc.text.w", (hyper["text_in"], td), hyper["text_in"]),
        ("enc.text.b", (td,), hyper["text_in"]),
        ("enc.vis.w", (hyper["vis_in"], vd), hyper["vis_in"]),
        ("enc.vis.b", (vd,), hyper["vis_in"]),
        ("enc.fuse.w", (fuse_in, nd), fuse_in),
        ("enc.fuse.b", (nd,), fuse_in),
        ("enc.node.w", (node_in, nd), node_in),
        ("enc.node.b", (nd,), node_in),
        ("edge.w", (hyper["edge_in"], ed), hyper["edge_in"]),
        ("edge.b", (ed,), hyper["edge_in"]),
        ("match.conv1.self", (nd, nd), nd),
        ("match.conv1.msg", (msg_in, nd), msg_in),
        ("match.cross.self", (nd, nd), nd),
        ("match.cross.cross", (nd, nd), nd),
        ("match.conv2.self", (nd, nd), nd),
        ("match.conv2.msg", (msg_in, nd), msg_in),
        ("match.slack", (1,), 1),
        ("head.rel.w", (rel_in, ld), rel_in),
        ("head.rel.b", (ld,), rel_in),
        ("head.attn_node", (nd,), nd),
        ("head.attn_rel", (ld,), ld),
        ("head.out.w", (out_in, ld), out_in),
        ("head.out.b", (ld,), out_in),
    ]


class Model:
    """Named parameters plus the hyperparameter table."""

    def __init__(self, hyper: dict, params: "OrderedDict[str, Parameter]"):
        self.hyper = dict(hyper)
        self._params = params

    @classmethod
    def init(cls, seed: int, hyper: dict | None = None) -> "Model":
        """Fresh model with uniform(+-1/sqrt(fan_in)) seeded weights."""
        merged = dict(DEFAULT_HYPER)
        if hyper:
            merged.update(hyper)
        rng = np.random.default_rng(seed)
        params: OrderedDict[str, Parameter] = OrderedDict()
        for name, shape, fan_in in _parameter_plan(merged):
            bound = 1.0 / np.sqrt(fan_in)
            data = rng.uniform(-bound, bound, size=shape)
            params[name] = Parameter(name, Tensor(data, requires_grad=True))
        return cls(merged, params)

    def param(self, name: str) -> Tensor:
        return self._params[name].tensor

    def parameters(self) -> list[Parameter]:
        return list(self._params.values())

    def zero_grad(self) -> None:
        for p in self._params.values():
            p.tensor.grad = None

    @property
    def num_values(self) -> int:
        return sum(p.tensor.data.size for p in self._params.values())

    # -- serialization -----------------------------------------------------

    def to_bytes(self) -> bytes:
        chunks = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(self._params))]
        for p in self._params.values():
            name = p.name.encode("utf-8")
            data = p.tensor.data
            chunks.append(struct.pack("<I", len(name)))
            chunks.append(name)
            chunks.append(struct.pack("<I", data.ndim))
            chunks.append(struct.pack(f"<{data.ndim}I", *data.shape))
            chunks.append(np.ascontiguousarray(data, dtype="<f8").tobytes())
        table = json.dumps(self.hyper, sort_keys=True, separators=(",", ":")).encode("utf-8")
        chunks.append(struct.pack("<I", len(table)))
        chunks.append(table)
        return b"".join(chunks)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Model":
        reader = _Reader(blob)
        if reader.take(4) != MAGIC:
            raise ValueError("not a model file (bad magic)")
        version, count = struct.unpack("<II", reader.take(8))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version}")
        params: OrderedDict[str, Parameter] = OrderedDict()
        for _ in range(count):
            (name_len,) = struct.unpack("<I", reader.take(4))
            name = reader.take(name_len).decode("utf-8")
            (rank,) = struct.unpack("<I", reader.take(4))
            shape = struct.unpack(f"<{rank}I", reader.take(4 * rank))
            size = int(np.prod(shape)) if rank else 1
            data = np.frombuffer(reader.take(8 * size), dtype="<f8").reshape(shape).copy()
            if name in params:
                raise ValueError(f"duplicate parameter {name}")
            params[name] = Parameter(name, Tensor(data, requires_grad=True))
        (table_len,) = struct.unpack("<I", reader.take(4))
        hyper = json.loads(reader.take(table_len).decode("utf-8"))
        if reader.remaining():
            raise ValueError("trailing bytes after model data")
        return cls(hyper, params)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "Model":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise ValueError("truncated model file")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def remaining(self) -> int:
        return len(self.blob) - self.pos
