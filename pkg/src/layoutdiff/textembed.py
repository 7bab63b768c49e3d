"""Deterministic text embeddings for block matching.

The built-in embedder hashes character trigrams into a signed 128-bucket
vector, which keeps lightly edited text close in cosine while unrelated
text stays far.  Vectors produced by a real sentence encoder can be loaded
from a sidecar file instead and take precedence per block id.
"""

from __future__ import annotations

import unicodedata
from pathlib import Path

import numpy as np

from .hashing import fnv1a_64

EMBED_DIM = 128

_START = "␂"
_END = "␃"
_SIGN_SALT = b"\x01"


def embed_text(text: str) -> np.ndarray:
    """Embed a string as a unit-norm 128-vector; empty text gives zeros.

    The text is lowercased and NFC-normalized, then each character trigram
    of the boundary-padded string is hashed (FNV-1a 64) to a bucket, with
    the sign taken from the parity of a salted second hash.
    """
    vec = np.zeros(EMBED_DIM, dtype=np.float64)
    norm = unicodedata.normalize("NFC", text.lower())
    if not norm:
        return vec
    padded = _START + norm + _END
    for i in range(len(padded) - 2):
        gram = padded[i : i + 3].encode("utf-8")
        bucket = fnv1a_64(gram) % EMBED_DIM
        sign = 1.0 if fnv1a_64(gram + _SIGN_SALT) % 2 == 0 else -1.0
        vec[bucket] += sign
    length = float(np.linalg.norm(vec))
    if length > 0:
        vec /= length
    return vec


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; zero vectors compare as 0."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def load_external_embeddings(path: str | Path) -> dict[str, np.ndarray]:
    """Load per-block vectors from a file of `block_id<TAB>f1 ... f128` lines.

    Vectors are L2-normalized on load (zero rows stay zero).  Blocks absent
    from the file fall back to :func:`embed_text` downstream.
    """
    out: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ValueError(f"line {lineno}: expected `block_id<TAB>floats`")
            block_id, payload = line.split("\t", 1)
            values = payload.split()
            if len(values) != EMBED_DIM:
                raise ValueError(
                    f"line {lineno} (block {block_id!r}): expected {EMBED_DIM} floats, "
                    f"got {len(values)}"
                )
            vec = np.array([float(v) for v in values], dtype=np.float64)
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"line {lineno} (block {block_id!r}): non-finite value")
            length = float(np.linalg.norm(vec))
            if length > 0:
                vec /= length
            out[block_id] = vec
    return out
