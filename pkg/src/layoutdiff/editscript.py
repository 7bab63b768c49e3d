"""Edit distance and edit scripts over word tokens.

Word-level scripts drive the redline report; a character-level distance
is computed as a secondary signal with a vectorized row recurrence so
long paragraphs stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["EditOp", "EditScript", "word_tokens", "levenshtein", "apply_script", "char_distance"]


@dataclass(frozen=True)
class EditOp:
    """One step of an edit script.

    `a_pos`/`b_pos` index the source and target token streams; inserts
    carry no source token and deletes no target token.
    """

    kind: str  # keep | substitute | insert | delete
    a_pos: int | None
    b_pos: int | None
    old: str | None
    new: str | None

    def to_dict(self) -> dict:
        return {
            "op": self.kind,
            "a": self.a_pos,
            "b": self.b_pos,
            "old": self.old,
            "new": self.new,
        }


@dataclass(frozen=True)
class EditScript:
    """Ordered ops turning one token sequence into another."""

    ops: tuple[EditOp, ...]
    distance: int

    def to_dict(self) -> dict:
        return {"distance": self.distance, "ops": [op.to_dict() for op in self.ops]}


def word_tokens(text: str) -> list[str]:
    """Tokens split on Unicode whitespace runs."""
    return text.split()


def levenshtein(a: list[str], b: list[str]) -> tuple[int, EditScript]:
    """Unit-cost edit distance with a deterministic backtrace.

    On ties the backtrace prefers substitute over insert over delete, so
    identical inputs always yield identical scripts.
    """
    m, n = len(a), len(b)
    dist = np.zeros((m + 1, n + 1), dtype=np.int64)
    dist[:, 0] = np.arange(m + 1)
    dist[0, :] = np.arange(n + 1)
    for i in range(1, m + 1):
        cost = np.array([0 if a[i - 1] == tok else 1 for tok in b], dtype=np.int64)
        row = dist[i]
        prev = dist[i - 1]
        for j in range(1, n + 1):
            row[j] = min(prev[j - 1] + cost[j - 1], row[j - 1] + 1, prev[j] + 1)

    ops: list[EditOp] = []
    i, j = m, n
    while i > 0 or j > 0:
        here = dist[i, j]
        if i > 0 and j > 0 and here == dist[i - 1, j - 1] + (0 if a[i - 1] == b[j - 1] else 1):
            if a[i - 1] == b[j - 1]:
                ops.append(EditOp("keep", i - 1, j - 1, a[i - 1], b[j - 1]))
            else:
                ops.append(EditOp("substitute", i - 1, j - 1, a[i - 1], b[j - 1]))
            i, j = i - 1, j - 1
        elif j > 0 and here == dist[i, j - 1] + 1:
            ops.append(EditOp("insert", i, j - 1, None, b[j - 1]))
            j -= 1
        else:
            ops.append(EditOp("delete", i - 1, j, a[i - 1], None))
            i -= 1
    ops.reverse()
    return int(dist[m, n]), EditScript(tuple(ops), int(dist[m, n]))


def apply_script(a: list[str], script: EditScript) -> list[str]:
    """Replay a script against its source tokens."""
    out: list[str] = []
    for op in script.ops:
        if op.kind == "keep":
            out.append(a[op.a_pos])
        elif op.kind == "substitute":
            out.append(op.new)
        elif op.kind == "insert":
            out.append(op.new)
        elif op.kind == "delete":
            continue
        else:
            raise ValueError(f"unknown edit op {op.kind!r}")
    return out


def _codepoints(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32)


def char_distance(a: str, b: str) -> int:
    """Character-level edit distance.

    Runs the classic DP one row at a time; the in-row dependency of the
    insert chain is resolved with a prefix minimum, so each row is pure
    vector work.
    """
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    A, B = _codepoints(a), _codepoints(b)
    n = len(B)
    cols = np.arange(1, n + 1, dtype=np.int64)
    prev = np.arange(n + 1, dtype=np.int64)
    cur = np.empty(n + 1, dtype=np.int64)
    for i in range(1, len(A) + 1):
        mismatch = (B != A[i - 1]).astype(np.int64)
        best = np.minimum(prev[:-1] + mismatch, prev[1:] + 1)
        cur[0] = i
        cur[1:] = np.minimum(np.minimum.accumulate(best - cols) + cols, i + cols)
        prev, cur = cur, prev
    return int(prev[-1])
