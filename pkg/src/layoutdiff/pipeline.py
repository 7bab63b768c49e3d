"""End-to-end comparison: match blocks, then diff the matched text.

The report pairs every correspondence from the match set with a word-level
edit script and a character-level distance.  Split and merge groups are
diffed against the concatenation of their member texts, in match-set order
and with no injected separator, mirroring how a block's own text is the
plain concatenation of its runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .docmodel import Document
from .editscript import EditScript, char_distance, levenshtein, word_tokens
from .matching import MatchOptions, MatchSet, match_documents
from .nn import Model

__all__ = ["PairDiff", "DiffReport", "compare_documents", "diff_matched_text"]


@dataclass(frozen=True)
class PairDiff:
    """Text delta for one correspondence (pair, split or merge)."""

    kind: str
    a_ids: tuple[str, ...]
    b_ids: tuple[str, ...]
    score: float | None
    word_distance: int
    char_dist: int
    normalized: float
    script: EditScript

    @property
    def changed(self) -> bool:
        return self.word_distance > 0 or self.char_dist > 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "a": list(self.a_ids),
            "b": list(self.b_ids),
            "score": None if self.score is None else round(float(self.score), 9),
            "word_distance": self.word_distance,
            "char_distance": self.char_dist,
            "normalized": round(self.normalized, 9),
            "changed": self.changed,
            "script": self.script.to_dict(),
        }


@dataclass(frozen=True)
class DiffReport:
    """Block correspondence plus per-correspondence edit scripts."""

    match: MatchSet
    diffs: tuple[PairDiff, ...]

    @property
    def has_changes(self) -> bool:
        return (
            any(d.changed for d in self.diffs)
            or bool(self.match.splits)
            or bool(self.match.merges)
            or bool(self.match.deleted)
            or bool(self.match.inserted)
        )

    @property
    def summary(self) -> dict:
        return {
            "pairs": len(self.match.pairs),
            "splits": len(self.match.splits),
            "merges": len(self.match.merges),
            "deleted": len(self.match.deleted),
            "inserted": len(self.match.inserted),
            "changed": sum(1 for d in self.diffs if d.changed),
        }

    def to_dict(self) -> dict:
        return {
            "summary": self.summary,
            "match": self.match.to_dict(),
            "diffs": [d.to_dict() for d in self.diffs],
        }

    def to_json(self) -> str:
        """Canonical rendering: stable key order, stable block order."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def render_text(self) -> str:
        lines = []
        for d in self.diffs:
            left = "+".join(d.a_ids)
            right = "+".join(d.b_ids)
            tag = {"pair": "=", "split": "s", "merge": "m"}[d.kind]
            if d.changed:
                tag = "~" if d.kind == "pair" else tag
                lines.append(
                    f"{tag} {left} -> {right}  ({d.word_distance} word edits, "
                    f"{d.char_dist} char edits)"
                )
                lines.append("    " + _render_script(d.script))
            else:
                lines.append(f"{tag} {left} -> {right}  (unchanged)")
        for bid in self.match.deleted:
            lines.append(f"- {bid} deleted")
        for bid in self.match.inserted:
            lines.append(f"+ {bid} inserted")
        s = self.summary
        lines.append(
            f"summary: {s['pairs']} matched ({s['changed']} changed), "
            f"{s['splits']} split, {s['merges']} merged, "
            f"{s['deleted']} deleted, {s['inserted']} inserted"
        )
        return "\n".join(lines) + "\n"


def _render_script(script: EditScript) -> str:
    parts = []
    for op in script.ops:
        if op.kind == "keep":
            parts.append(op.old)
        elif op.kind == "delete":
            parts.append(f"[-{op.old}]")
        elif op.kind == "insert":
            parts.append(f"[+{op.new}]")
        else:
            parts.append(f"[{op.old}->{op.new}]")
    return " ".join(parts)


def _concat_text(ids: tuple[str, ...], texts: dict[str, str]) -> str:
    return "".join(texts[i] for i in ids)


def diff_matched_text(match: MatchSet, doc1: Document, doc2: Document) -> tuple[PairDiff, ...]:
    """One PairDiff per pair/split/merge, ordered by block id."""
    t1 = {b.id: b.text for b in doc1.blocks}
    t2 = {b.id: b.text for b in doc2.blocks}
    work: list[tuple[str, tuple[str, ...], tuple[str, ...], float | None]] = []
    for a, b, score in match.pairs:
        work.append(("pair", (a,), (b,), score))
    for a, bs in match.splits:
        work.append(("split", (a,), tuple(bs), None))
    for as_, b in match.merges:
        work.append(("merge", tuple(as_), (b,), None))
    work.sort(key=lambda w: (w[1], w[2]))

    diffs = []
    for kind, a_ids, b_ids, score in work:
        text_a = _concat_text(a_ids, t1)
        text_b = _concat_text(b_ids, t2)
        tok_a, tok_b = word_tokens(text_a), word_tokens(text_b)
        dist, script = levenshtein(tok_a, tok_b)
        denom = max(len(tok_a), len(tok_b))
        diffs.append(
            PairDiff(
                kind,
                a_ids,
                b_ids,
                score,
                dist,
                char_distance(text_a, text_b),
                dist / denom if denom else 0.0,
                script,
            )
        )
    return tuple(diffs)


def compare_documents(
    doc1: Document,
    doc2: Document,
    model: Model,
    options: MatchOptions = MatchOptions(),
    text_embeddings1: dict | None = None,
    text_embeddings2: dict | None = None,
) -> DiffReport:
    """Match two documents and produce the full redline report."""
    match = match_documents(doc1, doc2, model, options, text_embeddings1, text_embeddings2)
    return DiffReport(match, diff_matched_text(match, doc1, doc2))
