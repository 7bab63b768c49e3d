"""Restricted PDF-style content stream decoding.

Supports exactly the text-showing subset needed to recover styled,
positioned runs: BT/ET text objects, Tf font selection, Td translation,
rg/g fill color and Tj string display.  Stream coordinates have a
bottom-left origin; decoded anchors are flipped to the top-left origin
used by the document model.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .docmodel import Block, Document, StyledRun

KNOWN_OPERATORS = frozenset({"BT", "ET", "Tf", "Td", "rg", "g", "Tj"})

_WHITESPACE = b"\x00\t\n\x0c\r "
_DELIMITERS = b"()<>[]{}/%"


class StreamError(ValueError):
    """Raised for unrecoverable content-stream defects."""


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "name" | "string" | "operator"
    lexeme: str
    position: int


@dataclass(frozen=True)
class TextState:
    font_family: str | None = None
    bold: bool = False
    italic: bool = False
    size: float = 0.0
    fill_color: tuple[int, int, int] = (0, 0, 0)
    x: float = 0.0
    y: float = 0.0


def _is_regular(byte: int) -> bool:
    return byte not in _WHITESPACE and byte not in _DELIMITERS


_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)$")


def _looks_numeric(word: str) -> bool:
    return bool(_NUMBER_RE.match(word))


def tokenize_stream(data: bytes | str) -> list[Token]:
    """Split a stream into number, /Name, (string) and operator tokens.

    String escapes \\( \\) \\\\ are resolved into the token lexeme.  An
    unterminated string literal raises :class:`StreamError`; any other
    unexpected byte is skipped with a warning.
    """
    if isinstance(data, str):
        data = data.encode("latin-1")
    tokens: list[Token] = []
    i = 0
    n = len(data)
    while i < n:
        b = data[i]
        if b in _WHITESPACE:
            i += 1
            continue
        start = i
        if b == ord("("):
            i += 1
            chunks: list[str] = []
            closed = False
            while i < n:
                c = data[i]
                if c == ord("\\"):
                    if i + 1 >= n:
                        break
                    chunks.append(chr(data[i + 1]))
                    i += 2
                    continue
                if c == ord(")"):
                    closed = True
                    i += 1
                    break
                chunks.append(chr(c))
                i += 1
            if not closed:
                raise StreamError(f"unterminated string literal at offset {start}")
            tokens.append(Token("string", "".join(chunks), start))
            continue
        if b == ord("/"):
            i += 1
            while i < n and _is_regular(data[i]):
                i += 1
            tokens.append(Token("name", data[start:i].decode("latin-1"), start))
            continue
        if _is_regular(b):
            i += 1
            while i < n and _is_regular(data[i]):
                i += 1
            word = data[start:i].decode("latin-1")
            if _looks_numeric(word):
                tokens.append(Token("number", word, start))
            else:
                tokens.append(Token("operator", word, start))
            continue
        warnings.warn(f"unexpected byte {bytes([b])!r} at offset {i}, skipping", stacklevel=2)
        i += 1
    return tokens


def _round_half_up(value: float) -> int:
    return int(value + 0.5) if value >= 0 else -int(-value + 0.5)


def _channel(value: float) -> int:
    return min(255, max(0, _round_half_up(value * 255.0)))


def _normalize_font_map(
    font_map: Mapping[str, object],
) -> dict[str, tuple[str, bool, bool]]:
    out: dict[str, tuple[str, bool, bool]] = {}
    for name, entry in font_map.items():
        if isinstance(entry, Mapping):
            out[name] = (str(entry["family"]), bool(entry["bold"]), bool(entry["italic"]))
        else:
            family, bold, italic = entry  # type: ignore[misc]
            out[name] = (str(family), bool(bold), bool(italic))
    return out


def decode_stream(
    tokens: Sequence[Token],
    font_map: Mapping[str, object],
    page_h: float,
) -> list[tuple[StyledRun, tuple[float, float]]]:
    """Execute the operator subset, emitting one run per non-empty Tj.

    `font_map` maps /Name to (family, bold, italic) tuples or to dicts with
    those keys.  Anchors are (x, page_h - y).  Unknown operators are skipped
    with a warning; Tj before any Tf and unresolved font names raise
    :class:`StreamError`.
    """
    fonts = _normalize_font_map(font_map)
    state = TextState()
    have_font = False
    stack: list[Token] = []
    out: list[tuple[StyledRun, tuple[float, float]]] = []

    def pop_numbers(count: int, op: Token) -> list[float]:
        if len(stack) < count or any(t.kind != "number" for t in stack[-count:]):
            raise StreamError(
                f"operator {op.lexeme} at offset {op.position} expects {count} numeric operand(s)"
            )
        values = [float(t.lexeme) for t in stack[-count:]]
        del stack[-count:]
        return values

    for token in tokens:
        if token.kind != "operator":
            stack.append(token)
            continue
        op = token.lexeme
        if op == "BT":
            state = replace(state, x=0.0, y=0.0)
        elif op == "ET":
            pass
        elif op == "Tf":
            if len(stack) < 2 or stack[-2].kind != "name" or stack[-1].kind != "number":
                raise StreamError(f"Tf at offset {token.position} expects /Name size")
            size = float(stack[-1].lexeme)
            name = stack[-2].lexeme
            del stack[-2:]
            if name not in fonts:
                raise StreamError(f"unresolved font name {name} at offset {token.position}")
            family, bold, italic = fonts[name]
            if size <= 0:
                raise StreamError(f"font size must be > 0, got {size}")
            state = replace(state, font_family=family, bold=bold, italic=italic, size=size)
            have_font = True
        elif op == "Td":
            tx, ty = pop_numbers(2, token)
            state = replace(state, x=state.x + tx, y=state.y + ty)
        elif op == "rg":
            r, g, b = pop_numbers(3, token)
            state = replace(state, fill_color=(_channel(r), _channel(g), _channel(b)))
        elif op == "g":
            (v,) = pop_numbers(1, token)
            c = _channel(v)
            state = replace(state, fill_color=(c, c, c))
        elif op == "Tj":
            if not stack or stack[-1].kind != "string":
                raise StreamError(f"Tj at offset {token.position} expects a string operand")
            text = stack.pop().lexeme
            if not have_font:
                raise StreamError(f"no font selected before Tj at offset {token.position}")
            if text:
                run = StyledRun(
                    text=text,
                    font_family=state.font_family or "",
                    bold=state.bold,
                    italic=state.italic,
                    size=state.size,
                    color=state.fill_color,
                )
                out.append((run, (state.x, page_h - state.y)))
            else:
                warnings.warn(f"empty string shown at offset {token.position}", stacklevel=2)
        else:
            warnings.warn(
                f"unknown operator {op!r} at offset {token.position}, skipping", stacklevel=2
            )
            stack.clear()
            continue
        stack.clear()
    return out


def assign_runs_to_blocks(
    runs: Sequence[tuple[StyledRun, tuple[float, float]]],
    doc: Document,
    page: int = 0,
) -> tuple[Document, list[tuple[StyledRun, tuple[float, float]]]]:
    """Attach decoded runs to the blocks whose bbox contains their anchor.

    Ties go to the smaller box, then the lexicographically smaller block id.
    Returns the augmented document plus the runs that landed in no block
    (kept, never silently dropped).
    """
    candidates = [b for b in doc.blocks if b.page == page]
    extra: dict[str, list[StyledRun]] = {}
    unassigned: list[tuple[StyledRun, tuple[float, float]]] = []
    for run, (x, y) in runs:
        holders = [b for b in candidates if b.bbox.contains(x, y)]
        if not holders:
            unassigned.append((run, (x, y)))
            continue
        holders.sort(key=lambda b: (b.bbox.area, b.id))
        extra.setdefault(holders[0].id, []).append(run)
    if not extra:
        return doc, unassigned
    new_blocks = [
        b.with_runs(list(b.runs) + extra[b.id]) if b.id in extra else b for b in doc.blocks
    ]
    return Document(doc.pages, tuple(new_blocks)), unassigned
