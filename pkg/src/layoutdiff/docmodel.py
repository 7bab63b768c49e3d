"""Canonical in-memory document representation and its JSON interchange format.

A document is a list of pages plus an ordered list of layout blocks.  Each
block carries a class label, a bounding box in page coordinates (origin
top-left, y grows downward) and an ordered list of styled text runs.  All
types are immutable and validated on construction: no partially constructed
document can escape to downstream code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

CLASS_LABELS: tuple[str, ...] = (
    "paragraph",
    "title",
    "section",
    "list_item",
    "table",
    "table_cell",
    "figure",
    "caption",
    "header",
    "footer",
    "other",
)

#: Slack, in points, allowed when checking that a block lies inside its page.
PAGE_FIT_TOLERANCE = 0.5


class DocumentError(ValueError):
    """A document file or in-memory document violates the schema."""


def _require_finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DocumentError(f"{what} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in page points, top-left origin, x0 < x1 and y0 < y1."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        for name in ("x0", "y0", "x1", "y1"):
            v = _require_finite(getattr(self, name), f"bbox {name}")
            if v < 0:
                raise DocumentError(f"invalid bbox: {name}={v} is negative")
            object.__setattr__(self, name, v)
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise DocumentError(
                f"invalid bbox: requires x0 < x1 and y0 < y1, got "
                f"[{self.x0}, {self.y0}, {self.x1}, {self.y1}]"
            )

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def cx(self) -> float:
        return (self.x0 + self.x1) / 2.0

    @property
    def cy(self) -> float:
        return (self.y0 + self.y1) / 2.0

    def contains(self, x: float, y: float) -> bool:
        """Point containment, edges inclusive."""
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def as_list(self) -> list[float]:
        return [self.x0, self.y0, self.x1, self.y1]

    def shifted(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)


@dataclass(frozen=True)
class StyledRun:
    """A span of text sharing one font family, style, size and fill color."""

    text: str
    font_family: str
    bold: bool
    italic: bool
    size: float
    color: tuple[int, int, int]

    def __post_init__(self) -> None:
        if not self.text:
            raise DocumentError("run text must be non-empty")
        object.__setattr__(self, "size", _require_finite(self.size, "run size"))
        if self.size <= 0:
            raise DocumentError(f"run size must be > 0, got {self.size}")
        color = tuple(int(c) for c in self.color)
        if len(color) != 3 or any(c < 0 or c > 255 for c in color):
            raise DocumentError(f"run color must be three ints in [0, 255], got {self.color!r}")
        object.__setattr__(self, "color", color)
        object.__setattr__(self, "bold", bool(self.bold))
        object.__setattr__(self, "italic", bool(self.italic))


@dataclass(frozen=True)
class Block:
    """A layout component: one detected region with class, box and runs."""

    id: str
    page: int
    bbox: BBox
    class_label: str
    runs: tuple[StyledRun, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise DocumentError("block id must be non-empty")
        if int(self.page) != self.page or self.page < 0:
            raise DocumentError(f"block {self.id!r}: page must be an index >= 0, got {self.page!r}")
        object.__setattr__(self, "page", int(self.page))
        if self.class_label not in CLASS_LABELS:
            raise DocumentError(
                f"block {self.id!r}: unknown class {self.class_label!r} "
                f"(expected one of {', '.join(CLASS_LABELS)})"
            )
        object.__setattr__(self, "runs", tuple(self.runs))

    @property
    def text(self) -> str:
        """Concatenation of run texts in run order, no injected separators."""
        return "".join(r.text for r in self.runs)

    def with_runs(self, runs: Iterable[StyledRun]) -> "Block":
        return Block(self.id, self.page, self.bbox, self.class_label, tuple(runs))


@dataclass(frozen=True)
class Page:
    """Page dimensions in points."""

    width: float
    height: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "width", _require_finite(self.width, "page width"))
        object.__setattr__(self, "height", _require_finite(self.height, "page height"))
        if self.width <= 0 or self.height <= 0:
            raise DocumentError(f"page dims must be > 0, got {self.width} x {self.height}")


@dataclass(frozen=True)
class Document:
    """Pages plus blocks in reading order (file order is reading order)."""

    pages: tuple[Page, ...]
    blocks: tuple[Block, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "pages", tuple(self.pages))
        object.__setattr__(self, "blocks", tuple(self.blocks))
        seen: set[str] = set()
        for b in self.blocks:
            if b.id in seen:
                raise DocumentError(f"duplicate id {b.id}")
            seen.add(b.id)
            if b.page >= len(self.pages):
                raise DocumentError(
                    f"block {b.id!r}: page index {b.page} out of range "
                    f"({len(self.pages)} pages)"
                )
            page = self.pages[b.page]
            t = PAGE_FIT_TOLERANCE
            if (
                b.bbox.x0 < -t
                or b.bbox.y0 < -t
                or b.bbox.x1 > page.width + t
                or b.bbox.y1 > page.height + t
            ):
                raise DocumentError(
                    f"block {b.id!r}: bbox {b.bbox.as_list()} lies outside its "
                    f"{page.width} x {page.height} page"
                )

    def block_ids(self) -> list[str]:
        return [b.id for b in self.blocks]

    def blocks_on_page(self, page: int) -> list[Block]:
        return [b for b in self.blocks if b.page == page]


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


def _expect(mapping: Any, key: str, kind: type | tuple[type, ...], path: str) -> Any:
    if not isinstance(mapping, dict):
        raise DocumentError(f"{path}: expected an object, got {type(mapping).__name__}")
    if key not in mapping:
        raise DocumentError(f"{path}: missing field {key!r}")
    value = mapping[key]
    if kind is float:
        kind = (int, float)
    if not isinstance(value, kind) or isinstance(value, bool) and kind != bool:
        raise DocumentError(f"{path}.{key}: wrong type {type(value).__name__}")
    return value


def _parse_run(obj: Any, path: str) -> StyledRun:
    text = _expect(obj, "text", str, path)
    font = _expect(obj, "font", str, path)
    bold = _expect(obj, "bold", bool, path)
    italic = _expect(obj, "italic", bool, path)
    size = _expect(obj, "size", float, path)
    color = _expect(obj, "color", list, path)
    if len(color) != 3 or not all(isinstance(c, int) and not isinstance(c, bool) for c in color):
        raise DocumentError(f"{path}.color: expected three integers, got {color!r}")
    try:
        return StyledRun(text, font, bold, italic, float(size), tuple(color))
    except DocumentError as exc:
        raise DocumentError(f"{path}: {exc}") from None


def _parse_block(obj: Any, path: str) -> Block:
    block_id = _expect(obj, "id", str, path)
    page = _expect(obj, "page", int, path)
    bbox = _expect(obj, "bbox", list, path)
    cls = _expect(obj, "class", str, path)
    runs = _expect(obj, "runs", list, path)
    if len(bbox) != 4 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox):
        raise DocumentError(f"{path}.bbox: expected four numbers, got {bbox!r}")
    try:
        box = BBox(*[float(v) for v in bbox])
    except DocumentError as exc:
        raise DocumentError(f"{path}: {exc} (block {block_id!r})") from None
    parsed_runs = [_parse_run(r, f"{path}.runs[{i}]") for i, r in enumerate(runs)]
    try:
        return Block(block_id, page, box, cls, tuple(parsed_runs))
    except DocumentError as exc:
        raise DocumentError(f"{path}: {exc}") from None


def load_document(data: bytes | str) -> Document:
    """Parse and validate a document file.

    Raises :class:`DocumentError` naming the offending block and field path on
    any schema or invariant violation; never returns a partially valid
    document.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"not valid JSON: {exc}") from None
    pages_raw = _expect(obj, "pages", list, "document")
    blocks_raw = _expect(obj, "blocks", list, "document")
    pages = []
    for i, p in enumerate(pages_raw):
        w = _expect(p, "w", float, f"pages[{i}]")
        h = _expect(p, "h", float, f"pages[{i}]")
        try:
            pages.append(Page(float(w), float(h)))
        except DocumentError as exc:
            raise DocumentError(f"pages[{i}]: {exc}") from None
    blocks = [_parse_block(b, f"blocks[{i}]") for i, b in enumerate(blocks_raw)]
    return Document(tuple(pages), tuple(blocks))


def document_to_dict(doc: Document) -> dict[str, Any]:
    return {
        "pages": [{"w": p.width, "h": p.height} for p in doc.pages],
        "blocks": [
            {
                "id": b.id,
                "page": b.page,
                "bbox": b.bbox.as_list(),
                "class": b.class_label,
                "runs": [
                    {
                        "text": r.text,
                        "font": r.font_family,
                        "bold": r.bold,
                        "italic": r.italic,
                        "size": r.size,
                        "color": list(r.color),
                    }
                    for r in b.runs
                ],
            }
            for b in doc.blocks
        ],
    }


def save_document(doc: Document) -> bytes:
    """Serialize with canonical key ordering; save -> load is the identity."""
    return (
        json.dumps(document_to_dict(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    ).encode("utf-8")
