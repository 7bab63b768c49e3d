"""Synthetic document pairs with construction-time ground truth.

Two layout profiles (legal agreements and scientific articles) feed a
mutation pass that applies class relabels, style changes, character
edits, block splits/merges/deletions/insertions and geometric jitter in
a fixed order, recording every correspondence as it goes.  The recorded
ground truth drives both training targets and evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .docmodel import CLASS_LABELS, BBox, Block, Document, Page, StyledRun

__all__ = [
    "MutationConfig",
    "GroundTruth",
    "gen_document",
    "mutate_document",
    "gen_ambiguity_pair",
    "gt_matrix",
    "config_for_intensity",
    "PROFILES",
]

PROFILES = ("legal", "article")

PAGE_W, PAGE_H = 612.0, 792.0
_MARGIN = 72.0

_FONTS = ("LiberationSans", "LiberationSerif", "DejaVuSans", "NimbusRoman")

_WORDS = (
    "agreement party parties clause herein shall term effect notice period payment "
    "amount interest rate service provider client obligation breach remedy waiver "
    "section schedule annex exhibit witness signature date execution delivery "
    "liability damage loss claim indemnity insurance coverage limit exclusion "
    "confidential information disclosure purpose permitted receiving disclosing "
    "method result analysis model data sample measure metric figure table value "
    "approach system network layer node graph edge feature vector matrix weight "
    "document page layout block text region detection match score distance study "
    "experiment baseline training test evaluation accuracy performance comparison "
    "process structure element component relation property attribute context input "
    "output function parameter variable condition constraint requirement standard "
    "report summary review change version revision draft final copy original"
).split()


def _sentence(rng: np.random.Generator, lo: int = 5, hi: int = 12) -> str:
    count = int(rng.integers(lo, hi + 1))
    words = [
        _WORDS[int(rng.integers(len(_WORDS)))] for _ in range(count)
    ]
    return words[0].capitalize() + " " + " ".join(words[1:]) + "."


def _paragraph_text(rng: np.random.Generator, sentences: int) -> str:
    return " ".join(_sentence(rng) for _ in range(sentences))


def _run(text: str, font: str, size: float, bold: bool = False, italic: bool = False,
         color: tuple = (0, 0, 0)) -> StyledRun:
    return StyledRun(text, font, bold, italic, size, color)


# ---------------------------------------------------------------------------
# Document generation
# ---------------------------------------------------------------------------


class _Builder:
    """Accumulates blocks down a page, breaking to a new page when full."""

    def __init__(self, target: int):
        self.target = target
        self.page = 0
        self.y = _MARGIN
        self.entries: list[tuple[int, BBox, str, tuple[StyledRun, ...]]] = []

    @property
    def full(self) -> bool:
        return len(self.entries) >= self.target

    def place(self, height: float, class_label: str, runs: tuple[StyledRun, ...],
              x0: float = _MARGIN, x1: float = PAGE_W - _MARGIN, gap: float = 10.0) -> None:
        if self.full:
            return
        if self.y + height > PAGE_H - _MARGIN:
            self.page += 1
            self.y = _MARGIN
        bbox = BBox(x0, self.y, x1, self.y + height)
        self.entries.append((self.page, bbox, class_label, runs))
        self.y += height + gap

    def finish(self) -> Document:
        pages = tuple(Page(PAGE_W, PAGE_H) for _ in range(self.page + 1))
        blocks = tuple(
            Block(f"b{idx:03d}", page, bbox, label, runs)
            for idx, (page, bbox, label, runs) in enumerate(self.entries)
        )
        return Document(pages, blocks)


def _text_height(text: str, size: float, width: float) -> float:
    chars_per_line = max(10, int(width / (size * 0.5)))
    lines = max(1, -(-len(text) // chars_per_line))
    return lines * size * 1.35


def _gen_legal(rng: np.random.Generator, target: int) -> Document:
    b = _Builder(target)
    serif = _FONTS[int(rng.integers(2))]
    b.place(24, "title", (_run(" ".join(
        w.upper() for w in _sentence(rng, 3, 5)[:-1].split()), serif, 18, bold=True),))
    section_no = 0
    while not b.full:
        section_no += 1
        heading = f"{section_no}. " + _sentence(rng, 2, 4)[:-1].capitalize()
        b.place(16, "section", (_run(heading, serif, 14, bold=True),))
        for item in range(int(rng.integers(1, 4))):
            if b.full:
                break
            # the first clause of section 1 is always enumerated
            if (section_no == 1 and item == 0) or rng.random() < 0.4:
                marker = f"({chr(ord('a') + int(rng.integers(6)))}) "
                text = marker + _sentence(rng, 6, 14)
                b.place(_text_height(text, 10.5, 450), "list_item", (_run(text, serif, 10.5),),
                        x0=_MARGIN + 18)
                if rng.random() < 0.3 and not b.full:
                    sub = f"({'i' * int(rng.integers(1, 4))}) " + _sentence(rng, 5, 10)
                    b.place(_text_height(sub, 10.5, 430), "list_item", (_run(sub, serif, 10.5),),
                            x0=_MARGIN + 36)
            else:
                text = _paragraph_text(rng, int(rng.integers(2, 5)))
                b.place(_text_height(text, 10.5, 468), "paragraph", (_run(text, serif, 10.5),))
        if rng.random() < 0.25 and not b.full:
            b.place(10, "footer", (_run(f"Page {b.page + 1}", serif, 8, italic=True),),
                    x0=PAGE_W / 2 - 30, x1=PAGE_W / 2 + 30)
    return b.finish()


def _gen_article(rng: np.random.Generator, target: int) -> Document:
    b = _Builder(target)
    sans = _FONTS[2 + int(rng.integers(2))]
    b.place(26, "title", (_run(_sentence(rng, 4, 8)[:-1].title(), sans, 17, bold=True),))
    b.place(12, "caption", (_run(_sentence(rng, 3, 6)[:-1].title(), sans, 9, italic=True),))
    if not b.full:
        abstract = _paragraph_text(rng, int(rng.integers(2, 4)))
        b.place(_text_height(abstract, 9.5, 468), "paragraph", (_run(abstract, sans, 9.5, italic=True),))
    col = 0
    cols = ((_MARGIN, PAGE_W / 2 - 9), (PAGE_W / 2 + 9, PAGE_W - _MARGIN))
    section_no = 0
    while not b.full:
        x0, x1 = cols[col]
        roll = rng.random()
        if roll < 0.2:
            section_no += 1
            heading = f"{section_no} " + _sentence(rng, 2, 4)[:-1].capitalize()
            b.place(14, "section", (_run(heading, sans, 12, bold=True),), x0=x0, x1=x1)
        elif roll < 0.35 and not b.full:
            b.place(float(rng.uniform(80, 130)), "figure", (), x0=x0, x1=x1, gap=4)
            cap = f"Figure {section_no + 1}: " + _sentence(rng, 4, 8)
            b.place(_text_height(cap, 8.5, x1 - x0), "caption", (_run(cap, sans, 8.5),), x0=x0, x1=x1)
        else:
            text = _paragraph_text(rng, int(rng.integers(2, 4)))
            b.place(_text_height(text, 10, x1 - x0), "paragraph", (_run(text, sans, 10),), x0=x0, x1=x1)
        if rng.random() < 0.3:
            col = 1 - col
    return b.finish()


def gen_document(seed: int, profile: str = "legal") -> Document:
    """Deterministic synthetic document with 10-60 blocks."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r} (expected one of {PROFILES})")
    rng = np.random.default_rng(seed)
    target = int(rng.integers(10, 61))
    if profile == "legal":
        return _gen_legal(rng, target)
    return _gen_article(rng, target)


# ---------------------------------------------------------------------------
# Mutation with recorded ground truth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MutationConfig:
    """Per-operation rates; shift_p is a jitter amplitude in page fraction."""

    char_edit_rate: float = 0.0
    block_split_p: float = 0.0
    block_merge_p: float = 0.0
    block_delete_p: float = 0.0
    block_insert_p: float = 0.0
    shift_p: float = 0.0
    class_relabel_p: float = 0.0
    style_change_p: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("char_edit_rate", "block_split_p", "block_merge_p",
                     "block_delete_p", "block_insert_p", "class_relabel_p",
                     "style_change_p"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0,1], got {value}")
        if not 0.0 <= self.shift_p <= 0.2:
            raise ValueError(f"shift_p amplitude must lie in [0,0.2], got {self.shift_p}")


def config_for_intensity(intensity: float, structural: bool, seed: int) -> MutationConfig:
    """Scale all mutation rates from one intensity knob in [0,0.4]."""
    return MutationConfig(
        char_edit_rate=0.5 * intensity,
        block_split_p=0.5 * intensity if structural else 0.0,
        block_merge_p=0.5 * intensity if structural else 0.0,
        block_delete_p=0.25 * intensity,
        block_insert_p=0.25 * intensity,
        shift_p=min(0.2, 0.25 * intensity),
        class_relabel_p=0.25 * intensity,
        style_change_p=0.5 * intensity,
        seed=seed,
    )


@dataclass(frozen=True)
class GroundTruth:
    """Construction-time correspondence between a document and its mutation."""

    pairs: tuple[tuple[str, str], ...] = ()
    splits: tuple[tuple[str, tuple[str, ...]], ...] = ()
    merges: tuple[tuple[tuple[str, ...], str], ...] = ()
    deleted: tuple[str, ...] = ()
    inserted: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "splits": [[a, list(bs)] for a, bs in self.splits],
            "merges": [[list(as_), b] for as_, b in self.merges],
            "deleted": list(self.deleted),
            "inserted": list(self.inserted),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GroundTruth":
        return cls(
            pairs=tuple((a, b) for a, b in obj.get("pairs", [])),
            splits=tuple((a, tuple(bs)) for a, bs in obj.get("splits", [])),
            merges=tuple((tuple(as_), b) for as_, b in obj.get("merges", [])),
            deleted=tuple(obj.get("deleted", [])),
            inserted=tuple(obj.get("inserted", [])),
        )

    def side1_ids(self) -> set:
        ids = {a for a, _ in self.pairs} | {a for a, _ in self.splits} | set(self.deleted)
        for as_, _ in self.merges:
            ids |= set(as_)
        return ids

    def side2_ids(self) -> set:
        ids = {b for _, b in self.pairs} | {b for _, b in self.merges} | set(self.inserted)
        for _, bs in self.splits:
            ids |= set(bs)
        return ids


@dataclass
class _Proto:
    """A block-in-progress on the mutated side, tagged with its origin."""

    page: int
    bbox: BBox
    class_label: str
    runs: tuple[StyledRun, ...]
    origin: tuple = ("insert",)
    new_id: str = ""


_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def _edit_text(rng: np.random.Generator, text: str, rate: float) -> str:
    if rate <= 0.0:
        return text
    out: list[str] = []
    for ch in text:
        if rng.random() < rate:
            op = int(rng.integers(3))
            if op == 0:
                out.append(_ALPHABET[int(rng.integers(26))])
            elif op == 1:
                out.append(_ALPHABET[int(rng.integers(26))])
                out.append(ch)
            # op 2 deletes the character
        else:
            out.append(ch)
    edited = "".join(out)
    return edited if edited else text[:1]


def _edit_runs(rng: np.random.Generator, runs: tuple[StyledRun, ...], rate: float):
    return tuple(replace(r, text=_edit_text(rng, r.text, rate)) for r in runs)


def _sentence_boundaries(text: str) -> list[int]:
    """Indices just after each '. ' so both halves stay non-empty."""
    out = []
    start = 0
    while True:
        hit = text.find(". ", start)
        if hit < 0:
            break
        out.append(hit + 2)
        start = hit + 2
    return [i for i in out if 0 < i < len(text)]


def _cut_runs(runs: tuple[StyledRun, ...], at: int):
    """Split a run tuple at a character offset of the concatenated text."""
    head, tail = [], []
    pos = 0
    for r in runs:
        end = pos + len(r.text)
        if end <= at:
            head.append(r)
        elif pos >= at:
            tail.append(r)
        else:
            head.append(replace(r, text=r.text[: at - pos]))
            tail.append(replace(r, text=r.text[at - pos :]))
        pos = end
    return tuple(head), tuple(tail)


def _jitter_bbox(rng: np.random.Generator, bbox: BBox, page: Page, amplitude: float) -> BBox:
    if amplitude <= 0.0:
        return bbox
    dx = float(rng.uniform(-amplitude, amplitude)) * page.width
    dy = float(rng.uniform(-amplitude, amplitude)) * page.height
    dx = min(max(dx, -bbox.x0), page.width - bbox.x1)
    dy = min(max(dy, -bbox.y0), page.height - bbox.y1)
    return bbox.shifted(dx, dy)


def _insert_proto(rng: np.random.Generator, page_idx: int, page: Page) -> _Proto:
    text = _paragraph_text(rng, int(rng.integers(1, 3)))
    width = float(rng.uniform(200, page.width - 2 * _MARGIN))
    height = _text_height(text, 10.5, width)
    height = min(height, page.height - 2 * _MARGIN)
    x0 = float(rng.uniform(_MARGIN, page.width - _MARGIN - width))
    y0 = float(rng.uniform(_MARGIN, page.height - _MARGIN - height))
    font = _FONTS[int(rng.integers(len(_FONTS)))]
    return _Proto(page_idx, BBox(x0, y0, x0 + width, y0 + height), "paragraph",
                  (_run(text, font, 10.5),), origin=("insert",))


def mutate_document(doc: Document, cfg: MutationConfig) -> tuple[Document, GroundTruth]:
    """Apply the mutation pass and record every correspondence.

    Operation order is fixed: class relabels, style changes, character
    edits, splits, merges, deletions, insertions, geometric jitter.
    Each original block participates in at most one structural
    operation, so the ground truth partitions both id sets cleanly.
    Mutated blocks receive fresh ids in reading order.
    """
    rng = np.random.default_rng(cfg.seed)
    protos = [
        _Proto(b.page, b.bbox, b.class_label, b.runs, origin=("pair", b.id))
        for b in doc.blocks
    ]

    # semantic: class relabels
    for p in protos:
        if rng.random() < cfg.class_relabel_p:
            choices = [c for c in CLASS_LABELS if c != p.class_label]
            p.class_label = choices[int(rng.integers(len(choices)))]

    # visual: style changes
    for p in protos:
        if p.runs and rng.random() < cfg.style_change_p:
            font = _FONTS[int(rng.integers(len(_FONTS)))]
            flip_bold = rng.random() < 0.5
            scale = float(rng.uniform(0.85, 1.15))
            p.runs = tuple(
                replace(r, font_family=font, bold=(not r.bold) if flip_bold else r.bold,
                        size=r.size * scale)
                for r in p.runs
            )

    # textual: character-level edits
    for p in protos:
        if p.runs:
            p.runs = _edit_runs(rng, p.runs, cfg.char_edit_rate)

    # structural: splits, then merges over untouched neighbors, then deletions
    merges: list[tuple[tuple[str, ...], str]] = []
    deleted: list[str] = []
    result: list[_Proto] = []
    structurally_used: set[int] = set()

    for idx, p in enumerate(protos):
        if p.class_label in ("paragraph", "list_item") and rng.random() < cfg.block_split_p:
            text = "".join(r.text for r in p.runs)
            cuts = _sentence_boundaries(text)
            if cuts:
                mid = min(cuts, key=lambda c: abs(c - len(text) / 2))
                head, tail = _cut_runs(p.runs, mid)
                if head and tail:
                    ratio = min(0.8, max(0.2, mid / len(text)))
                    y_mid = p.bbox.y0 + ratio * p.bbox.height
                    top = _Proto(p.page, BBox(p.bbox.x0, p.bbox.y0, p.bbox.x1, y_mid),
                                 p.class_label, head, origin=("split", p.origin[1], 0))
                    bottom = _Proto(p.page, BBox(p.bbox.x0, y_mid, p.bbox.x1, p.bbox.y1),
                                    p.class_label, tail, origin=("split", p.origin[1], 1))
                    result.extend([top, bottom])
                    structurally_used.add(idx)

    pos = 0
    while pos < len(protos):
        p = protos[pos]
        if pos in structurally_used:
            pos += 1
            continue
        nxt = pos + 1
        mergeable = (
            nxt < len(protos)
            and nxt not in structurally_used
            and protos[nxt].class_label == p.class_label
            and protos[nxt].page == p.page
            and rng.random() < cfg.block_merge_p
        )
        if mergeable:
            q = protos[nxt]
            union = BBox(
                min(p.bbox.x0, q.bbox.x0), min(p.bbox.y0, q.bbox.y0),
                max(p.bbox.x1, q.bbox.x1), max(p.bbox.y1, q.bbox.y1),
            )
            merged = _Proto(p.page, union, p.class_label, p.runs + q.runs,
                            origin=("merge", (p.origin[1], q.origin[1])))
            result.append(merged)
            structurally_used.update((pos, nxt))
            pos += 2
            continue
        if rng.random() < cfg.block_delete_p:
            deleted.append(p.origin[1])
            structurally_used.add(pos)
        else:
            result.append(p)
        pos += 1

    # order survivors by reading order of their originals, splits in place
    source_index = {b.id: i for i, b in enumerate(doc.blocks)}

    def _anchor(entry: _Proto) -> tuple:
        if entry.origin[0] == "split":
            return (source_index[entry.origin[1]], entry.origin[2])
        if entry.origin[0] == "merge":
            return (source_index[entry.origin[1][0]], 0)
        return (source_index[entry.origin[1]], 0)

    result.sort(key=_anchor)

    # insertions
    inserted_protos: list[_Proto] = []
    for b in doc.blocks:
        if rng.random() < cfg.block_insert_p:
            inserted_protos.append(_insert_proto(rng, b.page, doc.pages[b.page]))
    for extra in inserted_protos:
        slot = int(rng.integers(len(result) + 1))
        result.insert(slot, extra)

    # geometric jitter over the final block list
    for p in result:
        p.bbox = _jitter_bbox(rng, p.bbox, doc.pages[p.page], cfg.shift_p)

    # kept blocks retain their ids; structural products get derived ids
    used_ids: set[str] = set()

    def _fresh(base: str) -> str:
        candidate = base
        while candidate in used_ids:
            candidate += "x"
        used_ids.add(candidate)
        return candidate

    pairs: list[tuple[str, str]] = []
    split_children: dict[str, list[str]] = {}
    inserted_ids: list[str] = []
    insert_count = 0
    for p in result:
        if p.origin[0] == "pair":
            p.new_id = _fresh(p.origin[1])
            pairs.append((p.origin[1], p.new_id))
        elif p.origin[0] == "split":
            p.new_id = _fresh(f"{p.origin[1]}s{p.origin[2]}")
            split_children.setdefault(p.origin[1], []).append(p.new_id)
        elif p.origin[0] == "merge":
            p.new_id = _fresh(f"{p.origin[1][0]}m")
            merges.append((p.origin[1], p.new_id))
        else:
            p.new_id = _fresh(f"n{insert_count:03d}")
            insert_count += 1
            inserted_ids.append(p.new_id)
    splits = [(parent, tuple(children)) for parent, children in split_children.items()]

    blocks = tuple(
        Block(p.new_id, p.page, p.bbox, p.class_label, p.runs) for p in result
    )
    mutated = Document(doc.pages, blocks)
    gt = GroundTruth(
        pairs=tuple(pairs),
        splits=tuple(splits),
        merges=tuple(merges),
        deleted=tuple(deleted),
        inserted=tuple(inserted_ids),
    )
    return mutated, gt


# ---------------------------------------------------------------------------
# Ambiguity fixtures and training targets
# ---------------------------------------------------------------------------


def gen_ambiguity_pair(seed: int) -> tuple[Document, Document, GroundTruth]:
    """A pair whose only hard decision is geometric.

    Two blocks share exactly the same text; in the mutated copy their
    file order is swapped, so any matcher that ranks candidates by text
    alone (breaking ties by order) crosses them, while position still
    identifies the true counterpart.
    """
    rng = np.random.default_rng(seed)
    doc = gen_document(seed, "legal")
    blocks = list(doc.blocks)
    # give two well-separated paragraphs identical text
    para_idx = [i for i, b in enumerate(blocks) if b.class_label == "paragraph" and b.runs]
    if len(para_idx) < 2:
        para_idx = [i for i, b in enumerate(blocks) if b.runs]
    i, j = para_idx[0], para_idx[-1]
    if i == j:
        raise ValueError("ambiguity fixture needs at least two text blocks")
    shared = _paragraph_text(rng, 2)
    for k in (i, j):
        b = blocks[k]
        blocks[k] = b.with_runs((_run(shared, b.runs[0].font_family, b.runs[0].size),))
    doc = Document(doc.pages, tuple(blocks))

    cfg = MutationConfig(shift_p=0.01, seed=seed + 1)
    mutated, gt = mutate_document(doc, cfg)
    # swap the duplicated blocks' file order in the mutated copy
    pair_map = dict(gt.pairs)
    ids2 = [b.id for b in mutated.blocks]
    pos_i, pos_j = ids2.index(pair_map[blocks[i].id]), ids2.index(pair_map[blocks[j].id])
    reordered = list(mutated.blocks)
    reordered[pos_i], reordered[pos_j] = reordered[pos_j], reordered[pos_i]
    mutated = Document(mutated.pages, tuple(reordered))
    return doc, mutated, gt


def gt_matrix(gt: GroundTruth, ids1, ids2) -> np.ndarray:
    """Padded (n1+1)x(n2+1) target for the matching loss.

    Pairs put 1 on their cell.  Each split child gets 1/m of its
    parent's row and the slack row covers the child column's remainder;
    merge sources mirror this on the shared column, parking their
    remainder on the slack column.  Deleted rows and inserted columns
    target their slack cell.  Every real row and column therefore sums
    to exactly 1, so the target is itself a feasible transport plan --
    an unreachable target would push competing cells into a tug-of-war
    and teach the matcher to collapse group mass onto one member.  The
    slack-slack corner holds the leftover capacity and is ignored by
    the loss.
    """
    index1 = {b: i for i, b in enumerate(ids1)}
    index2 = {b: j for j, b in enumerate(ids2)}
    n1, n2 = len(ids1), len(ids2)
    G = np.zeros((n1 + 1, n2 + 1))
    for a, b in gt.pairs:
        G[index1[a], index2[b]] = 1.0
    for a, bs in gt.splits:
        share = 1.0 / len(bs)
        for b in bs:
            G[index1[a], index2[b]] = share
            G[n1, index2[b]] = 1.0 - share
    for as_, b in gt.merges:
        share = 1.0 / len(as_)
        for a in as_:
            G[index1[a], index2[b]] = share
            G[index1[a], n2] = 1.0 - share
    for a in gt.deleted:
        G[index1[a], n2] = 1.0
    for b in gt.inserted:
        G[n1, index2[b]] = 1.0
    if gt.pairs or gt.splits or gt.merges:
        G[n1, n2] = 1.0
    return G
