"""Request and response bodies for the HTTP service.

The document payload mirrors the JSON interchange format one-to-one, so a
document file can be posted as-is.  Responses mirror the report dicts the
core package produces.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class RunIn(BaseModel):
    text: str
    font: str
    bold: bool
    italic: bool
    size: float
    color: list[int]


class BlockIn(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    id: str
    page: int
    bbox: list[float]
    class_label: str = Field(alias="class")
    runs: list[RunIn] = []


class PageIn(BaseModel):
    w: float
    h: float


class DocumentIn(BaseModel):
    pages: list[PageIn]
    blocks: list[BlockIn] = []


class MatchParams(BaseModel):
    """Matcher knobs; None falls back to the loaded model's defaults."""

    mode: str = "one2one"
    K: int | None = None
    tau: float | None = None
    sinkhorn_iters: int | None = None
    theta: float = 0.10
    alpha: float = 0.5


class ComparePayload(BaseModel):
    doc1: DocumentIn
    doc2: DocumentIn
    options: MatchParams = MatchParams()


class SimilarityPayload(BaseModel):
    doc1: DocumentIn
    doc2: DocumentIn


class PairOut(BaseModel):
    a: str
    b: str
    score: float


class SplitOut(BaseModel):
    a: str
    b: list[str]


class MergeOut(BaseModel):
    a: list[str]
    b: str


class MatchOut(BaseModel):
    pairs: list[PairOut]
    splits: list[SplitOut]
    merges: list[MergeOut]
    deleted: list[str]
    inserted: list[str]


class EditOpOut(BaseModel):
    op: str
    a: int | None
    b: int | None
    old: str | None
    new: str | None


class ScriptOut(BaseModel):
    distance: int
    ops: list[EditOpOut]


class DiffOut(BaseModel):
    kind: str
    a: list[str]
    b: list[str]
    score: float | None
    word_distance: int
    char_distance: int
    normalized: float
    changed: bool
    script: ScriptOut


class SummaryOut(BaseModel):
    pairs: int
    splits: int
    merges: int
    deleted: int
    inserted: int
    changed: int


class CompareOut(BaseModel):
    summary: SummaryOut
    match: MatchOut
    diffs: list[DiffOut]


class SimilarityOut(BaseModel):
    cosine: float


class HealthOut(BaseModel):
    status: str


class ModelInfoOut(BaseModel):
    parameters: int
    values: int
    hyper: dict
