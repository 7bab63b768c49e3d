"""HTTP face of the comparison engine.

One model is loaded at startup and shared by all requests.  Documents
travel as the same JSON schema the files use, so clients can post file
contents unchanged.
"""

from __future__ import annotations

import json
import os

from fastapi import FastAPI, HTTPException

from ..docmodel import Document, DocumentError, load_document
from ..encoder import encode_layout, layout_similarity
from ..layoutgraph import build_graph
from ..matching import MatchError, MatchOptions, match_documents
from ..nn import Model
from ..pipeline import compare_documents
from .schemas import (
    CompareOut,
    ComparePayload,
    HealthOut,
    MatchOut,
    MatchParams,
    ModelInfoOut,
    SimilarityOut,
    SimilarityPayload,
)

MODEL_ENV = "LAYOUTDIFF_MODEL"


def _to_document(payload) -> Document:
    try:
        return load_document(json.dumps(payload.model_dump(by_alias=True)))
    except DocumentError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


def _to_options(params: MatchParams) -> MatchOptions:
    try:
        return MatchOptions(
            mode=params.mode,
            K=params.K,
            tau=params.tau,
            sinkhorn_iters=params.sinkhorn_iters,
            theta=params.theta,
            alpha=params.alpha,
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


def create_app(model_path: str | None = None) -> FastAPI:
    """Build the service around one model file.

    The path falls back to the LAYOUTDIFF_MODEL environment variable; a
    missing or unreadable model fails fast here rather than per request.
    """
    path = model_path or os.environ.get(MODEL_ENV)
    if not path:
        raise ValueError(f"no model: pass model_path or set {MODEL_ENV}")
    model = Model.load(path)

    app = FastAPI(title="layoutdiff", version="0.1.0")

    @app.get("/healthz", response_model=HealthOut)
    def healthz() -> HealthOut:
        return HealthOut(status="ok")

    @app.get("/model", response_model=ModelInfoOut)
    def model_info() -> ModelInfoOut:
        return ModelInfoOut(
            parameters=len(model.parameters()),
            values=model.num_values,
            hyper=model.hyper,
        )

    @app.post("/compare", response_model=CompareOut)
    def compare(payload: ComparePayload) -> CompareOut:
        doc1 = _to_document(payload.doc1)
        doc2 = _to_document(payload.doc2)
        options = _to_options(payload.options)
        try:
            report = compare_documents(doc1, doc2, model, options)
        except MatchError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return CompareOut(**report.to_dict())

    @app.post("/match", response_model=MatchOut)
    def match(payload: ComparePayload) -> MatchOut:
        doc1 = _to_document(payload.doc1)
        doc2 = _to_document(payload.doc2)
        options = _to_options(payload.options)
        try:
            result = match_documents(doc1, doc2, model, options)
        except MatchError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return MatchOut(**result.to_dict())

    @app.post("/similarity", response_model=SimilarityOut)
    def similarity(payload: SimilarityPayload) -> SimilarityOut:
        doc1 = _to_document(payload.doc1)
        doc2 = _to_document(payload.doc2)
        include_semantic = bool(model.hyper.get("include_semantic", True))
        f1 = encode_layout(build_graph(doc1, include_semantic), model)
        f2 = encode_layout(build_graph(doc2, include_semantic), model)
        return SimilarityOut(cosine=layout_similarity(f1, f2))

    return app
