"""HTTP service endpoints over a loaded model."""

import json

import pytest
from fastapi.testclient import TestClient

from layoutdiff.docmodel import document_to_dict
from layoutdiff.nn.model import Model
from layoutdiff.service import create_app
from layoutdiff.synth import MutationConfig, gen_document, mutate_document


@pytest.fixture(scope="module")
def model_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("svc") / "model.lgm"
    Model.init(2).save(str(path))
    return str(path)


@pytest.fixture(scope="module")
def client(model_path):
    return TestClient(create_app(model_path))


@pytest.fixture(scope="module")
def doc_pair():
    doc1 = gen_document(4, "article")
    doc2, _ = mutate_document(doc1, MutationConfig(char_edit_rate=0.1, seed=5))
    return document_to_dict(doc1), document_to_dict(doc2)


def test_create_app_requires_model(monkeypatch):
    monkeypatch.delenv("LAYOUTDIFF_MODEL", raising=False)
    with pytest.raises(ValueError, match="LAYOUTDIFF_MODEL"):
        create_app()


def test_create_app_reads_env(monkeypatch, model_path):
    monkeypatch.setenv("LAYOUTDIFF_MODEL", model_path)
    app = create_app()
    assert TestClient(app).get("/healthz").json() == {"status": "ok"}


def test_healthz(client):
    r = client.get("/healthz")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_model_info(client):
    r = client.get("/model")
    assert r.status_code == 200
    info = r.json()
    assert info["parameters"] == 25
    assert info["values"] > 0
    assert "tau" in info["hyper"]


def test_compare_round_trip(client, doc_pair):
    d1, d2 = doc_pair
    payload = {"doc1": d1, "doc2": d2}
    r = client.post("/compare", json=payload)
    assert r.status_code == 200, r.text
    body = r.json()
    assert set(body) == {"summary", "match", "diffs"}
    assert body["summary"]["pairs"] == len(body["match"]["pairs"])
    again = client.post("/compare", json=payload)
    assert again.json() == body


def test_match_accepts_class_alias(client, doc_pair):
    d1, d2 = doc_pair
    assert all("class" in b for b in d1["blocks"])  # file format uses "class"
    r = client.post("/match", json={"doc1": d1, "doc2": d2})
    assert r.status_code == 200, r.text
    body = r.json()
    assert set(body) == {"pairs", "splits", "merges", "deleted", "inserted"}
    covered = (
        {p["a"] for p in body["pairs"]}
        | {s["a"] for s in body["splits"]}
        | {a for m in body["merges"] for a in m["a"]}
        | set(body["deleted"])
    )
    assert covered == {b["id"] for b in d1["blocks"]}


def test_match_options_forwarded(client, doc_pair):
    d1, d2 = doc_pair
    base = client.post("/match", json={"doc1": d1, "doc2": d2}).json()
    themed = client.post(
        "/match", json={"doc1": d1, "doc2": d2, "options": {"theta": 0.9999}}
    ).json()
    assert len(themed["pairs"]) <= len(base["pairs"])


def test_compare_rejects_bad_mode(client, doc_pair):
    d1, d2 = doc_pair
    r = client.post(
        "/compare", json={"doc1": d1, "doc2": d2, "options": {"mode": "fuzzy"}}
    )
    assert r.status_code == 422


def test_compare_rejects_invalid_document(client, doc_pair):
    _, d2 = doc_pair
    broken = {
        "pages": [{"w": 100.0, "h": 100.0}],
        "blocks": [{"id": "b0", "page": 0, "bbox": [0.0, 0.0, 10.0], "class": "paragraph", "runs": []}],
    }
    r = client.post("/compare", json={"doc1": broken, "doc2": d2})
    assert r.status_code == 422
    assert "bbox" in r.json()["detail"]


def test_compare_empty_side_reports_deletions(client, doc_pair):
    d1, _ = doc_pair
    empty = {"pages": [{"w": 100.0, "h": 100.0}], "blocks": []}
    r = client.post("/compare", json={"doc1": d1, "doc2": empty})
    assert r.status_code == 200, r.text
    body = r.json()
    assert body["summary"]["deleted"] == len(d1["blocks"])
    assert body["summary"]["pairs"] == 0


def test_similarity_self_is_one(client, doc_pair):
    d1, d2 = doc_pair
    r = client.post("/similarity", json={"doc1": d1, "doc2": d1})
    assert r.status_code == 200
    assert r.json()["cosine"] == pytest.approx(1.0, abs=1e-9)
    other = client.post("/similarity", json={"doc1": d1, "doc2": d2})
    assert other.json()["cosine"] <= 1.0 + 1e-12
