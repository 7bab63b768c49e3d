"""Shared fixtures.

Training is the expensive part, so one model per corpus flavor is trained
once per session and reused by every test that needs trained weights.
The same runs double as the end-to-end learning acceptance evidence:
fixtures record wall time and the training curve.
"""

import time
from dataclasses import dataclass

import pytest

from layoutdiff.nn import Model
from layoutdiff.training import CorpusSpec, build_corpus, evaluate, train

LIGHT_SPEC = CorpusSpec(
    n_pairs=200,
    profiles=("legal", "article"),
    intensity=(0.05, 0.1, 0.2),
    seed=11,
    structural=False,
)

STRUCT_SPEC = CorpusSpec(
    n_pairs=200,
    profiles=("legal", "article"),
    intensity=(0.2,),
    seed=23,
    structural=True,
)


@dataclass
class TrainedBundle:
    model: Model
    rows: list
    elapsed: float
    spec: CorpusSpec
    path: str


def _train_bundle(seed: int, spec: CorpusSpec, path) -> TrainedBundle:
    t0 = time.time()
    model, rows = train(seed, spec, epochs=30, lr=0.005, batch=8)
    elapsed = time.time() - t0
    model.save(path)
    return TrainedBundle(model, rows, elapsed, spec, str(path))


@pytest.fixture(scope="session")
def light_bundle(tmp_path_factory) -> TrainedBundle:
    """Matcher trained on light mutations (char edits only, no split/merge)."""
    path = tmp_path_factory.mktemp("models") / "light.lgm"
    return _train_bundle(0, LIGHT_SPEC, path)


@pytest.fixture(scope="session")
def struct_bundle(tmp_path_factory) -> TrainedBundle:
    """Matcher trained with splits and merges at intensity 0.2."""
    path = tmp_path_factory.mktemp("models") / "struct.lgm"
    return _train_bundle(1, STRUCT_SPEC, path)


@pytest.fixture(scope="session")
def light_holdout():
    """100 held-out light-mutation pairs on a shifted seed."""
    spec = CorpusSpec(
        n_pairs=100,
        profiles=LIGHT_SPEC.profiles,
        intensity=LIGHT_SPEC.intensity,
        seed=LIGHT_SPEC.seed + 7919,
        structural=False,
    )
    return build_corpus(spec)


@pytest.fixture(scope="session")
def struct_holdout():
    """100 held-out pairs with splits and merges at intensity 0.2."""
    spec = CorpusSpec(
        n_pairs=100,
        profiles=STRUCT_SPEC.profiles,
        intensity=STRUCT_SPEC.intensity,
        seed=STRUCT_SPEC.seed + 7919,
        structural=True,
    )
    return build_corpus(spec)


@pytest.fixture(scope="session")
def light_metrics(light_bundle, light_holdout):
    return evaluate(light_bundle.model, light_holdout, mode="one2one")


@pytest.fixture(scope="session")
def struct_metrics(struct_bundle, struct_holdout):
    return evaluate(struct_bundle.model, struct_holdout, mode="many2many")
