"""Hashed character-trigram text embedding and the external-vector path."""

import numpy as np
import pytest

from layoutdiff.hashing import fnv1a_64
from layoutdiff.textembed import EMBED_DIM, cosine, embed_text, load_external_embeddings


def test_empty_is_zero():
    np.testing.assert_array_equal(embed_text(""), np.zeros(EMBED_DIM))


def test_nonempty_is_unit_norm():
    for text in ("a", "hello", "The quick brown fox", "ünïcodé"):
        v = embed_text(text)
        assert v.shape == (EMBED_DIM,)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-9)


def test_case_folding_and_distinctness():
    assert np.array_equal(embed_text("abc"), embed_text("ABC"))
    c = cosine(embed_text("abc"), embed_text("abd"))
    assert c < 1.0


def test_deterministic():
    a = embed_text("same text twice")
    b = embed_text("same text twice")
    assert np.array_equal(a, b)


def test_fnv_constants():
    # standard FNV-1a reference value for the empty string
    assert fnv1a_64(b"") == 0xCBF29CE484222325
    assert fnv1a_64("a") == fnv1a_64(b"a")


def test_edit_stays_closer_than_random():
    rng = np.random.default_rng(99)
    letters = np.array(list("abcdefghijklmnopqrstuvwxyz "))
    wins = 0
    trials = 1000
    for _ in range(trials):
        n = int(rng.integers(20, 60))
        s = "".join(rng.choice(letters, n))
        edited = list(s)
        edited[int(rng.integers(n))] = str(rng.choice(letters))
        unrelated = "".join(rng.choice(letters, n))
        base = embed_text(s)
        if cosine(base, embed_text("".join(edited))) > cosine(base, embed_text(unrelated)):
            wins += 1
    assert wins >= 0.95 * trials


def test_cosine_conventions():
    v = embed_text("hello")
    assert cosine(v, v) == pytest.approx(1.0)
    assert cosine(v, -v) == pytest.approx(-1.0)
    assert cosine(v, np.zeros(EMBED_DIM)) == 0.0


def _write(tmp_path, lines):
    p = tmp_path / "emb.tsv"
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def test_external_load_normalizes(tmp_path):
    row = "b1\t" + " ".join(["2.0"] + ["0.0"] * (EMBED_DIM - 1))
    out = load_external_embeddings(_write(tmp_path, [row]))
    assert np.linalg.norm(out["b1"]) == pytest.approx(1.0)
    assert out["b1"][0] == pytest.approx(1.0)


def test_external_load_zero_row_stays_zero(tmp_path):
    row = "b1\t" + " ".join(["0.0"] * EMBED_DIM)
    out = load_external_embeddings(_write(tmp_path, [row]))
    np.testing.assert_array_equal(out["b1"], np.zeros(EMBED_DIM))


def test_external_load_unit_row_unchanged(tmp_path):
    vec = np.zeros(EMBED_DIM)
    vec[3] = 1.0
    row = "b1\t" + " ".join(str(x) for x in vec)
    out = load_external_embeddings(_write(tmp_path, [row]))
    np.testing.assert_allclose(out["b1"], vec)


def test_external_load_wrong_dim(tmp_path):
    row = "b9\t" + " ".join(["1.0"] * (EMBED_DIM - 1))
    with pytest.raises(ValueError, match="b9"):
        load_external_embeddings(_write(tmp_path, [row]))


def test_external_load_missing_tab(tmp_path):
    with pytest.raises(ValueError, match="TAB"):
        load_external_embeddings(_write(tmp_path, ["b1 1.0 2.0"]))


def test_external_load_non_finite(tmp_path):
    row = "b1\t" + " ".join(["nan"] + ["0.0"] * (EMBED_DIM - 1))
    with pytest.raises(ValueError, match="finite"):
        load_external_embeddings(_write(tmp_path, [row]))
