"""Numeric feature formulas against hand-computed values and symmetry laws."""

import numpy as np
import pytest

from layoutdiff.docmodel import BBox, Block, StyledRun
from layoutdiff.features import (
    chroma_subsample,
    edge_feature,
    font_style_encoding,
    geometric_feature,
    iou,
    pool_visual,
    rgb_to_ycbcr,
    semantic_onehot,
    visual_sequence,
)


def _block(bbox, runs=(), cls="paragraph", bid="b"):
    return Block(bid, 0, BBox(*bbox), cls, tuple(runs))


def _run(text, size=10.0, bold=False, italic=False, font="Serif", color=(0, 0, 0)):
    return StyledRun(text, font, bold, italic, size, color)


# -- geometric ---------------------------------------------------------------


def test_geometric_hand_value():
    g = geometric_feature(_block([40, 40, 60, 60]), 100, 100)
    np.testing.assert_allclose(g, [0.5, 0.5, 0.2, 0.2, 0.002], rtol=1e-12)


def test_geometric_full_page():
    g = geometric_feature(_block([0, 0, 100, 100]), 100, 100)
    np.testing.assert_allclose(g, [0.5, 0.5, 1.0, 1.0, 0.01], rtol=1e-12)


def test_geometric_in_unit_range():
    rng = np.random.default_rng(3)
    for _ in range(200):
        x0, y0 = rng.uniform(0, 90, 2)
        w, h = rng.uniform(1, 10, 2)
        g = geometric_feature(_block([x0, y0, x0 + w, y0 + h]), 100, 100)
        assert np.all(g >= 0) and np.all(g <= 1)
        assert g[4] > 0


# -- iou ---------------------------------------------------------------------


def test_iou_identical():
    a = BBox(3, 4, 10, 12)
    assert iou(a, a) == 1.0


def test_iou_disjoint():
    assert iou(BBox(0, 0, 1, 1), BBox(5, 5, 6, 6)) == 0.0


def test_iou_hand_value():
    assert iou(BBox(0, 0, 2, 2), BBox(1, 0, 3, 2)) == pytest.approx(1 / 3, rel=1e-12)


def test_iou_symmetric_and_bounded():
    rng = np.random.default_rng(11)
    for _ in range(200):
        x = rng.uniform(0, 50, 4)
        a = BBox(x[0], x[1], x[0] + rng.uniform(1, 20), x[1] + rng.uniform(1, 20))
        y = rng.uniform(0, 50, 4)
        b = BBox(y[0], y[1], y[0] + rng.uniform(1, 20), y[1] + rng.uniform(1, 20))
        v = iou(a, b)
        assert v == iou(b, a)
        assert 0.0 <= v <= 1.0


# -- edge --------------------------------------------------------------------


def test_edge_hand_value():
    ci = _block([20, 40, 30, 60])  # center (25,50), w=10, h=20
    cj = _block([65, 40, 85, 60])  # center (75,50), w=20, h=20
    r = edge_feature(ci, cj, 100, 100)
    expected = [0.0, 2.0, 1.0, 50 / np.sqrt(20000), 50 / np.sqrt(200), 0.0, 0.0]
    np.testing.assert_allclose(r, expected, rtol=1e-5, atol=1e-12)
    # the two printed components to five significant digits
    assert round(r[3], 5) == 0.35355
    assert round(r[4], 4) == 3.5355


def test_edge_self_is_degenerate():
    c = _block([10, 10, 30, 50])
    r = edge_feature(c, c, 100, 100)
    np.testing.assert_allclose(r, [1, 1, 1, 0, 0, 0, 0], atol=1e-12)


def test_edge_swap_relations():
    rng = np.random.default_rng(8)
    for _ in range(100):
        p = rng.uniform(5, 40, 2)
        q = rng.uniform(50, 90, 2)
        ci = _block([p[0], p[1], p[0] + rng.uniform(2, 9), p[1] + rng.uniform(2, 9)])
        cj = _block([q[0], q[1], q[0] + rng.uniform(2, 9), q[1] + rng.uniform(2, 9)])
        rij = edge_feature(ci, cj, 100, 100)
        rji = edge_feature(cj, ci, 100, 100)
        assert rij[0] == rji[0]
        assert rij[3] == pytest.approx(rji[3], abs=1e-12)
        assert rij[1] * rji[1] == pytest.approx(1.0, abs=1e-12)
        assert rij[2] * rji[2] == pytest.approx(1.0, abs=1e-12)
        wrapped = (rji[6] - rij[6] + np.pi) % (2 * np.pi) - np.pi
        assert abs(abs(wrapped) - np.pi) < 1e-12


# -- color -------------------------------------------------------------------


def test_ycbcr_white_black():
    assert rgb_to_ycbcr(255, 255, 255) == pytest.approx((255, 128, 128), abs=1e-9)
    assert rgb_to_ycbcr(0, 0, 0) == pytest.approx((0, 128, 128), abs=1e-12)


def test_ycbcr_red_clamps():
    y, cb, cr = rgb_to_ycbcr(255, 0, 0)
    assert y == pytest.approx(76.245, abs=1e-9)
    assert cb == pytest.approx(84.97232, abs=1e-9)
    assert cr == 255.0


def test_chroma_subsample_pairs():
    seq = np.array([[10.0, 100.0, 40.0], [20.0, 200.0, 60.0]])
    out = chroma_subsample(seq)
    np.testing.assert_allclose(out[:, 0], [10, 20])  # luma untouched
    np.testing.assert_allclose(out[:, 1], [150, 150])
    np.testing.assert_allclose(out[:, 2], [50, 50])


def test_chroma_subsample_odd_tail():
    seq = np.array([[1.0, 100.0, 0.0], [1.0, 200.0, 0.0], [1.0, 50.0, 0.0]])
    out = chroma_subsample(seq)
    np.testing.assert_allclose(out[:, 1], [150, 150, 50])


def test_chroma_subsample_constant_unchanged():
    seq = np.tile([[5.0, 9.0, 7.0]], (4, 1))
    np.testing.assert_allclose(chroma_subsample(seq), seq)


# -- visual ------------------------------------------------------------------


def test_visual_sequence_bold_white():
    b = _block([0, 0, 10, 10], [_run("Hi", 12.0, bold=True, color=(255, 255, 255))])
    seq = visual_sequence(b)
    np.testing.assert_allclose(seq, [[2, 2], [12, 12], [255, 255]])


def test_visual_sequence_style_codes():
    b = _block([0, 0, 10, 10], [_run("a"), _run("b", italic=True)])
    assert visual_sequence(b)[0].tolist() == [0, 1]


def test_visual_sequence_empty():
    assert visual_sequence(_block([0, 0, 10, 10])).shape == (3, 0)


def test_pool_visual_empty_is_zero():
    np.testing.assert_array_equal(pool_visual(_block([0, 0, 10, 10]), 100), np.zeros(18))


def test_pool_visual_size_stats():
    b = _block([0, 0, 10, 10], [_run("a", 10.0), _run("b", 20.0)])
    v = pool_visual(b, 100)
    assert v[10] == pytest.approx(0.15)
    assert v[11] == pytest.approx(0.05)


def test_pool_visual_all_bold_single_font():
    b = _block([0, 0, 10, 10], [_run("abc", bold=True)])
    v = pool_visual(b, 100)
    assert v[0] == 1.0 and v[1] == 0.0
    hist = v[2:10]
    assert hist.sum() == pytest.approx(1.0)
    assert np.count_nonzero(hist) == 1


def test_pool_visual_run_segmentation_invariant():
    whole = _block([0, 0, 10, 10], [_run("hello world", 11.0, italic=True)])
    split = _block(
        [0, 0, 10, 10],
        [_run("hello ", 11.0, italic=True), _run("world", 11.0, italic=True)],
    )
    np.testing.assert_array_equal(pool_visual(whole, 200), pool_visual(split, 200))


# -- semantic ----------------------------------------------------------------


def test_semantic_onehot_order():
    p = semantic_onehot("paragraph")
    assert p[0] == 1 and p.sum() == 1
    o = semantic_onehot("other")
    assert o[10] == 1 and o.sum() == 1


def test_semantic_onehot_fallback_warns():
    with pytest.warns(UserWarning, match="weird_label"):
        v = semantic_onehot("weird_label")
    assert v[10] == 1 and v.sum() == 1


# -- font style --------------------------------------------------------------


def test_font_style_liberation_sans_bold():
    bits = font_style_encoding("LiberationSans", True, False)
    assert bits.shape == (10,)
    assert bits[:8].sum() == 1
    assert bits[8] == 1 and bits[9] == 0


def test_font_style_same_family_same_bucket():
    a = font_style_encoding("LiberationSans", False, False)
    b = font_style_encoding("LiberationSans", True, True)
    np.testing.assert_array_equal(a[:8], b[:8])
    assert a[8] == 0 and a[9] == 0
    assert b[8] == 1 and b[9] == 1
