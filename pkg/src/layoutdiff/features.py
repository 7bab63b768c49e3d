"""Per-node and per-edge numeric features of the layout graph.

Every function here is pure and deterministic.  Geometry uses the block
centroid convention (cx, cy) = ((x0+x1)/2, (y0+y1)/2) with the top-left
origin of :mod:`layoutdiff.docmodel`.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .docmodel import BBox, Block, CLASS_LABELS
from .hashing import fnv1a_64

#: Buckets for the hashed font-family part of the style encoding.
FONT_BUCKETS = 8

#: Length of the pooled visual feature vector:
#: [bold frac, italic frac] + 8 family buckets + [size mean, size std] + 6 color stats.
VISUAL_DIM = 18

SEMANTIC_DIM = len(CLASS_LABELS)
EDGE_DIM = 7
GEOMETRIC_DIM = 5


def geometric_feature(block: Block, page_w: float, page_h: float) -> np.ndarray:
    """5-vector [cx/w, cy/h, bw/w, bh/h, sqrt(bw*bh)/(w*h)], all in [0,1] in-page."""
    if page_w <= 0 or page_h <= 0:
        raise ValueError(f"page dims must be > 0, got {page_w} x {page_h}")
    b = block.bbox
    area_side = math.sqrt(b.width * b.height)
    return np.array(
        [
            b.cx / page_w,
            b.cy / page_h,
            b.width / page_w,
            b.height / page_h,
            area_side / (page_w * page_h),
        ],
        dtype=np.float64,
    )


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes; 0.0 when disjoint."""
    ix = min(a.x1, b.x1) - max(a.x0, b.x0)
    iy = min(a.y1, b.y1) - max(a.y0, b.y0)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    return inter / union


def edge_feature(ci: Block, cj: Block, page_w: float, page_h: float) -> np.ndarray:
    """7-vector of pairwise geometry from ci to cj.

    [iou, wj/wi, hj/hi, dist/diag, dx/sqrt(wi*hi), dy/sqrt(wi*hi), atan2(dy, dx)]
    with dx = cxj - cxi, dy = cyj - cyi and diag the page diagonal.
    atan2(0, 0) is defined as 0 for coincident centroids.
    """
    bi, bj = ci.bbox, cj.bbox
    dx = bj.cx - bi.cx
    dy = bj.cy - bi.cy
    diag = math.sqrt(page_w * page_w + page_h * page_h)
    ai = math.sqrt(bi.width * bi.height)
    theta = 0.0 if dx == 0.0 and dy == 0.0 else math.atan2(dy, dx)
    return np.array(
        [
            iou(bi, bj),
            bj.width / bi.width,
            bj.height / bi.height,
            math.hypot(dx, dy) / diag,
            dx / ai,
            dy / ai,
            theta,
        ],
        dtype=np.float64,
    )


def rgb_to_ycbcr(r: float, g: float, b: float) -> tuple[float, float, float]:
    """Full-range BT.601 conversion, each channel clamped to [0, 255]."""
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    clamp = lambda v: min(255.0, max(0.0, v))
    return clamp(y), clamp(cb), clamp(cr)


def chroma_subsample(ycbcr: np.ndarray) -> np.ndarray:
    """Average Cb/Cr over adjacent character pairs; an odd tail keeps its own.

    Input and output are (N, 3) arrays; luma is left untouched and the
    length is preserved.
    """
    ycbcr = np.asarray(ycbcr, dtype=np.float64)
    out = ycbcr.copy()
    n = out.shape[0]
    even = n - (n % 2)
    for c in (1, 2):
        pairs = out[:even, c].reshape(-1, 2)
        means = pairs.mean(axis=1)
        out[:even, c] = np.repeat(means, 2)
    return out


def _char_style_table(block: Block) -> tuple[list[int], np.ndarray, np.ndarray, list[str]]:
    """Expand runs to per-character (style code, size, rgb, family)."""
    codes: list[int] = []
    sizes: list[float] = []
    rgbs: list[tuple[int, int, int]] = []
    families: list[str] = []
    for run in block.runs:
        code = 2 * int(run.bold) + int(run.italic)
        for _ in run.text:
            codes.append(code)
            sizes.append(run.size)
            rgbs.append(run.color)
            families.append(run.font_family)
    return codes, np.array(sizes, dtype=np.float64), np.array(rgbs, dtype=np.float64), families


def visual_sequence(block: Block) -> np.ndarray:
    """3xN matrix over the block's characters: style code, size, color luma.

    N equals the length of the block text; empty text gives a 3x0 matrix.
    Style codes are 2*bold + italic.
    """
    codes, sizes, rgbs, _ = _char_style_table(block)
    if not codes:
        return np.zeros((3, 0), dtype=np.float64)
    luma = np.array([rgb_to_ycbcr(*rgb)[0] for rgb in rgbs], dtype=np.float64)
    return np.vstack([np.array(codes, dtype=np.float64), sizes, luma])


def font_bucket(family: str) -> int:
    return fnv1a_64(family) % FONT_BUCKETS


def font_style_encoding(family: str, bold: bool, italic: bool) -> np.ndarray:
    """Fixed-width style bits: 8 one-hot family-bucket bits, then bold, then italic."""
    bits = np.zeros(FONT_BUCKETS + 2, dtype=np.int64)
    bits[font_bucket(family)] = 1
    bits[FONT_BUCKETS] = int(bool(bold))
    bits[FONT_BUCKETS + 1] = int(bool(italic))
    return bits


def pool_visual(block: Block, page_h: float) -> np.ndarray:
    """Pool per-character style/size/color into a fixed 18-vector.

    Layout: [bold frac, italic frac] + normalized 8-bucket family histogram
    + [size mean, size std] / page_h + [Y, Cb, Cr mean/std pairs] / 255,
    color stats taken over the chroma-subsampled sequence.  Standard
    deviations are population deviations.  Empty text gives all zeros.
    """
    codes, sizes, rgbs, families = _char_style_table(block)
    out = np.zeros(VISUAL_DIM, dtype=np.float64)
    n = len(codes)
    if n == 0:
        return out
    codes_arr = np.array(codes)
    out[0] = float(np.mean(codes_arr >= 2))
    out[1] = float(np.mean(codes_arr % 2 == 1))
    for fam in families:
        out[2 + font_bucket(fam)] += 1.0
    out[2 : 2 + FONT_BUCKETS] /= n
    out[10] = sizes.mean() / page_h
    out[11] = sizes.std() / page_h
    ycbcr = np.array([rgb_to_ycbcr(*rgb) for rgb in rgbs], dtype=np.float64)
    ycbcr = chroma_subsample(ycbcr)
    for c in range(3):
        out[12 + 2 * c] = ycbcr[:, c].mean() / 255.0
        out[13 + 2 * c] = ycbcr[:, c].std() / 255.0
    return out


def semantic_onehot(class_label: str) -> np.ndarray:
    """One-hot over the fixed class vocabulary; unknown labels fall back to "other"."""
    vec = np.zeros(SEMANTIC_DIM, dtype=np.float64)
    try:
        idx = CLASS_LABELS.index(class_label)
    except ValueError:
        warnings.warn(f"unknown class label {class_label!r}, using 'other'", stacklevel=2)
        idx = CLASS_LABELS.index("other")
    vec[idx] = 1.0
    return vec
