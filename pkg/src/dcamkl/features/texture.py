"""Texture descriptors: gray-level co-occurrence statistics, rotation-
invariant uniform local binary patterns, and Haar wavelet subband energies."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .image import RasterImage, to_gray

GLCM_LEVELS = 8
GLCM_OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1))   # 0, 45, 90, 135 degrees
GLCM_ANGLES = (0, 45, 90, 135)

LBP_POINTS = 8
HAAR_LEVELS = 3


def _quantize(gray: np.ndarray, levels: int) -> np.ndarray:
    return np.minimum((gray * levels).astype(np.int64), levels - 1)


def _cooccurrence(q: np.ndarray, dr: int, dc: int, levels: int) -> np.ndarray:
    """Symmetric normalized co-occurrence table for one offset."""
    h, w = q.shape
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    a = q[r0:r1, c0:c1].ravel()
    b = q[r0 + dr:r1 + dr, c0 + dc:c1 + dc].ravel()
    counts = np.bincount(a * levels + b, minlength=levels * levels)
    table = counts.reshape(levels, levels).astype(np.float64)
    table = table + table.T
    total = table.sum()
    if total > 0:
        table /= total
    return table


def _glcm_stats(P: np.ndarray) -> list[float]:
    levels = P.shape[0]
    idx = np.arange(levels, dtype=np.float64)
    diff2 = (idx[:, None] - idx[None, :]) ** 2

    contrast = float((P * diff2).sum())
    energy = float((P * P).sum())
    nz = P[P > 0]
    entropy = float(-(nz * np.log2(nz)).sum() + 0.0) if nz.size else 0.0
    idm = float((P / (1.0 + diff2)).sum())

    pi = P.sum(axis=1)
    mu = float(idx @ pi)
    var = float(((idx - mu) ** 2) @ pi)
    if var <= 0:
        correlation = 0.0    # degenerate marginal: single occupied level
    else:
        correlation = float(((idx[:, None] - mu) * (idx[None, :] - mu) * P).sum() / var)
    return [contrast, energy, entropy, idm, correlation]


def glcm_features(img: RasterImage) -> np.ndarray:
    """Contrast, energy, entropy, inverse difference moment, and correlation
    at distance 1 for each of the four principal directions (20 values).

    Intensities are quantized to 8 gray levels; each directional table is
    symmetric and normalized to sum 1.
    """
    gray = to_gray(img)
    if gray.shape[0] < 2 or gray.shape[1] < 2:
        raise ValidationError("co-occurrence features need at least a 2x2 image")
    q = _quantize(gray, GLCM_LEVELS)
    out = []
    for dr, dc in GLCM_OFFSETS:
        out.extend(_glcm_stats(_cooccurrence(q, dr, dc, GLCM_LEVELS)))
    return np.array(out)


def glcm_feature_names() -> tuple[str, ...]:
    stats = ("contrast", "energy", "entropy", "idm", "correlation")
    return tuple(f"glcm_{s}_{a}" for a in GLCM_ANGLES for s in stats)


# Circular neighbor offsets (row, col) for P=8, R=1, starting at angle 0 and
# proceeding counter-clockwise. Diagonal samples are bilinear.
_S = np.sqrt(2.0) / 2.0
LBP_OFFSETS = ((0.0, 1.0), (-_S, _S), (-1.0, 0.0), (-_S, -_S),
               (0.0, -1.0), (_S, -_S), (1.0, 0.0), (_S, _S))


def _sample_offset(gray: np.ndarray, dr: float, dc: float) -> np.ndarray:
    """Bilinear sample of interior-pixel neighbors at a constant offset."""
    h, w = gray.shape
    r0 = int(np.floor(1.0 + dr))
    c0 = int(np.floor(1.0 + dc))
    tr = (1.0 + dr) - r0
    tc = (1.0 + dc) - c0
    hh, ww = h - 2, w - 2

    out = np.zeros((hh, ww))
    for ro, wr in ((r0, 1.0 - tr), (r0 + 1, tr)):
        if wr == 0.0:
            continue
        for co, wc in ((c0, 1.0 - tc), (c0 + 1, tc)):
            if wc == 0.0:
                continue
            out += wr * wc * gray[ro:ro + hh, co:co + ww]
    return out


def lbp_riu2_histogram(img: RasterImage) -> np.ndarray:
    """Normalized 10-bin histogram of rotation-invariant uniform binary
    patterns (P=8, R=1) over the interior pixels.

    Bins 0..8 count uniform patterns by their number of set bits; bin 9
    collects non-uniform patterns. A neighbor counts as set when its
    (bilinearly sampled) value is >= the center value; a 1e-12 guard keeps
    interpolation roundoff from flipping bits in flat regions.
    """
    gray = to_gray(img)
    if gray.shape[0] < 3 or gray.shape[1] < 3:
        raise ValidationError("binary patterns need at least a 3x3 image")
    center = gray[1:-1, 1:-1]
    bits = np.stack([_sample_offset(gray, dr, dc) - center >= -1e-12
                     for dr, dc in LBP_OFFSETS])
    transitions = (bits != np.roll(bits, 1, axis=0)).sum(axis=0)
    ones = bits.sum(axis=0)
    codes = np.where(transitions <= 2, ones, 9)
    hist = np.bincount(codes.ravel(), minlength=10).astype(np.float64)
    return hist / hist.sum()


def lbp_feature_names() -> tuple[str, ...]:
    return tuple(f"lbp_riu2_{i}" for i in range(9)) + ("lbp_nonuniform",)


def _haar_step(a: np.ndarray):
    """One orthonormal 2-D Haar decomposition step."""
    p00 = a[0::2, 0::2]
    p01 = a[0::2, 1::2]
    p10 = a[1::2, 0::2]
    p11 = a[1::2, 1::2]
    ll = (p00 + p01 + p10 + p11) / 2.0
    dh = (p00 + p01 - p10 - p11) / 2.0   # responds to horizontal edges
    dv = (p00 - p01 + p10 - p11) / 2.0   # responds to vertical edges
    dd = (p00 - p01 - p10 + p11) / 2.0
    return ll, dh, dv, dd


def haar_wavelet_features(img: RasterImage) -> np.ndarray:
    """Mean absolute coefficient and mean squared coefficient for the nine
    detail subbands of a 3-level Haar transform plus the final approximation
    (20 values). Sides are cropped to multiples of 8 first."""
    gray = to_gray(img)
    h8 = (gray.shape[0] // 8) * 8
    w8 = (gray.shape[1] // 8) * 8
    if h8 < 8 or w8 < 8:
        raise ValidationError("wavelet features need at least an 8x8 image")
    a = gray[:h8, :w8]
    out = []
    for _ in range(HAAR_LEVELS):
        a, dh, dv, dd = _haar_step(a)
        for band in (dh, dv, dd):
            out.append(float(np.abs(band).mean()))
            out.append(float((band ** 2).mean()))
    out.append(float(np.abs(a).mean()))
    out.append(float((a ** 2).mean()))
    return np.array(out)


def haar_feature_names() -> tuple[str, ...]:
    names = []
    for level in range(1, HAAR_LEVELS + 1):
        for band in ("h", "v", "d"):
            names.append(f"haar_l{level}_{band}_absmean")
            names.append(f"haar_l{level}_{band}_energy")
    names.append("haar_approx_absmean")
    names.append("haar_approx_energy")
    return tuple(names)
