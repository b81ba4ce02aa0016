"""Shape descriptors: Sobel edge-orientation histogram and log-compressed
moment invariants of the Canny edge map."""

from __future__ import annotations

import numpy as np

from .filters import canny_edges, sobel_gradients
from .image import RasterImage, to_gray

EDGE_ORIENTATION_BINS = 8
HU_LOG_EPS = 1e-30


def edge_histogram_sobel(img: RasterImage) -> np.ndarray:
    """Normalized 8-bin orientation histogram (45-degree sectors) of Sobel
    gradients over pixels whose magnitude exceeds the mean magnitude.
    All-zeros when no pixel passes the threshold."""
    gray = to_gray(img)
    gx, gy = sobel_gradients(gray)
    mag = np.hypot(gx, gy)
    mask = mag > max(mag.mean(), 1e-12)   # floor guards flat-image roundoff
    if not mask.any():
        return np.zeros(EDGE_ORIENTATION_BINS)
    theta = np.arctan2(gy[mask], gx[mask]) % (2.0 * np.pi)
    bins = np.minimum((theta / (np.pi / 4.0)).astype(np.int64),
                      EDGE_ORIENTATION_BINS - 1)
    hist = np.bincount(bins, minlength=EDGE_ORIENTATION_BINS).astype(np.float64)
    return hist / hist.sum()


def edge_histogram_feature_names() -> tuple[str, ...]:
    return tuple(f"edgehist_{i * 45}" for i in range(EDGE_ORIENTATION_BINS))


def hu_moments(binary: np.ndarray) -> np.ndarray:
    """The seven moment invariants of a binary (or gray) image."""
    img = binary.astype(np.float64)
    m00 = img.sum()
    if m00 <= 0:
        return np.zeros(7)
    h, w = img.shape
    ys = np.arange(h, dtype=np.float64)[:, None]
    xs = np.arange(w, dtype=np.float64)[None, :]
    xbar = (img * xs).sum() / m00
    ybar = (img * ys).sum() / m00
    dx = xs - xbar
    dy = ys - ybar

    def mu(p, q):
        return float((img * dx ** p * dy ** q).sum())

    def eta(p, q):
        return mu(p, q) / m00 ** (1.0 + (p + q) / 2.0)

    n20, n02, n11 = eta(2, 0), eta(0, 2), eta(1, 1)
    n30, n03 = eta(3, 0), eta(0, 3)
    n21, n12 = eta(2, 1), eta(1, 2)

    h1 = n20 + n02
    h2 = (n20 - n02) ** 2 + 4.0 * n11 ** 2
    h3 = (n30 - 3 * n12) ** 2 + (3 * n21 - n03) ** 2
    h4 = (n30 + n12) ** 2 + (n21 + n03) ** 2
    h5 = ((n30 - 3 * n12) * (n30 + n12)
          * ((n30 + n12) ** 2 - 3 * (n21 + n03) ** 2)
          + (3 * n21 - n03) * (n21 + n03)
          * (3 * (n30 + n12) ** 2 - (n21 + n03) ** 2))
    h6 = ((n20 - n02) * ((n30 + n12) ** 2 - (n21 + n03) ** 2)
          + 4.0 * n11 * (n30 + n12) * (n21 + n03))
    h7 = ((3 * n21 - n03) * (n30 + n12)
          * ((n30 + n12) ** 2 - 3 * (n21 + n03) ** 2)
          - (n30 - 3 * n12) * (n21 + n03)
          * (3 * (n30 + n12) ** 2 - (n21 + n03) ** 2))
    return np.array([h1, h2, h3, h4, h5, h6, h7])


def hu_moments_canny(img: RasterImage) -> np.ndarray:
    """Seven moment invariants of the Canny edge map, compressed as
    sign(h) * log10(|h| + 1e-30); an empty edge map yields all zeros."""
    edges = canny_edges(to_gray(img))
    if not edges.any():
        return np.zeros(7)
    hu = hu_moments(edges)
    return np.sign(hu) * np.log10(np.abs(hu) + HU_LOG_EPS)


def hu_feature_names() -> tuple[str, ...]:
    return tuple(f"hu_log_{i + 1}" for i in range(7))
