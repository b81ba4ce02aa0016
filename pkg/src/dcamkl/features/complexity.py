"""Image complexity: gray-level entropy, spatial-information statistics, and
edge-map statistics including the JPEG compression rate of the edge map."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .filters import canny_edges, gradient_magnitude
from .image import RasterImage, to_gray

ENTROPY_BINS = 256
JPEG_QUALITY = 75


def gray_entropy(gray: np.ndarray) -> float:
    """Shannon entropy (bits) over 256 quantized gray levels."""
    q = np.minimum((gray * ENTROPY_BINS).astype(np.int64), ENTROPY_BINS - 1)
    counts = np.bincount(q.ravel(), minlength=ENTROPY_BINS).astype(np.float64)
    p = counts / counts.sum()
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum() + 0.0)


def jpeg_compression_rate(binary: np.ndarray) -> float:
    """Compressed byte size / raw byte size for an 8-bit grayscale encoding
    of the map at quality 75."""
    arr = (binary.astype(np.uint8)) * 255
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="JPEG", quality=JPEG_QUALITY)
    raw_bytes = arr.shape[0] * arr.shape[1]
    return buf.getbuffer().nbytes / raw_bytes


def complexity_features(img: RasterImage) -> np.ndarray:
    """Six values: gray-level entropy; mean and RMS of the gradient-magnitude
    (spatial information) image; mean, std, and JPEG compression rate of the
    Canny edge map."""
    gray = to_gray(img)
    si = gradient_magnitude(gray)
    edges = canny_edges(gray)
    edge_f = edges.astype(np.float64)
    return np.array([
        gray_entropy(gray),
        float(si.mean()),
        float(np.sqrt((si ** 2).mean())),
        float(edge_f.mean()),
        float(edge_f.std()),
        jpeg_compression_rate(edges),
    ])


def complexity_feature_names() -> tuple[str, ...]:
    return ("entropy", "si_mean", "si_rms",
            "edge_mean", "edge_std", "edge_jpeg_rate")
