"""Color descriptors: HSV moments, quantized autocorrelogram, color
histogram, and the brightness/saturation arousal score."""

from __future__ import annotations

import numpy as np

from .image import RasterImage, require_rgb, rgb_to_hsv, to_gray

QUANT_BINS_PER_CHANNEL = 4          # 4 x 4 x 4 = 64 quantized colors
N_QUANT_COLORS = QUANT_BINS_PER_CHANNEL ** 3
CORRELOGRAM_DISTANCES = (1, 3, 5, 7)

# Linear arousal model on luminance and saturation.
AROUSAL_BRIGHTNESS_COEF = -0.31
AROUSAL_SATURATION_COEF = 0.60


def color_moments_hsv(img: RasterImage) -> np.ndarray:
    """Per HSV channel: mean, standard deviation, and the sign-preserving
    cube root of the third central moment (9 values)."""
    require_rgb(img, "color moments")
    hsv = rgb_to_hsv(img.pixels)
    out = []
    for c in range(3):
        ch = hsv[..., c].ravel()
        mean = float(ch.mean())
        centered = ch - mean
        std = float(np.sqrt((centered ** 2).mean()))
        m3 = float((centered ** 3).mean())
        out.extend([mean, std, np.sign(m3) * np.abs(m3) ** (1.0 / 3.0)])
    return np.array(out)


def color_moments_feature_names() -> tuple[str, ...]:
    return tuple(f"cm_{ch}_{stat}" for ch in ("h", "s", "v")
                 for stat in ("mean", "std", "skew"))


def quantize_colors(px: np.ndarray) -> np.ndarray:
    """Map RGB pixels to 64 quantized color indices (4 bins per channel)."""
    b = QUANT_BINS_PER_CHANNEL
    q = np.minimum((px * b).astype(np.int64), b - 1)
    return q[..., 0] * b * b + q[..., 1] * b + q[..., 2]


def color_correlogram(img: RasterImage) -> np.ndarray:
    """Autocorrelogram over 64 quantized colors and distances {1, 3, 5, 7}.

    At each distance d the ring holds the 8 compass offsets scaled by d;
    entry (color, d) is the probability that a ring neighbor of a pixel of
    that color (in bounds) shares the color. Colors absent from the image
    keep probability 0.
    """
    require_rgb(img, "color correlogram")
    q = quantize_colors(img.pixels)
    h, w = q.shape
    out = np.zeros((len(CORRELOGRAM_DISTANCES), N_QUANT_COLORS))
    for di, d in enumerate(CORRELOGRAM_DISTANCES):
        same = np.zeros(N_QUANT_COLORS)
        valid = np.zeros(N_QUANT_COLORS)
        for dr, dc in ((0, d), (0, -d), (d, 0), (-d, 0),
                       (d, d), (d, -d), (-d, d), (-d, -d)):
            r0, r1 = max(0, -dr), min(h, h - dr)
            c0, c1 = max(0, -dc), min(w, w - dc)
            if r0 >= r1 or c0 >= c1:
                continue
            a = q[r0:r1, c0:c1].ravel()
            b = q[r0 + dr:r1 + dr, c0 + dc:c1 + dc].ravel()
            valid += np.bincount(a, minlength=N_QUANT_COLORS)
            same += np.bincount(a[a == b], minlength=N_QUANT_COLORS)
        occupied = valid > 0
        out[di, occupied] = same[occupied] / valid[occupied]
    # Layout: all colors at distance 1, then distance 3, ...
    return out.ravel()


def correlogram_feature_names() -> tuple[str, ...]:
    return tuple(f"corr_d{d}_c{c}" for d in CORRELOGRAM_DISTANCES
                 for c in range(N_QUANT_COLORS))


def color_histogram(img: RasterImage) -> np.ndarray:
    """Normalized 64-bin quantized RGB histogram."""
    require_rgb(img, "color histogram")
    q = quantize_colors(img.pixels)
    hist = np.bincount(q.ravel(), minlength=N_QUANT_COLORS).astype(np.float64)
    return hist / hist.sum()


def color_histogram_feature_names() -> tuple[str, ...]:
    return tuple(f"chist_{c}" for c in range(N_QUANT_COLORS))


def arousal_score(img: RasterImage) -> np.ndarray:
    """Mean over pixels of -0.31 * luminance + 0.60 * saturation."""
    require_rgb(img, "arousal score")
    y = to_gray(img)
    s = rgb_to_hsv(img.pixels)[..., 1]
    score = AROUSAL_BRIGHTNESS_COEF * y + AROUSAL_SATURATION_COEF * s
    return np.array([float(score.mean())])


def arousal_feature_names() -> tuple[str, ...]:
    return ("arousal",)
