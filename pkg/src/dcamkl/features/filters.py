"""Shared gradient and edge-detection machinery for the extractors."""

from __future__ import annotations

import numpy as np

SOBEL_X = np.array([[-1.0, 0.0, 1.0],
                    [-2.0, 0.0, 2.0],
                    [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T

CANNY_SIGMA = 1.4
CANNY_HIGH_FRACTION = 0.2   # of the max gradient magnitude
CANNY_LOW_FRACTION = 0.5    # of the high threshold


def convolve2d_reflect(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Same-size 2-D correlation with reflect padding."""
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    padded = np.pad(img, ((ph, ph), (pw, pw)), mode="reflect")
    out = np.zeros_like(img)
    for i in range(kh):
        for j in range(kw):
            out += kernel[i, j] * padded[i:i + img.shape[0], j:j + img.shape[1]]
    return out


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    radius = int(np.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs ** 2) / (2.0 * sigma ** 2))
    return k / k.sum()


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing with reflect padding."""
    k = gaussian_kernel_1d(sigma)
    blurred = convolve2d_reflect(img, k[None, :])
    return convolve2d_reflect(blurred, k[:, None])


def sobel_gradients(gray: np.ndarray):
    """Sobel responses (gx, gy) over the full image, reflect-padded borders."""
    gx = convolve2d_reflect(gray, SOBEL_X)
    gy = convolve2d_reflect(gray, SOBEL_Y)
    return gx, gy


def gradient_magnitude(gray: np.ndarray) -> np.ndarray:
    gx, gy = sobel_gradients(gray)
    return np.hypot(gx, gy)


def canny_edges(gray: np.ndarray, sigma: float = CANNY_SIGMA,
                high_fraction: float = CANNY_HIGH_FRACTION,
                low_fraction: float = CANNY_LOW_FRACTION) -> np.ndarray:
    """Boolean edge map: Gaussian smoothing, Sobel gradients, non-maximum
    suppression along the quantized gradient direction, and hysteresis with
    thresholds relative to the peak gradient magnitude."""
    smoothed = gaussian_blur(gray, sigma)
    gx, gy = sobel_gradients(smoothed)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    # Flat images leave only accumulation roundoff (~1e-16); the relative
    # thresholds must not latch onto it.
    if peak <= 1e-12:
        return np.zeros_like(gray, dtype=bool)

    # Quantize the gradient direction into 4 bins and compare against the two
    # neighbors along that direction.
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    h, w = gray.shape
    padded = np.pad(mag, 1, mode="constant")
    center = padded[1:-1, 1:-1]

    def shifted(dr, dc):
        return padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]

    d0 = (angle < 22.5) | (angle >= 157.5)       # horizontal gradient
    d45 = (angle >= 22.5) & (angle < 67.5)
    d90 = (angle >= 67.5) & (angle < 112.5)      # vertical gradient
    d135 = (angle >= 112.5) & (angle < 157.5)

    keep = np.zeros((h, w), dtype=bool)
    keep |= d0 & (center >= shifted(0, 1)) & (center >= shifted(0, -1))
    keep |= d45 & (center >= shifted(-1, 1)) & (center >= shifted(1, -1))
    keep |= d90 & (center >= shifted(1, 0)) & (center >= shifted(-1, 0))
    keep |= d135 & (center >= shifted(-1, -1)) & (center >= shifted(1, 1))
    thin = np.where(keep, mag, 0.0)

    high = high_fraction * peak
    low = low_fraction * high
    strong = thin >= high
    weak = thin >= low

    # Hysteresis: grow the strong set through weak pixels (8-connectivity).
    edges = strong.copy()
    while True:
        grown = edges.copy()
        grown[1:, :] |= edges[:-1, :]
        grown[:-1, :] |= edges[1:, :]
        grown[:, 1:] |= edges[:, :-1]
        grown[:, :-1] |= edges[:, 1:]
        grown[1:, 1:] |= edges[:-1, :-1]
        grown[1:, :-1] |= edges[:-1, 1:]
        grown[:-1, 1:] |= edges[1:, :-1]
        grown[:-1, :-1] |= edges[1:, 1:]
        grown &= weak
        if (grown == edges).all():
            break
        edges = grown
    return edges
