"""Raster image container, decoding, and colorspace conversions.

Pixels are float64 in [0, 1]: shape (h, w) for grayscale, (h, w, 3) for RGB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from ..errors import ValidationError


@dataclass(frozen=True)
class RasterImage:
    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        object.__setattr__(self, "pixels", px)
        if px.ndim == 2:
            pass
        elif px.ndim == 3 and px.shape[2] == 3:
            pass
        else:
            raise ValidationError(f"unsupported pixel shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValidationError("empty image")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValidationError("intensities must lie in [0, 1]")
        px.setflags(write=False)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    @property
    def is_rgb(self) -> bool:
        return self.channels == 3


def load_image(path) -> RasterImage:
    """Decode an 8-bit PNG/BMP file; palette and alpha images collapse to RGB."""
    with Image.open(str(path)) as im:
        if im.mode == "L":
            arr = np.asarray(im, dtype=np.float64) / 255.0
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return RasterImage(pixels=arr)


def to_gray(img: RasterImage) -> np.ndarray:
    """Luminance conversion (Rec. 601 weights) to a (h, w) array."""
    if img.channels == 1:
        return img.pixels
    px = img.pixels
    return 0.299 * px[:, :, 0] + 0.587 * px[:, :, 1] + 0.114 * px[:, :, 2]


def require_rgb(img: RasterImage, op: str):
    if not img.is_rgb:
        raise ValidationError(f"{op} requires an RGB image")


def rgb_to_hsv(px: np.ndarray) -> np.ndarray:
    """Vectorized RGB -> HSV with all channels in [0, 1] (hue wraps at 1)."""
    r, g, b = px[..., 0], px[..., 1], px[..., 2]
    maxc = np.max(px, axis=-1)
    minc = np.min(px, axis=-1)
    delta = maxc - minc

    v = maxc
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)

    h = np.zeros_like(maxc)
    mask = delta > 0
    safe = np.where(mask, delta, 1.0)
    rc = (maxc - r) / safe
    gc = (maxc - g) / safe
    bc = (maxc - b) / safe
    h = np.where(mask & (maxc == r), bc - gc, h)
    h = np.where(mask & (maxc == g) & (maxc != r), 2.0 + rc - bc, h)
    h = np.where(mask & (maxc == b) & (maxc != r) & (maxc != g), 4.0 + gc - rc, h)
    h = (h / 6.0) % 1.0
    return np.stack([h, s, v], axis=-1)


def resize_bilinear(gray: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of a 2-D array with half-pixel center alignment."""
    h, w = gray.shape
    if (h, w) == (out_h, out_w):
        return gray.copy()
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    ys = np.clip(ys, 0, h - 1)
    xs = np.clip(xs, 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = gray[np.ix_(y0, x0)] * (1 - wx) + gray[np.ix_(y0, x1)] * wx
    bot = gray[np.ix_(y1, x0)] * (1 - wx) + gray[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy
