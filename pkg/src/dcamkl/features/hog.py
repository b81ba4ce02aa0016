"""Oriented-gradient histogram descriptor on a fixed 128x128 canvas."""

from __future__ import annotations

import numpy as np

from .image import RasterImage, resize_bilinear, to_gray

HOG_SIZE = 128
CELL = 8                 # pixels per cell side
ORIENT_BINS = 9          # unsigned, 20 degrees each
BLOCK = 2                # cells per block side
BLOCK_SUBSAMPLE = 2      # stride over the block grid
CLIP = 0.2
NORM_EPS = 1e-12


def hog_features(img: RasterImage) -> np.ndarray:
    """Descriptor over a 16x16 cell grid: 2x2-cell blocks at stride 1 are
    L2-normalized, clipped at 0.2 and renormalized; the 15x15 block grid is
    subsampled at stride 2 to 7x7 blocks of 36 values (1764 total)."""
    gray = resize_bilinear(to_gray(img), HOG_SIZE, HOG_SIZE)
    gy, gx = np.gradient(gray)
    mag = np.hypot(gx, gy)
    theta = np.arctan2(gy, gx) % np.pi
    obin = np.minimum((theta / (np.pi / ORIENT_BINS)).astype(np.int64),
                      ORIENT_BINS - 1)

    n_cells = HOG_SIZE // CELL
    rows = np.repeat(np.arange(HOG_SIZE) // CELL, HOG_SIZE)
    cols = np.tile(np.arange(HOG_SIZE) // CELL, HOG_SIZE)
    flat_idx = (rows * n_cells + cols) * ORIENT_BINS + obin.ravel()
    cells = np.bincount(flat_idx, weights=mag.ravel(),
                        minlength=n_cells * n_cells * ORIENT_BINS)
    cells = cells.reshape(n_cells, n_cells, ORIENT_BINS)

    # 15x15 block grid; stride-2 subsampling over the first 14 rows/columns
    # leaves an even 7x7 grid (the trailing block is dropped).
    n_blocks = n_cells - BLOCK + 1
    picks = range(0, n_blocks - 1, BLOCK_SUBSAMPLE)
    out = []
    for br in picks:
        for bc in picks:
            v = cells[br:br + BLOCK, bc:bc + BLOCK, :].ravel()
            v = v / np.sqrt(v @ v + NORM_EPS ** 2)
            np.minimum(v, CLIP, out=v)
            v = v / np.sqrt(v @ v + NORM_EPS ** 2)
            out.append(v)
    return np.concatenate(out)


def hog_feature_names() -> tuple[str, ...]:
    n_blocks = HOG_SIZE // CELL - BLOCK + 1
    picks = list(range(0, n_blocks - 1, BLOCK_SUBSAMPLE))
    return tuple(f"hog_b{br}_{bc}_{k}"
                 for br in picks for bc in picks
                 for k in range(BLOCK * BLOCK * ORIENT_BINS))
