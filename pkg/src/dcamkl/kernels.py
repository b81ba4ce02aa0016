"""Kernel evaluation, Gram matrices, and convex kernel combination."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FeatureSet
from .errors import ValidationError

SIGMA_FLOOR = 1e-6
SIMPLEX_TOL = 1e-8


@dataclass(frozen=True)
class KernelSpec:
    """Parameterization of a Gaussian (rbf) or polynomial kernel.

    rbf:        k(u, v) = exp(-||u - v||^2 / (2 sigma^2))
    polynomial: k(u, v) = (scale * u.v + offset) ** degree
    """

    kind: str
    sigma: float = 1.0
    degree: int = 2
    scale: float = 1.0
    offset: float = 1.0

    def __post_init__(self):
        if self.kind not in ("rbf", "polynomial"):
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and not self.sigma > 0:
            raise ValidationError("rbf sigma must be positive")
        if self.kind == "polynomial":
            if self.degree < 1:
                raise ValidationError("polynomial degree must be >= 1")
            if not self.scale > 0:
                raise ValidationError("polynomial scale must be positive")
            if self.offset < 0:
                raise ValidationError("polynomial offset must be >= 0")

    def to_dict(self) -> dict:
        if self.kind == "rbf":
            return {"kind": "rbf", "sigma": self.sigma}
        return {"kind": "polynomial", "degree": self.degree,
                "scale": self.scale, "offset": self.offset}

    @classmethod
    def from_dict(cls, data: dict) -> "KernelSpec":
        kind = data.get("kind")
        if kind == "rbf":
            return cls(kind="rbf", sigma=float(data["sigma"]))
        if kind == "polynomial":
            return cls(kind="polynomial", degree=int(data["degree"]),
                       scale=float(data.get("scale", 1.0)),
                       offset=float(data.get("offset", 1.0)))
        raise ValidationError(f"unknown kernel kind {kind!r}")


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric n x n kernel matrix with its generating spec."""

    values: np.ndarray
    spec: KernelSpec | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValidationError("Gram matrix must be square")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def kernel_eval(spec: KernelSpec, u, v) -> float:
    """Evaluate the kernel on a single vector pair."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValidationError("kernel arguments must have equal length")
    if spec.kind == "rbf":
        d = u - v
        return float(np.exp(-(d @ d) / (2.0 * spec.sigma ** 2)))
    return float((spec.scale * (u @ v) + spec.offset) ** spec.degree)


def _rbf_block(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    sq_a = np.einsum("ij,ij->j", A, A)
    sq_b = np.einsum("ij,ij->j", B, B)
    d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * (A.T @ B)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-d2 / (2.0 * spec.sigma ** 2))


def _poly_block(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return (spec.scale * (A.T @ B) + spec.offset) ** spec.degree


def gram(spec: KernelSpec, X: FeatureSet) -> GramMatrix:
    """Training Gram matrix; exactly symmetric (upper triangle mirrored), and
    the rbf diagonal is pinned to 1."""
    K = _rbf_block(spec, X.values, X.values) if spec.kind == "rbf" \
        else _poly_block(spec, X.values, X.values)
    K = np.triu(K) + np.triu(K, 1).T
    if spec.kind == "rbf":
        np.fill_diagonal(K, 1.0)
    return GramMatrix(values=K, spec=spec)


def gram_cross(spec: KernelSpec, X_train: FeatureSet, X_test: FeatureSet) -> np.ndarray:
    """Rectangular kernel block, entry (t, i) = k(test_t, train_i)."""
    if X_train.dim != X_test.dim:
        raise ValidationError("train/test feature dimensions differ")
    if spec.kind == "rbf":
        return _rbf_block(spec, X_test.values, X_train.values)
    return _poly_block(spec, X_test.values, X_train.values)


def combine(grams: list[GramMatrix], d) -> GramMatrix:
    """Convex combination sum_m d_m K_m for weights d on the simplex."""
    d = np.asarray(d, dtype=np.float64)
    if len(grams) != d.shape[0]:
        raise ValidationError("one weight per Gram matrix required")
    if (d < -SIMPLEX_TOL).any() or abs(d.sum() - 1.0) > SIMPLEX_TOL:
        raise ValidationError("weights must lie on the probability simplex")
    shapes = {g.values.shape for g in grams}
    if len(shapes) != 1:
        raise ValidationError("Gram matrices must share one shape")
    out = np.zeros(next(iter(shapes)))
    for w, g in zip(d, grams):
        out += w * g.values
    return GramMatrix(values=out, spec=None)


def combine_cross(blocks: list[np.ndarray], d) -> np.ndarray:
    """Convex combination of rectangular kernel blocks."""
    d = np.asarray(d, dtype=np.float64)
    if len(blocks) != d.shape[0]:
        raise ValidationError("one weight per kernel block required")
    shapes = {b.shape for b in blocks}
    if len(shapes) != 1:
        raise ValidationError("kernel blocks must share one shape")
    out = np.zeros(next(iter(shapes)))
    for w, b in zip(d, blocks):
        out += w * b
    return out


def median_sigma(X: FeatureSet) -> float:
    """Scale-free rbf bandwidth: median pairwise distance / sqrt(2), so the
    median distance maps to exp(-1). Floored for degenerate inputs."""
    n = X.n_samples
    if n < 2:
        raise ValidationError("median bandwidth needs at least 2 samples")
    V = X.values
    sq = np.einsum("ij,ij->j", V, V)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (V.T @ V)
    np.maximum(d2, 0.0, out=d2)
    iu = np.triu_indices(n, k=1)
    med = float(np.median(np.sqrt(d2[iu])))
    return max(med / np.sqrt(2.0), SIGMA_FLOOR)
