"""Corpus-relative unusualness features: mean distance to the k closest
reference samples, and the density-ratio local outlier factor."""

from __future__ import annotations

import numpy as np

from ..dataset import FeatureSet
from ..errors import ValidationError

DEFAULT_K = 10
DISTANCE_FLOOR = 1e-12


def chi_squared_distances(targets: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Pairwise chi-squared histogram distances, shape (n_targets, n_ref):
    sum over bins of (u - v)^2 / (u + v), skipping empty bins."""
    nt = targets.shape[1]
    nr = reference.shape[1]
    out = np.zeros((nt, nr))
    for j in range(nt):
        u = targets[:, j][:, None]
        v = reference
        denom = u + v
        num = (u - v) ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            terms = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
        out[j] = terms.sum(axis=0)
    return out


def familiarity(targets: FeatureSet, reference: FeatureSet, k: int = DEFAULT_K) -> np.ndarray:
    """Per target, the mean chi-squared distance to its k nearest reference
    histograms; reference columns sharing the target's sample id are skipped.
    Larger values mean more unusual content."""
    if targets.dim != reference.dim:
        raise ValidationError("target/reference feature dimensions differ")
    if k <= 0:
        raise ValidationError("k must be positive")
    D = chi_squared_distances(targets.values, reference.values)
    ref_ids = reference.sample_ids
    out = np.zeros(targets.n_samples)
    for j, sid in enumerate(targets.sample_ids):
        row = D[j]
        mask = np.array([rid != sid for rid in ref_ids])
        usable = row[mask]
        if usable.shape[0] < k:
            raise ValidationError(
                f"reference has {usable.shape[0]} usable samples for id {sid!r}, need k={k}")
        nearest = np.partition(usable, k - 1)[:k]
        out[j] = float(nearest.mean())
    return out


def _pairwise_euclidean(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    sq_a = np.einsum("ij,ij->j", A, A)
    sq_b = np.einsum("ij,ij->j", B, B)
    d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * (A.T @ B)
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2)


def _neighborhoods(D: np.ndarray, k: int):
    """k-distance and neighborhood (all points within the k-distance) per row
    of a floored distance matrix with self-distances removed (set to inf)."""
    n = D.shape[0]
    kdist = np.zeros(n)
    neighbors = []
    for i in range(n):
        row = D[i]
        kdist[i] = np.partition(row, k - 1)[k - 1]
        members = np.flatnonzero(row <= kdist[i])
        neighbors.append(members)
    return kdist, neighbors


def lof_scores(points: FeatureSet, k: int = DEFAULT_K) -> np.ndarray:
    """Local outlier factor per sample within the set (Euclidean distances,
    k-distance neighborhoods, reachability distances, local reachability
    density). Scores near 1 mark inliers; clearly larger values outliers.

    Distances are floored at 1e-12 so duplicated points keep densities finite.
    """
    n = points.n_samples
    if n <= k:
        raise ValidationError(f"need more than k={k} samples, got {n}")
    D = _pairwise_euclidean(points.values, points.values)
    D = np.maximum(D, DISTANCE_FLOOR)
    np.fill_diagonal(D, np.inf)

    kdist, neighbors = _neighborhoods(D, k)
    lrd = np.zeros(n)
    for i in range(n):
        reach = np.maximum(kdist[neighbors[i]], D[i, neighbors[i]])
        lrd[i] = len(neighbors[i]) / reach.sum()
    out = np.zeros(n)
    for i in range(n):
        out[i] = float(lrd[neighbors[i]].mean() / lrd[i])
    return out


def lof_query(targets: FeatureSet, reference: FeatureSet, k: int = DEFAULT_K) -> np.ndarray:
    """Score held-out points against a fitted reference set: neighborhoods,
    k-distances and densities come from the reference only."""
    if targets.dim != reference.dim:
        raise ValidationError("target/reference feature dimensions differ")
    n_ref = reference.n_samples
    if n_ref <= k:
        raise ValidationError(f"need more than k={k} reference samples, got {n_ref}")
    D_ref = _pairwise_euclidean(reference.values, reference.values)
    D_ref = np.maximum(D_ref, DISTANCE_FLOOR)
    np.fill_diagonal(D_ref, np.inf)
    kdist, neighbors = _neighborhoods(D_ref, k)
    lrd = np.zeros(n_ref)
    for i in range(n_ref):
        reach = np.maximum(kdist[neighbors[i]], D_ref[i, neighbors[i]])
        lrd[i] = len(neighbors[i]) / reach.sum()

    D = np.maximum(_pairwise_euclidean(targets.values, reference.values),
                   DISTANCE_FLOOR)
    out = np.zeros(targets.n_samples)
    for j in range(targets.n_samples):
        row = D[j]
        kd = np.partition(row, k - 1)[k - 1]
        members = np.flatnonzero(row <= kd)
        reach = np.maximum(kdist[members], row[members])
        lrd_t = len(members) / reach.sum()
        out[j] = float(lrd[members].mean() / lrd_t)
    return out
