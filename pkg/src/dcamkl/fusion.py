"""Discriminant-correlated feature fusion.

Two linear maps are fitted jointly for a pair of feature sets so that

  * each set's between-class scatter becomes the identity (class centroids
    decorrelate),
  * the between-set covariance of the projected sets becomes the identity
    (corresponding rows correlate, non-corresponding rows do not).

Chained pairwise application (highest matrix rank first) extends the fusion
to more than two sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset import FeatureSet, check_alignment, default_feature_names
from .errors import DegenerateFusionError, ValidationError

EIGEN_TOL = 1e-10
SINGULAR_TOL = 1e-10


def _class_labels(labels) -> np.ndarray:
    """Accept a LabelVector or any integer array of class assignments."""
    arr = np.asarray(getattr(labels, "labels", labels))
    if arr.ndim != 1:
        raise ValidationError("class labels must be a vector")
    return arr


@dataclass(frozen=True)
class ScatterDecomposition:
    """Between-class scatter in factored form S_b = phi @ phi.T with an
    optional projection w_b satisfying w_b.T @ S_b @ w_b = I."""

    phi: np.ndarray                 # (p, c)
    w_b: np.ndarray | None = None   # (p, r)
    r: int = 0


def between_class_scatter(X: FeatureSet, labels) -> ScatterDecomposition:
    """Factor the between-class scatter: column i of phi is
    sqrt(n_i) * (class_mean_i - global_mean)."""
    y = _class_labels(labels)
    if y.shape[0] != X.n_samples:
        raise ValidationError("labels misaligned with feature columns")
    classes = np.unique(y)
    if classes.shape[0] < 2:
        raise ValidationError("between-class scatter needs at least 2 classes")
    grand = X.values.mean(axis=1)
    cols = []
    for c in classes:
        members = X.values[:, y == c]
        cols.append(np.sqrt(members.shape[1]) * (members.mean(axis=1) - grand))
    return ScatterDecomposition(phi=np.column_stack(cols))


def unitize_scatter(decomp: ScatterDecomposition, tol: float = EIGEN_TOL) -> ScatterDecomposition:
    """Build w_b with w_b.T @ (phi phi.T) @ w_b = I(r).

    Works on the small c x c Gram matrix phi.T @ phi: with its
    eigendecomposition Q diag(lam) Q.T, the matrix phi @ Q_r @ diag(lam_r)^-1
    unitizes the scatter (eigenvalues kept when lam > tol * lam_max).
    """
    phi = decomp.phi
    gram = phi.T @ phi
    lam, Q = np.linalg.eigh(gram)
    lam_max = lam[-1] if lam.size else 0.0
    if lam_max <= 0:
        raise DegenerateFusionError("between-class scatter is zero (identical class means)")
    keep = lam > tol * lam_max
    if not keep.any():
        raise DegenerateFusionError("all scatter eigenvalues below tolerance")
    # Descending eigenvalue order.
    lam_r = lam[keep][::-1]
    Q_r = Q[:, keep][:, ::-1]
    w_b = phi @ Q_r @ np.diag(1.0 / lam_r)
    return ScatterDecomposition(phi=phi, w_b=w_b, r=int(lam_r.shape[0]))


@dataclass(frozen=True)
class DcaTransform:
    """Fitted pair of projections mapping two feature sets into a shared
    discriminant-correlated space of dimension r."""

    w_x: np.ndarray      # (r, p)
    w_y: np.ndarray      # (r, q)
    r: int
    sigma: np.ndarray    # retained singular values of the between-set covariance


def fit_dca(X: FeatureSet, Y: FeatureSet, labels) -> DcaTransform:
    """Fit the two-set fusion transform on aligned training data."""
    check_alignment([X, Y])
    y = _class_labels(labels)
    if y.shape[0] != X.n_samples:
        raise ValidationError("labels misaligned with feature columns")

    bx = unitize_scatter(between_class_scatter(X, y))
    by = unitize_scatter(between_class_scatter(Y, y))
    Xp = bx.w_b.T @ X.values          # (r_x, n)
    Yp = by.w_b.T @ Y.values          # (r_y, n)

    S_xy = Xp @ Yp.T                  # between-set covariance, (r_x, r_y)
    U, sigma, Vt = np.linalg.svd(S_xy, full_matrices=False)
    if sigma.size == 0 or sigma[0] <= 0:
        raise DegenerateFusionError("between-set covariance vanished")
    keep = sigma > SINGULAR_TOL * sigma[0]
    if not keep.any():
        raise DegenerateFusionError("all singular values below tolerance")
    U_r = U[:, keep]
    V_r = Vt[keep, :].T
    sig_r = sigma[keep]
    inv_sqrt = 1.0 / np.sqrt(sig_r)
    w_cx = U_r * inv_sqrt             # (r_x, r)
    w_cy = V_r * inv_sqrt             # (r_y, r)
    return DcaTransform(
        w_x=w_cx.T @ bx.w_b.T,
        w_y=w_cy.T @ by.w_b.T,
        r=int(sig_r.shape[0]),
        sigma=sig_r,
    )


def transform_pair(t: DcaTransform, X: FeatureSet, Y: FeatureSet):
    """Project a pair of feature sets with a fitted transform."""
    if t.w_x.shape[1] != X.dim or t.w_y.shape[1] != Y.dim:
        raise ValidationError("feature dimensions do not match the fitted transform")
    Xh = FeatureSet(name=f"{X.name}_dc", values=t.w_x @ X.values,
                    sample_ids=X.sample_ids,
                    feature_names=default_feature_names(f"{X.name}_dc", t.r))
    Yh = FeatureSet(name=f"{Y.name}_dc", values=t.w_y @ Y.values,
                    sample_ids=Y.sample_ids,
                    feature_names=default_feature_names(f"{Y.name}_dc", t.r))
    return Xh, Yh


def fuse(Xh: FeatureSet, Yh: FeatureSet, mode: str = "concat") -> FeatureSet:
    """Combine two projected sets by row concatenation (default) or
    elementwise summation."""
    check_alignment([Xh, Yh])
    name = f"{Xh.name}+{Yh.name}"
    if mode == "concat":
        values = np.vstack([Xh.values, Yh.values])
        names = tuple(f"{Xh.name}.{f}" for f in Xh.feature_names) + \
            tuple(f"{Yh.name}.{f}" for f in Yh.feature_names)
    elif mode == "sum":
        if Xh.dim != Yh.dim:
            raise ValidationError("summation fusion needs equal dimensions")
        values = Xh.values + Yh.values
        names = default_feature_names(name, Xh.dim)
    else:
        raise ValidationError(f"unknown fusion mode {mode!r}")
    return FeatureSet(name=name, values=values, sample_ids=Xh.sample_ids,
                      feature_names=names)


def numerical_rank(X: FeatureSet) -> int:
    """Rank by singular values above max(p, n) * sigma_max * machine epsilon."""
    if X.values.size == 0:
        return 0
    return int(np.linalg.matrix_rank(X.values))


@dataclass(frozen=True)
class MdcaStep:
    input_a: str
    input_b: str
    transform: DcaTransform
    output: str


@dataclass(frozen=True)
class MdcaPlan:
    """Replayable chain of pairwise fusions, ordered by descending input rank."""

    order: tuple[str, ...]            # input set names, fusion order
    steps: tuple[MdcaStep, ...]
    mode: str = "concat"
    output_dim: int = 0

    def apply(self, sets: dict[str, FeatureSet]) -> FeatureSet:
        """Replay the fitted chain on new data keyed by input set name."""
        missing = [name for name in self.order if name not in sets]
        if missing:
            raise ValidationError(f"missing feature sets for fusion replay: {missing}")
        current = sets[self.order[0]]
        for step, next_name in zip(self.steps, self.order[1:]):
            nxt = sets[next_name]
            Xh, Yh = transform_pair(step.transform, current, nxt)
            current = fuse(Xh, Yh, self.mode)
        if current.dim != self.output_dim:
            raise ValidationError("fusion replay produced unexpected dimension")
        return current


def fit_mdca(sets: list[FeatureSet], labels, mode: str = "concat"):
    """Chain pairwise fusion over m >= 2 sets in descending rank order
    (rank ties keep the input order). Returns the replayable plan and the
    fused training features."""
    if len(sets) < 2:
        raise ValidationError("multi-set fusion needs at least 2 feature sets")
    check_alignment(sets)
    ranks = [numerical_rank(fs) for fs in sets]
    order = sorted(range(len(sets)), key=lambda i: -ranks[i])  # stable on ties
    ordered = [sets[i] for i in order]

    current = ordered[0]
    steps = []
    for nxt in ordered[1:]:
        try:
            t = fit_dca(current, nxt, labels)
        except DegenerateFusionError as exc:
            raise DegenerateFusionError(
                f"fusing {current.name!r} with {nxt.name!r}: {exc}")
        Xh, Yh = transform_pair(t, current, nxt)
        fused = fuse(Xh, Yh, mode)
        steps.append(MdcaStep(input_a=current.name, input_b=nxt.name,
                              transform=t, output=fused.name))
        current = fused
    plan = MdcaPlan(order=tuple(fs.name for fs in ordered), steps=tuple(steps),
                    mode=mode, output_dim=current.dim)
    return plan, current


# ---------------------------------------------------------------------------
# Plan serialization (all matrices row-major, full precision)
# ---------------------------------------------------------------------------

def plan_to_dict(plan: MdcaPlan) -> dict:
    return {
        "order": list(plan.order),
        "mode": plan.mode,
        "output_dim": plan.output_dim,
        "steps": [
            {
                "input_a": s.input_a,
                "input_b": s.input_b,
                "output": s.output,
                "r": s.transform.r,
                "sigma": s.transform.sigma.tolist(),
                "w_x": s.transform.w_x.tolist(),
                "w_y": s.transform.w_y.tolist(),
            }
            for s in plan.steps
        ],
    }


def plan_from_dict(data: dict) -> MdcaPlan:
    steps = tuple(
        MdcaStep(
            input_a=s["input_a"],
            input_b=s["input_b"],
            output=s["output"],
            transform=DcaTransform(
                w_x=np.array(s["w_x"], dtype=np.float64),
                w_y=np.array(s["w_y"], dtype=np.float64),
                r=int(s["r"]),
                sigma=np.array(s["sigma"], dtype=np.float64),
            ),
        )
        for s in data["steps"]
    )
    return MdcaPlan(order=tuple(data["order"]), steps=steps,
                    mode=data["mode"], output_dim=int(data["output_dim"]))


def save_plan(plan: MdcaPlan, path):
    with open(str(path), "w", encoding="utf-8") as fh:
        json.dump(plan_to_dict(plan), fh, indent=1)
        fh.write("\n")


def load_plan(path) -> MdcaPlan:
    with open(str(path), "r", encoding="utf-8") as fh:
        return plan_from_dict(json.load(fh))
