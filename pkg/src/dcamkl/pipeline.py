"""End-to-end assembly: batch extraction, per-cue fusion, model training,
prediction, and model persistence.

Within each cue, feature sets of the same type are fused pairwise (two sets)
or chained (more than two); single-set types pass through unchanged. Types
are concatenated within a cue, and each cue feeds one kernel of the
multi-kernel classifier.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .dataset import (FeatureSet, LabelVector, Normalizer, apply_normalizer,
                      check_alignment, fit_normalizer)
from .errors import DegenerateFusionError, ValidationError
from .features.cues import CUES, CueManifest, PER_IMAGE_EXTRACTORS
from .features.image import load_image
from .features.outliers import familiarity, lof_query, lof_scores
from .fusion import MdcaPlan, fit_mdca, plan_from_dict, plan_to_dict
from .kernels import GramMatrix, KernelSpec, gram, gram_cross, median_sigma
from .mkl import MklTrainResult
from .mkl import train as mkl_train
from .svm import decision_values, predict_labels

MODEL_FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# Batch extraction
# ---------------------------------------------------------------------------

def extract_images(images_dir) -> tuple[dict[str, FeatureSet], list[dict]]:
    """Run every per-image extractor over a directory of PNG/BMP files
    (sample id = file stem, ordered by id). A file that fails to decode or
    fails any extractor is dropped from all outputs and reported."""
    root = Path(images_dir)
    if not root.is_dir():
        raise ValidationError(f"image directory {images_dir!r} not found")
    paths = sorted([p for p in root.iterdir()
                    if p.suffix.lower() in (".png", ".bmp")],
                   key=lambda p: p.stem)
    if not paths:
        raise ValidationError(f"no PNG/BMP images under {images_dir!r}")

    columns: dict[str, list[np.ndarray]] = {x.name: [] for x in PER_IMAGE_EXTRACTORS}
    ids: list[str] = []
    failures: list[dict] = []
    for path in paths:
        try:
            img = load_image(path)
            vectors = {x.name: np.asarray(x.fn(img), dtype=np.float64)
                       for x in PER_IMAGE_EXTRACTORS}
        except Exception as exc:   # per-file robustness: record and continue
            failures.append({"file": path.name, "error": str(exc)})
            continue
        ids.append(path.stem)
        for name, vec in vectors.items():
            columns[name].append(vec)

    if not ids:
        raise ValidationError("every image failed extraction")
    sets = {}
    for x in PER_IMAGE_EXTRACTORS:
        values = np.column_stack(columns[x.name])
        sets[x.name] = FeatureSet(name=x.name, values=values,
                                  sample_ids=tuple(ids),
                                  feature_names=x.feature_names)
    return sets, failures


def derive_corpus_features(sets: dict[str, FeatureSet], train_ids,
                           familiarity_k: int = 10, lof_k: int = 10) -> dict[str, FeatureSet]:
    """Compute the corpus-relative unusualness features from the color
    histogram set: training samples are scored against the training
    partition (self excluded), held-out samples against the same reference."""
    hist = sets.get("color_histogram")
    if hist is None:
        raise ValidationError("color_histogram set required for derived features")
    train_ids = tuple(train_ids)
    train_set = set(train_ids)
    unknown = train_set - set(hist.sample_ids)
    if unknown:
        raise ValidationError(f"train ids missing from features: {sorted(unknown)[:3]}")
    reference = hist.select_ids(train_ids)

    fam = familiarity(hist, reference, k=familiarity_k)
    out = dict(sets)
    out["familiarity"] = FeatureSet(
        name="familiarity", values=fam[None, :],
        sample_ids=hist.sample_ids, feature_names=("familiarity",))

    is_train = np.array([sid in train_set for sid in hist.sample_ids])
    pos = {sid: i for i, sid in enumerate(hist.sample_ids)}
    lof = np.zeros(hist.n_samples)
    lof_train = lof_scores(reference, k=lof_k)
    for sid, value in zip(train_ids, lof_train):
        lof[pos[sid]] = value
    if (~is_train).any():
        rest = hist.take(np.flatnonzero(~is_train))
        lof[~is_train] = lof_query(rest, reference, k=lof_k)
    out["lof"] = FeatureSet(
        name="lof", values=lof[None, :],
        sample_ids=hist.sample_ids, feature_names=("lof",))
    return out


# ---------------------------------------------------------------------------
# Per-cue fusion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeFusion:
    """Fusion recipe for one feature type: a replayable plan when the type
    holds several sets, passthrough otherwise."""

    ftype: str
    inputs: tuple[str, ...]
    plan: MdcaPlan | None = None


@dataclass(frozen=True)
class FusionBundle:
    """All type-level fusion recipes, grouped per cue in manifest order."""

    cues: tuple[str, ...]
    recipes: dict = field(default_factory=dict)    # cue -> tuple[TypeFusion]
    mode: str = "concat"

    def apply(self, sets: dict[str, FeatureSet]) -> dict[str, FeatureSet]:
        """Fuse a corpus (any aligned sample subset) into per-cue features."""
        out = {}
        for cue in self.cues:
            parts = []
            for recipe in self.recipes[cue]:
                missing = [n for n in recipe.inputs if n not in sets]
                if missing:
                    raise ValidationError(
                        f"cue {cue!r} type {recipe.ftype!r} misses feature sets {missing}")
                if recipe.plan is None:
                    parts.append(sets[recipe.inputs[0]])
                else:
                    parts.append(recipe.plan.apply({n: sets[n] for n in recipe.inputs}))
            check_alignment(parts)
            values = np.vstack([p.values for p in parts])
            names = tuple(f"{r.ftype}.{f}" for r, p in zip(self.recipes[cue], parts)
                          for f in p.feature_names)
            out[cue] = FeatureSet(name=cue, values=values,
                                  sample_ids=parts[0].sample_ids,
                                  feature_names=names)
        return out


def fit_cue_fusion(manifest: CueManifest, train_sets: dict[str, FeatureSet],
                   train_labels: LabelVector, mode: str = "concat") -> FusionBundle:
    """Fit the per-type fusion recipes on training data."""
    train_labels.require_both_classes()
    recipes: dict[str, tuple] = {}
    cues_present = []
    for cue in CUES:
        entries = []
        for ftype in manifest.types_in_cue(cue):
            names = [n for n in manifest.sets_of_type(cue, ftype) if n in train_sets]
            if not names:
                continue
            if len(names) == 1:
                entries.append(TypeFusion(ftype=ftype, inputs=(names[0],)))
                continue
            group = [train_sets[n] for n in names]
            try:
                plan, _ = fit_mdca(group, train_labels, mode=mode)
            except DegenerateFusionError as exc:
                raise DegenerateFusionError(f"type {ftype!r} in cue {cue!r}: {exc}")
            entries.append(TypeFusion(ftype=ftype, inputs=plan.order, plan=plan))
        if entries:
            cues_present.append(cue)
            recipes[cue] = tuple(entries)
    if not cues_present:
        raise ValidationError("no cue has any feature sets to fuse")
    return FusionBundle(cues=tuple(cues_present), recipes=recipes, mode=mode)


def bundle_to_dict(bundle: FusionBundle) -> dict:
    return {
        "mode": bundle.mode,
        "cues": list(bundle.cues),
        "recipes": {
            cue: [
                {"type": r.ftype, "inputs": list(r.inputs),
                 "plan": plan_to_dict(r.plan) if r.plan is not None else None}
                for r in bundle.recipes[cue]
            ]
            for cue in bundle.cues
        },
    }


def bundle_from_dict(data: dict) -> FusionBundle:
    recipes = {}
    for cue, entries in data["recipes"].items():
        recipes[cue] = tuple(
            TypeFusion(ftype=e["type"], inputs=tuple(e["inputs"]),
                       plan=plan_from_dict(e["plan"]) if e["plan"] is not None else None)
            for e in entries
        )
    return FusionBundle(cues=tuple(data["cues"]), recipes=recipes, mode=data["mode"])


# ---------------------------------------------------------------------------
# Model: learned weights + preprocessing state, persistable as JSON
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineModel:
    """Everything required to reproduce predictions: kernel manifest, learned
    weights, support coefficients, per-cue normalizers, per-kernel scale
    factors, support features, and the fusion recipes."""

    cues: tuple[str, ...]
    specs: tuple[KernelSpec, ...]
    d: np.ndarray
    alpha: np.ndarray              # support coefficients only
    y_support: np.ndarray
    bias: float
    support_ids: tuple[str, ...]
    normalizers: dict              # cue -> Normalizer
    kernel_scales: dict            # cue -> mean training Gram diagonal
    support_features: dict         # cue -> raw fused features of support samples
    bundle: FusionBundle
    objective_trace: tuple[float, ...]
    config_digest: str = ""
    metadata: dict = field(default_factory=dict)

    def predict_fused(self, fused: dict[str, FeatureSet]):
        """Predict from per-cue fused features. Returns (ids, labels, f)."""
        blocks = []
        ids = None
        for cue, spec in zip(self.cues, self.specs):
            if cue not in fused:
                raise ValidationError(f"missing fused features for cue {cue!r}")
            norm = self.normalizers[cue]
            test_n = apply_normalizer(norm, fused[cue])
            support_n = apply_normalizer(norm, self.support_features[cue])
            blocks.append(gram_cross(spec, support_n, test_n) / self.kernel_scales[cue])
            if ids is None:
                ids = fused[cue].sample_ids
            elif fused[cue].sample_ids != ids:
                raise ValidationError("fused cue features are misaligned")
        K = np.zeros(blocks[0].shape)
        for w, b in zip(self.d, blocks):
            K += w * b
        f = decision_values(self.alpha, self.bias, self.y_support, K)
        return ids, predict_labels(f), f

    def predict_raw(self, sets: dict[str, FeatureSet]):
        """Predict from raw (unfused) feature sets via the stored recipes."""
        return self.predict_fused(self.bundle.apply(sets))


def resolve_kernel_spec(settings: dict, train_normed: FeatureSet) -> KernelSpec:
    """Materialize a kernel spec; an rbf sigma of "median" resolves to the
    median-distance heuristic on the normalized training features."""
    settings = dict(settings)
    if settings.get("kind") == "rbf" and settings.get("sigma") == "median":
        settings["sigma"] = median_sigma(train_normed)
    return KernelSpec.from_dict(settings)


def normalized_gram(spec: KernelSpec, fs: FeatureSet) -> tuple[GramMatrix, float]:
    """Training Gram scaled to unit mean diagonal. The per-kernel scale puts
    heterogeneous kernels (bounded rbf vs high-degree polynomials on wide
    features) on a common footing so the learned combination weights are
    comparable; the factor is retained for test-time kernel blocks."""
    raw = gram(spec, fs)
    scale = float(np.mean(np.diag(raw.values)))
    if not scale > 0:
        raise ValidationError("kernel produced a non-positive diagonal")
    return GramMatrix(values=raw.values / scale, spec=spec), scale


def train_model(fused_train: dict[str, FeatureSet], train_labels: LabelVector,
                config: PipelineConfig, bundle: FusionBundle) -> tuple[PipelineModel, MklTrainResult]:
    """Normalize per cue, build the per-cue Gram matrices, and run the
    multi-kernel trainer."""
    cues = tuple(cue for cue in bundle.cues if cue in fused_train)
    if not cues:
        raise ValidationError("no fused training features")
    check_alignment([fused_train[c] for c in cues], train_labels)

    normalizers = {}
    kernel_scales = {}
    specs = []
    grams = []
    for cue in cues:
        norm = fit_normalizer(fused_train[cue])
        normalizers[cue] = norm
        normed = apply_normalizer(norm, fused_train[cue])
        spec = resolve_kernel_spec(config.kernel_settings(cue), normed)
        specs.append(spec)
        G, scale = normalized_gram(spec, normed)
        grams.append(G)
        kernel_scales[cue] = scale

    result = mkl_train(grams, train_labels, C=config.C,
                       outer_tol=config.mkl_outer_tol,
                       max_outer=config.mkl_max_outer,
                       svm_tol=config.svm_tol,
                       gap_tol=config.mkl_gap_tol)
    # Retain every touched coefficient: alpha left at exactly 0 cannot change
    # predictions, so the stored support reproduces decisions bit for bit.
    support = np.flatnonzero(result.svm.alpha > 0.0)
    support_ids = tuple(train_labels.sample_ids[i] for i in support)
    model = PipelineModel(
        cues=cues,
        specs=tuple(specs),
        d=result.d,
        alpha=result.svm.alpha[support],
        y_support=train_labels.labels[support],
        bias=result.svm.bias,
        support_ids=support_ids,
        normalizers=normalizers,
        kernel_scales=kernel_scales,
        support_features={c: fused_train[c].take(support.tolist()) for c in cues},
        bundle=bundle,
        objective_trace=result.objective_trace,
        config_digest=config.digest(),
        metadata={"C": config.C, "stop_reason": result.stop_reason,
                  "outer_iterations": result.outer_iterations},
    )
    # Canonicalize through the serialized form: freshly materialized arrays
    # put the in-process model on the exact code path a reloaded model takes,
    # so persistence reproduces decision values bit for bit.
    model = model_from_dict(model_to_dict(model))
    return model, result


# ---------------------------------------------------------------------------
# Model persistence
# ---------------------------------------------------------------------------

def model_to_dict(model: PipelineModel) -> dict:
    return {
        "version": MODEL_FORMAT_VERSION,
        "config_digest": model.config_digest,
        "cues": list(model.cues),
        "kernels": [s.to_dict() for s in model.specs],
        "d": model.d.tolist(),
        "alpha": model.alpha.tolist(),
        "y_support": model.y_support.tolist(),
        "bias": model.bias,
        "support_ids": list(model.support_ids),
        "objective_trace": list(model.objective_trace),
        "normalizers": {
            cue: {"means": n.means.tolist(), "stds": n.stds.tolist()}
            for cue, n in model.normalizers.items()
        },
        "kernel_scales": {cue: s for cue, s in model.kernel_scales.items()},
        "support_features": {
            cue: {
                "feature_names": list(fs.feature_names),
                "values": fs.values.tolist(),
            }
            for cue, fs in model.support_features.items()
        },
        "fusion": bundle_to_dict(model.bundle),
        "metadata": model.metadata,
    }


def model_from_dict(data: dict) -> PipelineModel:
    if data.get("version") != MODEL_FORMAT_VERSION:
        raise ValidationError(f"unsupported model format version {data.get('version')!r}")
    cues = tuple(data["cues"])
    support_ids = tuple(data["support_ids"])
    support_features = {
        cue: FeatureSet(
            name=cue,
            values=np.array(entry["values"], dtype=np.float64).reshape(
                len(entry["feature_names"]), len(support_ids)),
            sample_ids=support_ids,
            feature_names=tuple(entry["feature_names"]),
        )
        for cue, entry in data["support_features"].items()
    }
    return PipelineModel(
        cues=cues,
        specs=tuple(KernelSpec.from_dict(k) for k in data["kernels"]),
        d=np.array(data["d"], dtype=np.float64),
        alpha=np.array(data["alpha"], dtype=np.float64),
        y_support=np.array(data["y_support"], dtype=np.int64),
        bias=float(data["bias"]),
        support_ids=support_ids,
        normalizers={
            cue: Normalizer(means=np.array(n["means"]), stds=np.array(n["stds"]))
            for cue, n in data["normalizers"].items()
        },
        kernel_scales={cue: float(s) for cue, s in data["kernel_scales"].items()},
        support_features=support_features,
        bundle=bundle_from_dict(data["fusion"]),
        objective_trace=tuple(data["objective_trace"]),
        config_digest=data.get("config_digest", ""),
        metadata=data.get("metadata", {}),
    )


def save_model(model: PipelineModel, path):
    with open(str(path), "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path) -> PipelineModel:
    with open(str(path), "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
