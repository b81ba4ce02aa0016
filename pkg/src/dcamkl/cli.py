"""Command-line interface orchestrating the training and test phases:
extract -> fuse -> train -> predict -> evaluate, and the three-strategy
comparison run.

Exit codes: 0 success, 2 validation/parse error, 3 numerical failure
(non-convergence or degenerate fusion), 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import PipelineConfig, load_config, resolve_config
from .dataset import (FeatureSet, LabelVector, apply_normalizer, check_alignment,
                      fit_normalizer, load_feature_csv, load_label_csv,
                      save_feature_csv, split)
from .errors import (DegenerateFusionError, NonConvergenceError, ParseError,
                     ValidationError)
from .features.cues import SUPPORT, default_manifest, load_manifest, save_manifest
from .metrics import evaluate, report_to_dict, save_roc_csv
from .pipeline import (bundle_from_dict, bundle_to_dict,
                       derive_corpus_features, extract_images, fit_cue_fusion,
                       load_model, normalized_gram, save_model, train_model)
from .svm import decision_values, predict_labels, solve_dual
from .kernels import gram_cross

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _write_json(data: dict, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def _load_features_dir(features_dir: Path, names) -> dict[str, FeatureSet]:
    sets = {}
    for name in names:
        path = features_dir / f"{name}.csv"
        if not path.is_file():
            raise ValidationError(f"feature CSV {path} not found")
        sets[name] = load_feature_csv(path, name=name)
    return sets


def _features_dir(config: PipelineConfig) -> Path:
    if config.features_dir:
        return Path(config.features_dir)
    return Path(config.out_dir) / "features"


def _load_corpus(config: PipelineConfig):
    """Load feature sets named by the manifest plus the labels."""
    features_dir = _features_dir(config)
    manifest_path = features_dir / "manifest.json"
    if manifest_path.is_file():
        manifest = load_manifest(manifest_path)
    else:
        manifest = default_manifest(imports=config.imports)
    if not config.labels_csv:
        raise ValidationError("config must name a labels_csv")
    labels = load_label_csv(config.labels_csv)
    sets = _load_features_dir(features_dir, [e["name"] for e in manifest.entries])
    ordered = [sets[e["name"]] for e in manifest.entries]
    labels = labels.select_ids(ordered[0].sample_ids)
    check_alignment(ordered, labels)
    return manifest, sets, labels


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_extract(config: PipelineConfig) -> int:
    if not config.images_dir:
        raise ValidationError("config must name an images_dir for extraction")
    out = Path(config.out_dir) / "features"
    out.mkdir(parents=True, exist_ok=True)

    sets, failures = extract_images(config.images_dir)
    metadata = {
        "jpeg_codec": {"format": "JPEG", "quality": 75, "mode": "L"},
        "config_digest": config.digest(),
    }
    if config.labels_csv:
        labels = load_label_csv(config.labels_csv).select_ids(
            sets["color_histogram"].sample_ids)
        train_idx, _ = _split_indices(config, labels)
        train_ids = tuple(labels.sample_ids[i] for i in train_idx)
        sets = derive_corpus_features(sets, train_ids,
                                      familiarity_k=config.familiarity_k,
                                      lof_k=config.lof_k)
        metadata["derived"] = {
            "familiarity_k": config.familiarity_k,
            "lof_k": config.lof_k,
            "reference": "train partition",
            "split": {"train_fraction": config.train_fraction, "seed": config.seed},
        }

    import_names = {imp["name"] for imp in config.imports}
    manifest = default_manifest(imports=config.imports)
    manifest = type(manifest)(entries=tuple(e for e in manifest.entries
                                            if e["name"] in sets or e["name"] in import_names),
                              failures=tuple(failures), metadata=metadata)
    for name, fs in sets.items():
        save_feature_csv(fs, out / f"{name}.csv")
    # Imported descriptor CSVs are copied alongside so downstream stages see
    # one directory of aligned feature sets.
    for imp in config.imports:
        imported = load_feature_csv(imp["csv"], name=imp["name"])
        save_feature_csv(imported, out / f"{imp['name']}.csv")
    save_manifest(manifest, out / "manifest.json")
    print(f"extracted {len(sets)} feature sets for "
          f"{sets['color_histogram'].n_samples} samples "
          f"({len(failures)} failures) -> {out}")
    return EXIT_OK


def _split_indices(config: PipelineConfig, labels: LabelVector):
    from .dataset import split_indices
    return split_indices(labels, config.train_fraction, config.seed)


def cmd_fuse(config: PipelineConfig) -> int:
    manifest, sets, labels = _load_corpus(config)
    ordered = [sets[e["name"]] for e in manifest.entries]
    parts = split(ordered, labels, config.train_fraction, config.seed)
    train_sets = {fs.name: fs for fs in parts.train_features}

    bundle = fit_cue_fusion(manifest, train_sets, parts.train_labels,
                            mode=config.fusion_mode)
    fused_all = bundle.apply(sets)

    out = Path(config.out_dir)
    fused_dir = out / "fused"
    fused_dir.mkdir(parents=True, exist_ok=True)
    for cue, fs in fused_all.items():
        save_feature_csv(fs, fused_dir / f"{cue}.csv")
    _write_json(bundle_to_dict(bundle), fused_dir / "plans.json")
    _write_json({
        "train_fraction": config.train_fraction,
        "seed": config.seed,
        "train_ids": list(parts.train_ids),
        "test_ids": list(parts.test_ids),
        "config_digest": config.digest(),
    }, out / "split.json")
    (out / "train_ids.txt").write_text("\n".join(parts.train_ids) + "\n")
    (out / "test_ids.txt").write_text("\n".join(parts.test_ids) + "\n")
    dims = {cue: fused_all[cue].dim for cue in bundle.cues}
    print(f"fused cues {dims} -> {fused_dir}")
    return EXIT_OK


def cmd_train(config: PipelineConfig) -> int:
    out = Path(config.out_dir)
    fused_dir = out / "fused"
    plans_path = fused_dir / "plans.json"
    split_path = out / "split.json"
    for p in (plans_path, split_path):
        if not p.is_file():
            raise FileNotFoundError(f"{p} not found (run the fuse stage first)")
    with open(plans_path, encoding="utf-8") as fh:
        bundle = bundle_from_dict(json.load(fh))
    with open(split_path, encoding="utf-8") as fh:
        split_info = json.load(fh)
    if not config.labels_csv:
        raise ValidationError("config must name a labels_csv")
    labels = load_label_csv(config.labels_csv)
    train_ids = split_info["train_ids"]

    fused_train = {}
    for cue in bundle.cues:
        fs = load_feature_csv(fused_dir / f"{cue}.csv", name=cue)
        fused_train[cue] = fs.select_ids(train_ids)
    y_train = labels.select_ids(train_ids)

    model, result = train_model(fused_train, y_train, config, bundle)
    save_model(model, out / "model.json")

    ids, pred, _ = model.predict_fused(fused_train)
    train_acc = float((pred == y_train.labels).mean())
    report = {
        "config": config.data,
        "config_digest": config.digest(),
        "cues": list(model.cues),
        "kernels": [s.to_dict() for s in model.specs],
        "d": model.d.tolist(),
        "objective_trace": list(result.objective_trace),
        "outer_iterations": result.outer_iterations,
        "stop_reason": result.stop_reason,
        "n_support": int(model.alpha.shape[0]),
        "train_acc": train_acc,
    }
    _write_json(report, out / "train_report.json")
    print(f"trained on {y_train.n_samples} samples: weights "
          f"{np.round(model.d, 4).tolist()}, train ACC {train_acc:.3f}")
    return EXIT_OK


def cmd_predict(config: PipelineConfig, model_path: str,
                ids_path: str | None = None) -> int:
    model = load_model(model_path)
    features_dir = _features_dir(config)
    needed = sorted({name for cue in model.bundle.cues
                     for r in model.bundle.recipes[cue] for name in r.inputs})
    sets = _load_features_dir(features_dir, needed)
    if ids_path:
        wanted = [line.strip() for line in
                  Path(ids_path).read_text(encoding="utf-8").splitlines()
                  if line.strip()]
        sets = {name: fs.select_ids(wanted) for name, fs in sets.items()}
    ids, labels, decisions = model.predict_raw(sets)

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pred_path = out / "predictions.csv"
    with open(pred_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label", "decision"])
        for sid, lab, f in zip(ids, labels, decisions):
            writer.writerow([sid, "+1" if lab > 0 else "-1", repr(float(f))])
    print(f"predicted {len(ids)} samples -> {pred_path}")
    return EXIT_OK


def load_predictions_csv(path):
    ids, labels, decisions = [], [], []
    with open(str(path), "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["id", "label", "decision"]:
            raise ParseError(f"{path}: header must be 'id,label,decision'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3 or row[1] not in ("+1", "-1"):
                raise ParseError(f"{path}: line {lineno}: malformed row")
            ids.append(row[0])
            labels.append(1 if row[1] == "+1" else -1)
            decisions.append(float(row[2]))
    return ids, np.array(labels), np.array(decisions)


def cmd_evaluate(config: PipelineConfig, predictions_path: str,
                 labels_path: str | None = None) -> int:
    ids, pred, decisions = load_predictions_csv(predictions_path)
    labels = load_label_csv(labels_path or config.labels_csv).select_ids(ids)
    report = evaluate(pred, decisions, labels)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = report_to_dict(report)
    payload["config"] = config.data
    payload["config_digest"] = config.digest()
    _write_json(payload, out / "evaluation.json")
    save_roc_csv(report.roc, out / "roc.csv")
    print(f"ACC {report.acc:.4f}  AUC {report.auc:.4f}  "
          f"(tp={report.counts.tp} tn={report.counts.tn} "
          f"fp={report.counts.fp} fn={report.counts.fn})")
    return EXIT_OK


def run_comparison(config: PipelineConfig, manifest=None, sets=None, labels=None) -> dict:
    """Three strategies under one split: single-kernel SVM on concatenated
    raw features, single-kernel SVM on fused features, and the multi-kernel
    model on per-cue fused features."""
    if sets is None:
        manifest, sets, labels = _load_corpus(config)
    cue_sets = [sets[e["name"]] for e in manifest.entries if e["cue"] != SUPPORT]
    parts = split(cue_sets, labels, config.train_fraction, config.seed)
    train_sets = {fs.name: fs for fs in parts.train_features}
    test_sets = {fs.name: fs for fs in parts.test_features}
    single_spec = config.single_kernel_spec()

    def single_kernel_run(train_fs: FeatureSet, test_fs: FeatureSet):
        norm = fit_normalizer(train_fs)
        tr = apply_normalizer(norm, train_fs)
        te = apply_normalizer(norm, test_fs)
        G, scale = normalized_gram(single_spec, tr)
        sol = solve_dual(G, parts.train_labels, C=config.C, tol=config.svm_tol)
        f = decision_values(sol.alpha, sol.bias, parts.train_labels,
                            gram_cross(single_spec, tr, te) / scale)
        return evaluate(predict_labels(f), f, parts.test_labels)

    def concat(sets_list, name):
        check_alignment(sets_list)
        values = np.vstack([fs.values for fs in sets_list])
        names = tuple(f"{fs.name}.{f}" for fs in sets_list for f in fs.feature_names)
        return FeatureSet(name=name, values=values,
                          sample_ids=sets_list[0].sample_ids, feature_names=names)

    # Strategy 1: plain concatenation of every cue-assigned set.
    concat_train = concat(parts.train_features, "concat")
    concat_test = concat(parts.test_features, "concat")
    rep_concat = single_kernel_run(concat_train, concat_test)

    # Strategy 2: fused per type, concatenated across types and cues.
    bundle = fit_cue_fusion(manifest, train_sets, parts.train_labels,
                            mode=config.fusion_mode)
    fused_train = bundle.apply(train_sets)
    fused_test = bundle.apply(test_sets)
    order = list(bundle.cues)
    fused_concat_train = concat([fused_train[c] for c in order], "fused")
    fused_concat_test = concat([fused_test[c] for c in order], "fused")
    rep_fused = single_kernel_run(fused_concat_train, fused_concat_test)

    # Strategy 3: per-cue kernels on the fused features, weights learned.
    model, _ = train_model(fused_train, parts.train_labels, config, bundle)
    _, pred, f = model.predict_fused(fused_test)
    rep_mkl = evaluate(pred, f, parts.test_labels)

    return {
        "split": {"train_fraction": config.train_fraction, "seed": config.seed,
                  "n_train": parts.train_labels.n_samples,
                  "n_test": parts.test_labels.n_samples},
        "dims": {"concatenated": concat_train.dim,
                 "fused": fused_concat_train.dim},
        "kernel_weights": model.d.tolist(),
        "rows": [
            {"method": "concat_svm", "acc": rep_concat.acc, "auc": rep_concat.auc},
            {"method": "dca_svm", "acc": rep_fused.acc, "auc": rep_fused.auc},
            {"method": "dca_mkl", "acc": rep_mkl.acc, "auc": rep_mkl.auc},
        ],
        "config": config.data,
        "config_digest": config.digest(),
    }


def cmd_compare(config: PipelineConfig) -> int:
    result = run_comparison(config)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(result, out / "comparison.json")
    with open(out / "comparison.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "acc", "auc"])
        for row in result["rows"]:
            writer.writerow([row["method"], repr(row["acc"]), repr(row["auc"])])
    print(f"{'method':<12} {'ACC':>8} {'AUC':>8}")
    for row in result["rows"]:
        print(f"{row['method']:<12} {row['acc']:>8.4f} {row['auc']:>8.4f}")
    print(f"dimensions: concatenated {result['dims']['concatenated']}, "
          f"fused {result['dims']['fused']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcamkl",
        description="Fuse heterogeneous image features and classify with a "
                    "multi-kernel SVM.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, help="override the split seed")
        p.add_argument("--out", help="override the output directory")

    common(sub.add_parser("extract", help="compute feature CSVs from images"))
    common(sub.add_parser("fuse", help="fit and apply per-cue fusion"))
    common(sub.add_parser("train", help="train the multi-kernel model"))

    p = sub.add_parser("predict", help="classify samples with a trained model")
    common(p)
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--ids", help="file with one sample id per line")

    p = sub.add_parser("evaluate", help="score predictions against labels")
    common(p)
    p.add_argument("--predictions", required=True, help="predictions CSV")
    p.add_argument("--labels", help="labels CSV (defaults to config labels)")

    common(sub.add_parser("compare", help="run the three-strategy comparison"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            config = load_config(args.config, seed=args.seed, out_dir=args.out)
        else:
            config = resolve_config(None, seed=args.seed, out_dir=args.out)
        if args.command == "extract":
            return cmd_extract(config)
        if args.command == "fuse":
            return cmd_fuse(config)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "predict":
            return cmd_predict(config, args.model, args.ids)
        if args.command == "evaluate":
            return cmd_evaluate(config, args.predictions, args.labels)
        if args.command == "compare":
            return cmd_compare(config)
        raise ValidationError(f"unknown command {args.command!r}")
    except (ValidationError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DegenerateFusionError, NonConvergenceError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
