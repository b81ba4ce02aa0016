"""Acceptance gate: every criterion runs at its stated tolerance and prints
one PASS/FAIL line (see the terminal summary section)."""

import json
import time

import numpy as np

from dcamkl import (KernelSpec, decision_values, fit_dca, gram, gram_cross,
                    median_sigma, numerical_rank, predict_labels, roc,
                    solve_dual, split, transform_pair)
from dcamkl.cli import main, run_comparison
from dcamkl.config import resolve_config
from dcamkl.dataset import load_label_csv, split_indices
from dcamkl.features import (RasterImage, familiarity, glcm_features,
                             hog_features, hu_moments_canny,
                             lbp_riu2_histogram, lof_scores)
from dcamkl.features.complexity import gray_entropy
from dcamkl.features.cues import default_manifest
from dcamkl.metrics import ConfusionCounts, accuracy
from dcamkl.mkl import gradient, objective, predict, train
from dcamkl.pipeline import derive_corpus_features, extract_images
from conftest import make_fs, record_acceptance
from oracles import auc_pair_count, familiarity_brute, lof_brute, qp_dual_oracle


def class_data(rng, p, n, c, scale=2.0):
    y = rng.integers(0, c, size=n)
    while len(np.unique(y)) < c:
        y = rng.integers(0, c, size=n)
    means = rng.normal(scale=scale, size=(p, c))
    return rng.normal(size=(p, n)) + means[:, y], y


def transformed_scatter(V, y):
    grand = V.mean(axis=1)
    S = np.zeros((V.shape[0], V.shape[0]))
    for c in np.unique(y):
        m = V[:, y == c].mean(axis=1)
        S += (y == c).sum() * np.outer(m - grand, m - grand)
    return S


class TestDcaInvariants:
    def test_dca_invariants(self):
        t0 = time.monotonic()
        rng = np.random.default_rng(2024)
        worst_identity = 0.0
        for trial in range(20):
            c = int(rng.integers(2, 5))
            p = int(rng.integers(2, 31))
            q = int(rng.integers(2, 31))
            n = int(rng.integers(max(20, 4 * c), 201))
            Xv, y = class_data(rng, p, n, c)
            Yv = rng.normal(size=(q, n)) + rng.normal(scale=2.0, size=(q, c))[:, y]
            X, Y = make_fs("x", Xv), make_fs("y", Yv)
            t = fit_dca(X, Y, y)
            Xh, Yh = transform_pair(t, X, Y)

            identity_err = np.abs(Xh.values @ Yh.values.T - np.eye(t.r)).max()
            worst_identity = max(worst_identity, identity_err)
            assert identity_err < 1e-6
            for V in (Xh.values, Yh.values):
                S = transformed_scatter(V, y)
                off = np.abs(S).sum() - np.abs(np.diag(S)).sum()
                assert off < 1e-6 * np.trace(S)
            bound = min(c - 1, numerical_rank(X), numerical_rank(Y))
            assert t.r <= bound
        elapsed = time.monotonic() - t0
        record_acceptance(
            "dca-invariants", elapsed < 10.0,
            f"20 fixtures, worst identity err {worst_identity:.2e}, {elapsed:.1f}s")


class TestSvmOracle:
    def test_smo_matches_dense_qp(self):
        t0 = time.monotonic()
        rng = np.random.default_rng(777)
        worst_gap = 0.0
        for trial in range(50):
            n = int(rng.integers(4, 13))
            d = int(rng.integers(1, 5))
            X = rng.normal(size=(d, n))
            y = rng.choice([-1, 1], size=n)
            while abs(int(y.sum())) == n:
                y = rng.choice([-1, 1], size=n)
            kind = trial % 3
            if kind == 0:
                sq = (X * X).sum(axis=0)
                K = np.exp(-np.maximum(sq[:, None] + sq[None, :]
                                       - 2 * X.T @ X, 0) / 2.0)
            else:
                K = (X.T @ X + 1.0) ** (kind + 1)
            K = np.triu(K) + np.triu(K, 1).T
            C = float(rng.choice([0.1, 1.0, 10.0]))

            a_o, obj_o, b_o = qp_dual_oracle(K, y, C)
            sol = solve_dual(K, y, C, tol=1e-6)
            gap = abs(sol.objective - obj_o)
            worst_gap = max(worst_gap, gap)
            assert gap <= 1e-4
            f_solver = decision_values(sol.alpha, sol.bias, y, K)
            f_oracle = K @ (a_o * y) + b_o
            assert (predict_labels(f_solver) == predict_labels(f_oracle)).all()
        elapsed = time.monotonic() - t0
        record_acceptance(
            "svm-oracle-equivalence", elapsed < 30.0,
            f"50 problems, worst objective gap {worst_gap:.2e}, {elapsed:.1f}s")


def grouped_rbf_problem(seed, n, informative=(True, True, False), sep=1.5):
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) % 2 == 0, 1, -1)
    groups = []
    for flag in informative:
        base = rng.normal(size=(5, n))
        if flag:
            direction = rng.normal(size=5) / np.sqrt(5)
            base = base + sep * np.outer(direction, y)
        groups.append(make_fs("g", base))
    specs = [KernelSpec(kind="rbf", sigma=median_sigma(g)) for g in groups]
    grams = [gram(s, g) for s, g in zip(specs, groups)]
    return groups, specs, grams, y


class TestMklCorrectness:
    def test_simplex_trace_gradient_reduction(self):
        # Simplex membership at every iteration and non-increasing objective.
        _, _, grams, y = grouped_rbf_problem(1, n=80)
        result = train(grams, y, C=1.0)
        for w in result.weight_trace:
            w = np.array(w)
            assert abs(w.sum() - 1.0) <= 1e-8
            assert (w >= 0.0).all()
        diffs = np.diff(result.objective_trace)
        assert (diffs <= 1e-9).all()

        # Analytic gradient against central finite differences (J is defined
        # for any non-negative weights, so coordinate perturbations probe
        # dJ/dd_m directly; weights stay clipped to the domain).
        worst_rel = 0.0
        for seed in (2, 3):
            _, _, grams, y = grouped_rbf_problem(seed, n=40)
            d = np.array([0.4, 0.35, 0.25])
            eps = 1e-4
            _, sol = objective(d, grams, y, C=1.0, tol=1e-8)
            g = gradient(d, sol, grams, y)
            for m in range(3):
                dp, dm_ = d.copy(), d.copy()
                dp[m] += eps
                dm_[m] = max(dm_[m] - eps, 0.0)
                Kp = sum(w * G.values for w, G in zip(dp, grams))
                Km = sum(w * G.values for w, G in zip(dm_, grams))
                Jp = solve_dual(Kp, y, 1.0, tol=1e-8).objective
                Jm = solve_dual(Km, y, 1.0, tol=1e-8).objective
                fd = (Jp - Jm) / (dp[m] - dm_[m])
                rel = abs(fd - g[m]) / max(abs(g[m]), 1e-12)
                worst_rel = max(worst_rel, rel)
                assert rel <= 1e-3

        # M=1 reduction: identical predictions to the plain SVM.
        groups, specs, grams, y = grouped_rbf_problem(4, n=60)
        single = [grams[0]]
        result = train(single, y, C=1.0)
        np.testing.assert_array_equal(result.d, [1.0])
        plain = solve_dual(grams[0], y, C=1.0)
        cross = gram_cross(specs[0], groups[0], groups[0])
        labels_mkl, f_mkl = predict(result, [cross], y)
        f_plain = decision_values(plain.alpha, plain.bias, y, cross)
        assert np.abs(f_mkl - f_plain).max() <= 1e-6
        assert (labels_mkl == predict_labels(f_plain)).all()

        record_acceptance(
            "mkl-correctness", True,
            f"simplex+trace ok, worst gradient rel err {worst_rel:.2e}, M=1 exact")


class TestMklBehavioral:
    def test_noise_kernel_downweighted_accuracy_kept(self):
        t0 = time.monotonic()
        noise_weights = []
        acc_margins = []
        for seed in range(10):
            rng = np.random.default_rng(500 + seed)
            n_train, n_test = 140, 60
            y_all = np.where(np.arange(200) % 2 == 0, 1, -1)
            y_tr, y_te = y_all[:n_train], y_all[n_train:]
            groups_tr, groups_te, specs, grams = [], [], [], []
            for flag in (True, True, False):
                direction = rng.normal(size=5) / np.sqrt(5)
                tr = rng.normal(size=(5, n_train))
                te = rng.normal(size=(5, n_test))
                if flag:
                    tr = tr + 1.5 * np.outer(direction, y_tr)
                    te = te + 1.5 * np.outer(direction, y_te)
                ftr = make_fs("g", tr)
                fte = make_fs("g", te, ids=tuple(f"t{i}" for i in range(n_test)))
                spec = KernelSpec(kind="rbf", sigma=median_sigma(ftr))
                groups_tr.append(ftr)
                groups_te.append(fte)
                specs.append(spec)
                grams.append(gram(spec, ftr))

            result = train(grams, y_tr, C=1.0)
            noise_weights.append(float(result.d[2]))
            blocks = [gram_cross(s, a, b) for s, a, b in
                      zip(specs, groups_tr, groups_te)]
            labels_mkl, _ = predict(result, blocks, y_tr)
            acc_mkl = float((labels_mkl == y_te).mean())

            best_single = 0.0
            for m in range(3):
                sol = solve_dual(grams[m], y_tr, C=1.0)
                f = decision_values(sol.alpha, sol.bias, y_tr, blocks[m])
                best_single = max(best_single,
                                  float((predict_labels(f) == y_te).mean()))
            acc_margins.append(acc_mkl - best_single)

        elapsed = time.monotonic() - t0
        med_noise = float(np.median(noise_weights))
        med_margin = float(np.median(acc_margins))
        ok = med_noise < 0.15 and med_margin >= -0.02 and elapsed < 120.0
        record_acceptance(
            "mkl-behavioral", ok,
            f"median noise weight {med_noise:.3f}, median ACC margin "
            f"{med_margin:+.3f}, {elapsed:.1f}s")


class TestMetricsOracles:
    def test_auc_acc_roc(self):
        rng = np.random.default_rng(99)
        worst = 0.0
        for trial in range(100):
            n = int(rng.integers(4, 201))
            labels = rng.choice([-1, 1], size=n)
            while len(set(labels.tolist())) < 2:
                labels = rng.choice([-1, 1], size=n)
            scores = rng.normal(size=n)
            if trial % 2 == 0:
                scores = np.round(scores, 1)   # force cross-class ties
            curve = roc(scores, labels)
            gap = abs(curve.auc - auc_pair_count(scores, labels))
            worst = max(worst, gap)
            assert gap <= 1e-12

        assert accuracy(ConfusionCounts(tp=1, tn=1, fp=1, fn=1)) == 0.5
        assert accuracy(ConfusionCounts(tp=9, tn=1, fp=0, fn=0)) == 1.0

        scores = rng.normal(size=80)
        labels = rng.choice([-1, 1], size=80)
        while len(set(labels.tolist())) < 2:
            labels = rng.choice([-1, 1], size=80)
        base = roc(scores, labels)
        warped = roc(np.tanh(scores) * 5.0 + 2.0, labels)
        assert warped.points == base.points and warped.auc == base.auc

        record_acceptance(
            "metrics-oracles", True,
            f"100 score sets, worst AUC gap {worst:.1e}, monotone-invariant")


class TestFeatureProperties:
    def test_degenerates_invariances_oracles(self):
        t0 = time.monotonic()
        const_gray = RasterImage(np.full((16, 16), 0.4))

        glcm = glcm_features(const_gray)
        assert glcm[1] == 1.0 and glcm[0] == 0.0       # energy 1, contrast 0
        lbp = lbp_riu2_histogram(const_gray)
        assert lbp[8] == 1.0
        assert gray_entropy(const_gray.pixels) == 0.0
        hog = hog_features(const_gray)
        assert np.abs(hog).max() == 0.0

        # Translation invariance of the log-compressed moment invariants.
        def disk(center, radius=14, size=160):
            yy, xx = np.mgrid[0:size, 0:size]
            inside = (yy - center[0]) ** 2 + (xx - center[1]) ** 2 <= radius ** 2
            return RasterImage(np.where(inside, 0.9, 0.1).astype(float))
        hu_shift = np.abs(hu_moments_canny(disk((80, 80)))
                          - hu_moments_canny(disk((73, 88)))).max()
        assert hu_shift <= 1e-3

        rng = np.random.default_rng(6)
        img = rng.random((24, 24))
        rot_gap = np.abs(lbp_riu2_histogram(RasterImage(img))
                         - lbp_riu2_histogram(RasterImage(np.rot90(img)))).max()
        assert rot_gap <= 1e-6

        # Brute-force oracle agreement for the corpus-relative features.
        worst_lof = worst_fam = 0.0
        for seed in range(3):
            r = np.random.default_rng(40 + seed)
            n = int(r.integers(15, 31))
            pts = make_fs("p", r.normal(size=(3, n)))
            k = int(r.integers(3, 9))
            worst_lof = max(worst_lof, float(np.abs(
                lof_scores(pts, k=k) - lof_brute(pts.values, k=k)).max()))

            raw = r.random((8, n))
            hists = make_fs("h", raw / raw.sum(axis=0))
            fam = familiarity(hists, hists, k=k)
            oracle = familiarity_brute(hists.values, hists.values,
                                       hists.sample_ids, hists.sample_ids, k=k)
            worst_fam = max(worst_fam, float(np.abs(fam - oracle).max()))
        assert worst_lof <= 1e-9 and worst_fam <= 1e-9

        elapsed = time.monotonic() - t0
        record_acceptance(
            "feature-properties", elapsed < 60.0,
            f"hu shift {hu_shift:.1e}, lbp rot gap {rot_gap:.1e}, "
            f"lof/fam oracle gaps {worst_lof:.1e}/{worst_fam:.1e}, {elapsed:.1f}s")


class TestExperimentalLadder:
    def test_three_strategy_ladder(self, ladder_corpus):
        t0 = time.monotonic()
        sets, failures = extract_images(ladder_corpus["images"])
        assert not failures
        labels = load_label_csv(ladder_corpus["labels"]).select_ids(
            sets["color_histogram"].sample_ids)
        manifest = default_manifest()

        margins = []
        rows_shape_ok = True
        dims_ok = True
        for seed in range(10):
            config = resolve_config({"labels_csv": str(ladder_corpus["labels"])},
                                    seed=seed)
            train_idx, _ = split_indices(labels, config.train_fraction, seed)
            train_ids = tuple(labels.sample_ids[i] for i in train_idx)
            full = derive_corpus_features(sets, train_ids,
                                          familiarity_k=config.familiarity_k,
                                          lof_k=config.lof_k)
            result = run_comparison(config, manifest=manifest, sets=full,
                                    labels=labels)
            rows = result["rows"]
            rows_shape_ok &= ([r["method"] for r in rows]
                              == ["concat_svm", "dca_svm", "dca_mkl"]
                              and all(set(r) == {"method", "acc", "auc"}
                                      for r in rows))
            dims_ok &= result["dims"]["fused"] < result["dims"]["concatenated"]
            margins.append(rows[2]["acc"] - rows[0]["acc"])

        elapsed = time.monotonic() - t0
        med_margin = float(np.median(margins))
        ok = rows_shape_ok and dims_ok and med_margin >= -0.02 and elapsed < 300.0
        record_acceptance(
            "experimental-ladder", ok,
            f"median multi-kernel vs concat ACC margin {med_margin:+.3f}, "
            f"fused dim < concat dim: {dims_ok}, {elapsed:.0f}s")


class TestDeterminism:
    def test_byte_identical_artifacts(self, small_corpus, tmp_path):
        out = tmp_path / "out"
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({
            "images_dir": str(small_corpus["images"]),
            "labels_csv": str(small_corpus["labels"]),
            "out_dir": str(out),
            "split": {"train_fraction": 0.7, "seed": 3},
        }), encoding="utf-8")

        def run_once():
            for cmd in ("extract", "fuse", "train"):
                assert main([cmd, "--config", str(config_path)]) == 0
            assert main(["predict", "--config", str(config_path),
                         "--model", str(out / "model.json"),
                         "--ids", str(out / "test_ids.txt")]) == 0
            assert main(["evaluate", "--config", str(config_path),
                         "--predictions", str(out / "predictions.csv")]) == 0
            return {name: (out / name).read_bytes()
                    for name in ("model.json", "predictions.csv", "roc.csv")}

        first = run_once()
        second = run_once()
        ok = first == second
        record_acceptance(
            "determinism", ok,
            "model.json, predictions.csv, roc.csv byte-identical across runs")
