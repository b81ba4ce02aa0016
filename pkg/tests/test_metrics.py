import numpy as np
import pytest

from dcamkl import ValidationError, accuracy, confusion, evaluate, roc
from dcamkl.metrics import ConfusionCounts, save_roc_csv
from oracles import auc_pair_count


class TestAccuracy:
    def test_all_correct(self):
        assert accuracy(ConfusionCounts(tp=9, tn=1, fp=0, fn=0)) == 1.0

    def test_half(self):
        assert accuracy(ConfusionCounts(tp=1, tn=1, fp=1, fn=1)) == 0.5

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            accuracy(ConfusionCounts(tp=0, tn=0, fp=0, fn=0))

    def test_counts_match_tally(self):
        rng = np.random.default_rng(0)
        truth = rng.choice([-1, 1], size=40)
        pred = rng.choice([-1, 1], size=40)
        counts = confusion(pred, truth)
        assert counts.tp == sum(1 for p, t in zip(pred, truth) if p == 1 and t == 1)
        assert counts.tn == sum(1 for p, t in zip(pred, truth) if p == -1 and t == -1)
        assert counts.fp == sum(1 for p, t in zip(pred, truth) if p == 1 and t == -1)
        assert counts.fn == sum(1 for p, t in zip(pred, truth) if p == -1 and t == 1)
        assert counts.total == 40


class TestRoc:
    def test_perfect_separation(self):
        scores = np.array([0.9, 0.8, 0.2, 0.1])
        labels = np.array([1, 1, -1, -1])
        curve = roc(scores, labels)
        assert curve.auc == 1.0
        assert curve.points[0] == (0.0, 0.0) and curve.points[-1] == (1.0, 1.0)

    def test_all_tied_scores_diagonal(self):
        curve = roc(np.zeros(6), np.array([1, -1, 1, -1, 1, -1]))
        assert curve.auc == pytest.approx(0.5, abs=1e-12)
        assert curve.points == ((0.0, 0.0), (1.0, 1.0))

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_pair_counting(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 200))
        labels = rng.choice([-1, 1], size=n)
        while len(set(labels.tolist())) < 2:
            labels = rng.choice([-1, 1], size=n)
        # quantized scores force ties across classes
        scores = np.round(rng.normal(size=n), 1)
        curve = roc(scores, labels)
        assert abs(curve.auc - auc_pair_count(scores, labels)) <= 1e-12

    def test_single_class_rejected(self):
        with pytest.raises(ValidationError):
            roc(np.array([0.1, 0.2]), np.array([1, 1]))

    def test_monotone_axes(self):
        rng = np.random.default_rng(3)
        scores = rng.normal(size=50)
        labels = rng.choice([-1, 1], size=50)
        curve = roc(scores, labels)
        pts = np.array(curve.points)
        assert (np.diff(pts[:, 0]) >= 0).all()
        assert (np.diff(pts[:, 1]) >= 0).all()

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(4)
        scores = rng.normal(size=80)
        labels = rng.choice([-1, 1], size=80)
        base = roc(scores, labels)
        warped = roc(np.exp(scores) + 3.0, labels)
        assert warped.points == base.points
        assert warped.auc == base.auc

    def test_negation_flips_auc(self):
        rng = np.random.default_rng(5)
        scores = rng.normal(size=60)
        labels = rng.choice([-1, 1], size=60)
        assert roc(-scores, labels).auc == pytest.approx(
            1.0 - roc(scores, labels).auc, abs=1e-12)


class TestEvaluate:
    def test_perfect_predictor(self):
        truth_labels = np.array([1, 1, -1, -1])
        scores = np.array([2.0, 1.0, -1.0, -2.0])
        from conftest import make_labels
        report = evaluate(np.sign(scores).astype(int), scores,
                          make_labels(truth_labels))
        assert report.acc == 1.0 and report.auc == 1.0

    def test_label_inversion_symmetry(self):
        from conftest import make_labels
        rng = np.random.default_rng(6)
        scores = rng.normal(size=30)
        truth = make_labels(rng.choice([-1, 1], size=30))
        pred = np.where(scores >= 0, 1, -1)
        base = evaluate(pred, scores, truth)
        flipped = evaluate(-pred, -scores, truth)
        assert flipped.acc == pytest.approx(1.0 - base.acc, abs=1e-12)
        assert flipped.auc == pytest.approx(1.0 - base.auc, abs=1e-12)

    def test_twenty_sample_hand_tally(self):
        from conftest import make_labels
        truth = make_labels([1] * 10 + [-1] * 10)
        pred = np.array([1] * 8 + [-1] * 2 + [-1] * 7 + [1] * 3)
        scores = np.linspace(1.0, -1.0, 20)
        report = evaluate(pred, scores, truth)
        assert report.counts.tp == 8 and report.counts.fn == 2
        assert report.counts.tn == 7 and report.counts.fp == 3
        assert report.acc == pytest.approx(15 / 20)
        assert report.auc == 1.0   # scores strictly ordered with class

    def test_roc_csv(self, tmp_path):
        curve = roc(np.array([0.9, 0.1]), np.array([1, -1]))
        path = tmp_path / "roc.csv"
        save_roc_csv(curve, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "fpr,tpr"
        assert len(lines) == 1 + len(curve.points)
