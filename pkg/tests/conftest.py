"""Shared fixtures: FeatureSet builders, synthetic labeled data, the
synthetic image corpus used by the pipeline and comparison tests, and the
acceptance-criterion result collector."""

from __future__ import annotations

import numpy as np
import pytest
from PIL import Image

from dcamkl import FeatureSet, LabelVector
from dcamkl.dataset import default_feature_names

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, passed: bool, detail: str = ""):
    """Collect one acceptance-criterion verdict; printed in the summary."""
    ACCEPTANCE_RESULTS.append((name, passed, detail))
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {name}: {status}" + (f"  [{detail}]" if detail else ""))
    assert passed, f"acceptance criterion {name} failed: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        line = f"{status}  {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


def make_fs(name, values, ids=None):
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[None, :]
    n = values.shape[1]
    if ids is None:
        ids = tuple(f"s{i}" for i in range(n))
    return FeatureSet(name=name, values=values, sample_ids=tuple(ids),
                      feature_names=default_feature_names(name, values.shape[0]))


def make_labels(labels, ids=None):
    labels = np.asarray(labels)
    if ids is None:
        ids = tuple(f"s{i}" for i in range(len(labels)))
    return LabelVector(labels=labels, sample_ids=tuple(ids))


@pytest.fixture
def fs_factory():
    return make_fs


@pytest.fixture
def label_factory():
    return make_labels


def class_structured_data(rng, p, n, c, scale=2.0):
    """Random features with per-class mean offsets; returns (values, y)."""
    y = rng.integers(0, c, size=n)
    while len(np.unique(y)) < c:
        y = rng.integers(0, c, size=n)
    means = rng.normal(scale=scale, size=(p, c))
    return rng.normal(size=(p, n)) + means[:, y], y


# ---------------------------------------------------------------------------
# Synthetic image corpus
# ---------------------------------------------------------------------------

def synth_image(rng, label, size=48):
    """Cleanly separable classes: vertical gratings with a warm tint versus
    smooth horizontal ramps with a cool tint."""
    h = w = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    if label > 0:
        freq = rng.uniform(0.5, 0.9)
        phase = rng.uniform(0, 2 * np.pi)
        base = 0.5 + 0.45 * np.sin(freq * xx + phase)
        tint = np.array([0.9, rng.uniform(0.3, 0.5), 0.25])
    else:
        slope = rng.uniform(0.5, 1.0)
        base = np.clip((yy / h) * slope + rng.uniform(0, 0.3), 0, 1)
        tint = np.array([0.25, rng.uniform(0.3, 0.5), 0.9])
    noise = rng.normal(scale=0.03, size=(h, w))
    gray = np.clip(base + noise, 0.0, 1.0)
    px = np.clip(gray[:, :, None] * tint[None, None, :]
                 + rng.normal(scale=0.02, size=(h, w, 3)), 0.0, 1.0)
    return px


def synth_image_hard(rng, label, size=48):
    """Overlapping classes: both are noisy tinted gratings; the classes only
    shift the orientation distribution and the warm/cool tint odds, so no
    single cue separates them cleanly."""
    h = w = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    angle = rng.normal(0.35 if label > 0 else 1.05, 0.3)
    freq = rng.uniform(0.45, 0.95)
    phase = rng.uniform(0, 2 * np.pi)
    amp = rng.uniform(0.2, 0.4)
    coord = np.cos(angle) * xx + np.sin(angle) * yy
    base = 0.5 + amp * np.sin(freq * coord + phase)
    warm = rng.random() < (0.68 if label > 0 else 0.32)
    tint = np.array([0.85, rng.uniform(0.35, 0.55), 0.3]) if warm \
        else np.array([0.3, rng.uniform(0.35, 0.55), 0.85])
    gray = np.clip(base + rng.normal(scale=0.15, size=(h, w)), 0.0, 1.0)
    px = np.clip(gray[:, :, None] * tint[None, None, :]
                 + rng.normal(scale=0.05, size=(h, w, 3)), 0.0, 1.0)
    return px


def write_corpus(root, n_images, seed=0, size=48, hard=False):
    """Write a labeled PNG corpus; returns the labels CSV path."""
    root.mkdir(parents=True, exist_ok=True)
    images = root / "images"
    images.mkdir(exist_ok=True)
    rng = np.random.default_rng(seed)
    generator = synth_image_hard if hard else synth_image
    rows = []
    for i in range(n_images):
        label = 1 if i % 2 == 0 else -1
        px = generator(rng, label, size=size)
        arr = np.round(px * 255).astype(np.uint8)
        Image.fromarray(arr, mode="RGB").save(images / f"img{i:04d}.png")
        rows.append((f"img{i:04d}", "+1" if label > 0 else "-1"))
    labels_path = root / "labels.csv"
    with open(labels_path, "w", encoding="utf-8") as fh:
        fh.write("id,label\n")
        for sid, lab in rows:
            fh.write(f"{sid},{lab}\n")
    return labels_path


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """40-image corpus for pipeline tests."""
    root = tmp_path_factory.mktemp("corpus_small")
    labels = write_corpus(root, 40, seed=11, size=32)
    return {"root": root, "images": root / "images", "labels": labels}


@pytest.fixture(scope="session")
def ladder_corpus(tmp_path_factory):
    """200-image overlapping-class corpus for the comparison-ladder runs."""
    root = tmp_path_factory.mktemp("corpus_ladder")
    labels = write_corpus(root, 200, seed=5, size=48, hard=True)
    return {"root": root, "images": root / "images", "labels": labels}
