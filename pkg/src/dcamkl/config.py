"""Pipeline configuration: one JSON file, every knob optional, with the
resolved settings echoed (and digested) into all downstream artifacts."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

from .errors import ValidationError
from .kernels import KernelSpec

DEFAULT_KERNELS = {
    "unusualness": {"kind": "rbf", "sigma": "median"},
    "aesthetics": {"kind": "polynomial", "degree": 2, "scale": 1.0, "offset": 1.0},
    "general_preferences": {"kind": "polynomial", "degree": 3, "scale": 1.0, "offset": 1.0},
}

DEFAULT_SINGLE_KERNEL = {"kind": "polynomial", "degree": 3, "scale": 1.0, "offset": 1.0}

DEFAULTS = {
    "images_dir": None,
    "features_dir": None,
    "labels_csv": None,
    "out_dir": "out",
    "split": {"train_fraction": 0.7, "seed": 0},
    "fusion": {"mode": "concat"},
    "svm": {"C": 1.0, "tol": 1e-3},
    "mkl": {"outer_tol": 1e-4, "max_outer": 200, "gap_tol": 1e-2},
    "kernels": DEFAULT_KERNELS,
    "single_kernel": DEFAULT_SINGLE_KERNEL,
    "familiarity_k": 10,
    "lof_k": 10,
    "imports": [],
}


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved configuration; ``data`` always carries every key."""

    data: dict = field(default_factory=dict)

    @property
    def images_dir(self):
        return self.data["images_dir"]

    @property
    def features_dir(self):
        return self.data["features_dir"]

    @property
    def labels_csv(self):
        return self.data["labels_csv"]

    @property
    def out_dir(self) -> str:
        return self.data["out_dir"]

    @property
    def train_fraction(self) -> float:
        return float(self.data["split"]["train_fraction"])

    @property
    def seed(self) -> int:
        return int(self.data["split"]["seed"])

    @property
    def fusion_mode(self) -> str:
        return self.data["fusion"]["mode"]

    @property
    def C(self) -> float:
        return float(self.data["svm"]["C"])

    @property
    def svm_tol(self) -> float:
        return float(self.data["svm"]["tol"])

    @property
    def mkl_outer_tol(self) -> float:
        return float(self.data["mkl"]["outer_tol"])

    @property
    def mkl_max_outer(self) -> int:
        return int(self.data["mkl"]["max_outer"])

    @property
    def mkl_gap_tol(self) -> float:
        return float(self.data["mkl"]["gap_tol"])

    @property
    def familiarity_k(self) -> int:
        return int(self.data["familiarity_k"])

    @property
    def lof_k(self) -> int:
        return int(self.data["lof_k"])

    @property
    def imports(self) -> list:
        return self.data["imports"]

    def kernel_settings(self, cue: str) -> dict:
        settings = self.data["kernels"].get(cue)
        if settings is None:
            raise ValidationError(f"kernel manifest does not cover cue {cue!r}")
        return settings

    def single_kernel_spec(self) -> KernelSpec:
        return KernelSpec.from_dict(self.data["single_kernel"])

    def digest(self) -> str:
        canon = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in out:
            raise ValidationError(f"unknown config key {key!r}")
        if isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_config(raw: dict | None = None, seed: int | None = None,
                   out_dir: str | None = None) -> PipelineConfig:
    """Fill defaults and apply command-line overrides."""
    data = _merge(DEFAULTS, raw or {})
    if seed is not None:
        data["split"]["seed"] = int(seed)
    if out_dir is not None:
        data["out_dir"] = str(out_dir)
    return PipelineConfig(data=data)


def load_config(path, seed: int | None = None, out_dir: str | None = None) -> PipelineConfig:
    with open(str(path), "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return resolve_config(raw, seed=seed, out_dir=out_dir)
