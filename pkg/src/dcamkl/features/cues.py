"""Extractor registry and the cue/type manifest consumed by the fusion and
kernel-grouping stages.

Three cues drive the classifier. Feature sets of the same *type* within a
cue are fused; across types and cues the results are concatenated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import ValidationError
from .color import (arousal_feature_names, arousal_score,
                    color_histogram, color_histogram_feature_names,
                    color_moments_feature_names, color_moments_hsv,
                    color_correlogram, correlogram_feature_names)
from .complexity import complexity_feature_names, complexity_features
from .hog import hog_feature_names, hog_features
from .shape import (edge_histogram_feature_names, edge_histogram_sobel,
                    hu_feature_names, hu_moments_canny)
from .texture import (glcm_feature_names, glcm_features,
                      haar_feature_names, haar_wavelet_features,
                      lbp_feature_names, lbp_riu2_histogram)

CUES = ("unusualness", "aesthetics", "general_preferences")

# Support sets participate in deriving other features but belong to no cue.
SUPPORT = "support"


@dataclass(frozen=True)
class ExtractorInfo:
    name: str
    fn: object
    cue: str
    ftype: str
    feature_names: tuple[str, ...]


# Per-image extractors. The corpus-relative unusualness features
# (familiarity, lof) are derived from the color histogram set afterwards.
PER_IMAGE_EXTRACTORS: tuple[ExtractorInfo, ...] = (
    ExtractorInfo("color_moments", color_moments_hsv, "aesthetics", "color",
                  color_moments_feature_names()),
    ExtractorInfo("color_correlogram", color_correlogram, "aesthetics", "color",
                  correlogram_feature_names()),
    ExtractorInfo("glcm", glcm_features, "aesthetics", "texture",
                  glcm_feature_names()),
    ExtractorInfo("haar", haar_wavelet_features, "aesthetics", "texture",
                  haar_feature_names()),
    ExtractorInfo("lbp", lbp_riu2_histogram, "aesthetics", "texture",
                  lbp_feature_names()),
    ExtractorInfo("arousal", arousal_score, "aesthetics", "arousal",
                  arousal_feature_names()),
    ExtractorInfo("edge_histogram", edge_histogram_sobel, "aesthetics", "shape",
                  edge_histogram_feature_names()),
    ExtractorInfo("hu_moments", hu_moments_canny, "aesthetics", "shape",
                  hu_feature_names()),
    ExtractorInfo("complexity", complexity_features, "aesthetics", "complexity",
                  complexity_feature_names()),
    ExtractorInfo("hog", hog_features, "general_preferences", "hog",
                  hog_feature_names()),
    ExtractorInfo("color_histogram", color_histogram, SUPPORT, "color_histogram",
                  color_histogram_feature_names()),
)

DERIVED_EXTRACTORS = (
    ("familiarity", "unusualness", "familiarity"),
    ("lof", "unusualness", "lof"),
)


@dataclass(frozen=True)
class CueGroup:
    cue: str
    feature_sets: tuple[str, ...]


@dataclass(frozen=True)
class CueManifest:
    """Maps feature set name -> (cue, type); preserves declaration order."""

    entries: tuple[dict, ...]                 # {"name", "cue", "type"}
    failures: tuple[dict, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e["name"] in seen:
                raise ValidationError(f"feature set {e['name']!r} declared twice")
            seen.add(e["name"])
            if e["cue"] not in CUES + (SUPPORT,):
                raise ValidationError(f"unknown cue {e['cue']!r}")

    def cue_groups(self) -> tuple[CueGroup, ...]:
        groups = []
        for cue in CUES:
            names = tuple(e["name"] for e in self.entries if e["cue"] == cue)
            groups.append(CueGroup(cue=cue, feature_sets=names))
        return tuple(groups)

    def cue_of(self, name: str) -> str:
        for e in self.entries:
            if e["name"] == name:
                return e["cue"]
        raise ValidationError(f"feature set {name!r} not in manifest")

    def types_in_cue(self, cue: str) -> list[str]:
        out = []
        for e in self.entries:
            if e["cue"] == cue and e["type"] not in out:
                out.append(e["type"])
        return out

    def sets_of_type(self, cue: str, ftype: str) -> list[str]:
        return [e["name"] for e in self.entries
                if e["cue"] == cue and e["type"] == ftype]


def default_manifest(include_support: bool = True,
                     imports: list[dict] | None = None) -> CueManifest:
    """Manifest for the built-in extractors plus optional imported
    descriptor CSVs (declared with their cue and type)."""
    entries = [{"name": x.name, "cue": x.cue, "type": x.ftype}
               for x in PER_IMAGE_EXTRACTORS
               if include_support or x.cue != SUPPORT]
    entries.extend({"name": name, "cue": cue, "type": ftype}
                   for name, cue, ftype in DERIVED_EXTRACTORS)
    for imp in imports or []:
        entries.append({"name": imp["name"], "cue": imp["cue"], "type": imp["type"]})
    return CueManifest(entries=tuple(entries))


def save_manifest(manifest: CueManifest, path):
    data = {
        "version": 1,
        "entries": list(manifest.entries),
        "failures": list(manifest.failures),
        "metadata": manifest.metadata,
    }
    with open(str(path), "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def load_manifest(path) -> CueManifest:
    with open(str(path), "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return CueManifest(entries=tuple(data["entries"]),
                       failures=tuple(data.get("failures", ())),
                       metadata=data.get("metadata", {}))
