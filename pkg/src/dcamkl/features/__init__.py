"""Image descriptors for the three interestingness cues."""

from .color import (arousal_score, color_correlogram, color_histogram,
                    color_moments_hsv)
from .complexity import complexity_features
from .cues import (CUES, CueGroup, CueManifest, PER_IMAGE_EXTRACTORS,
                   default_manifest, load_manifest, save_manifest)
from .hog import hog_features
from .image import RasterImage, load_image, resize_bilinear, rgb_to_hsv, to_gray
from .outliers import familiarity, lof_query, lof_scores
from .shape import edge_histogram_sobel, hu_moments, hu_moments_canny
from .texture import glcm_features, haar_wavelet_features, lbp_riu2_histogram

__all__ = [
    "CUES", "CueGroup", "CueManifest", "PER_IMAGE_EXTRACTORS", "RasterImage",
    "arousal_score", "color_correlogram", "color_histogram",
    "color_moments_hsv", "complexity_features", "default_manifest",
    "edge_histogram_sobel", "familiarity", "glcm_features",
    "haar_wavelet_features", "hog_features", "hu_moments", "hu_moments_canny",
    "lbp_riu2_histogram", "load_image", "load_manifest", "lof_query",
    "lof_scores", "resize_bilinear", "rgb_to_hsv", "save_manifest", "to_gray",
]
