import numpy as np
import pytest

from dcamkl import ValidationError
from dcamkl.features import RasterImage, load_image
from dcamkl.features.cues import (CueManifest, PER_IMAGE_EXTRACTORS,
                                  default_manifest)


class TestCueMapping:
    def test_standard_assignment(self):
        manifest = default_manifest()
        groups = {g.cue: set(g.feature_sets) for g in manifest.cue_groups()}
        assert groups["unusualness"] == {"familiarity", "lof"}
        assert groups["aesthetics"] == {
            "arousal", "color_moments", "color_correlogram",
            "glcm", "haar", "lbp", "complexity", "edge_histogram", "hu_moments",
        }
        assert groups["general_preferences"] == {"hog"}

    def test_type_groupings(self):
        manifest = default_manifest()
        assert manifest.sets_of_type("aesthetics", "color") == \
            ["color_moments", "color_correlogram"]
        assert manifest.sets_of_type("aesthetics", "texture") == \
            ["glcm", "haar", "lbp"]
        assert manifest.sets_of_type("aesthetics", "shape") == \
            ["edge_histogram", "hu_moments"]

    def test_each_set_has_one_cue(self):
        manifest = default_manifest()
        names = [e["name"] for e in manifest.entries]
        assert len(names) == len(set(names))

    def test_imports_join_general_preferences(self):
        manifest = default_manifest(imports=[
            {"name": "gist", "cue": "general_preferences", "type": "gist"},
            {"name": "sift", "cue": "general_preferences", "type": "sift"},
        ])
        groups = {g.cue: set(g.feature_sets) for g in manifest.cue_groups()}
        assert groups["general_preferences"] == {"hog", "gist", "sift"}
        assert manifest.types_in_cue("general_preferences") == \
            ["hog", "gist", "sift"]

    def test_duplicate_declaration_rejected(self):
        with pytest.raises(ValidationError):
            CueManifest(entries=(
                {"name": "hog", "cue": "general_preferences", "type": "hog"},
                {"name": "hog", "cue": "aesthetics", "type": "hog"},
            ))

    def test_unknown_cue_rejected(self):
        with pytest.raises(ValidationError):
            CueManifest(entries=(
                {"name": "x", "cue": "mystery", "type": "x"},
            ))


class TestImageDecoding:
    def test_png_and_bmp(self, tmp_path):
        from PIL import Image
        rng = np.random.default_rng(0)
        arr = (rng.random((12, 10, 3)) * 255).astype(np.uint8)
        for ext in ("png", "bmp"):
            path = tmp_path / f"img.{ext}"
            Image.fromarray(arr, "RGB").save(path)
            img = load_image(path)
            assert img.channels == 3
            assert (img.height, img.width) == (12, 10)
            np.testing.assert_allclose(img.pixels, arr / 255.0, atol=1e-12)

    def test_grayscale_png(self, tmp_path):
        from PIL import Image
        arr = (np.linspace(0, 255, 64).reshape(8, 8)).astype(np.uint8)
        path = tmp_path / "gray.png"
        Image.fromarray(arr, "L").save(path)
        img = load_image(path)
        assert img.channels == 1


class TestExtractorDeterminism:
    def test_identical_pixels_identical_output(self):
        rng = np.random.default_rng(1)
        px = rng.random((32, 32, 3))
        img_a = RasterImage(px)
        img_b = RasterImage(px.copy())
        for info in PER_IMAGE_EXTRACTORS:
            va = np.asarray(info.fn(img_a))
            vb = np.asarray(info.fn(img_b))
            assert np.array_equal(va, vb), info.name
            assert va.shape == (len(info.feature_names),), info.name
