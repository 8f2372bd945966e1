import json

import numpy as np
import pytest
from scipy import ndimage

from shapesearch import shapes as S
from shapesearch.errors import ParseError, SegmentationError
from shapesearch.features import fourier_descriptor, shape_similarity, snap_color
from shapesearch.geometry import Transform, apply_transform
from shapesearch.ingest import (
    RasterImage,
    extract_region_features,
    parse_segmented_image,
    render_scene,
    segment_synthetic,
    serialize_segmented_image,
)

RED = snap_color((255, 0, 0))
BLUE = snap_color((0, 0, 255))
GREEN = snap_color((0, 200, 0))


def simple_scene():
    rect = apply_transform(Transform(tx=60, ty=120, s=30), S.square())
    circ = apply_transform(Transform(tx=160, ty=80, s=25), S.circle())
    return render_scene([(rect, RED), (circ, BLUE)], 240, 200)


class TestRaster:
    def test_png_round_trip(self):
        raster = simple_scene()
        again = RasterImage.from_bytes(raster.to_png_bytes())
        assert np.array_equal(raster.pixels, again.pixels)

    def test_ppm_supported(self, tmp_path):
        raster = simple_scene()
        from PIL import Image

        path = tmp_path / "scene.ppm"
        Image.fromarray(raster.pixels).save(path)
        again = RasterImage.from_file(path)
        assert np.array_equal(raster.pixels, again.pixels)

    def test_garbage_rejected(self):
        with pytest.raises(ParseError):
            RasterImage.from_bytes(b"not an image")


class TestSegmentSynthetic:
    def test_one_rectangle_on_white(self):
        rect = apply_transform(Transform(tx=50, ty=50, s=20), S.square())
        seg = segment_synthetic(render_scene([(rect, RED)], 100, 100), "r1")
        assert seg.m == 1
        sq_sim = shape_similarity(
            fourier_descriptor(S.square()), seg.regions[0].descriptor
        )
        assert sq_sim > 0.999
        assert seg.regions[0].color == RED

    def test_two_disjoint_blobs(self):
        seg = segment_synthetic(simple_scene(), "two")
        assert seg.m == 2
        colors = {tuple(int(round(v)) for v in r.color) for r in seg.regions}
        assert len(colors) == 2

    def test_hole_keeps_outer_contour_only(self):
        outer = apply_transform(Transform(tx=100, ty=100, s=50), S.square())
        inner = apply_transform(Transform(tx=100, ty=100, s=18), S.circle())
        raster = render_scene([(outer, RED), (inner, GREEN)], 200, 200)
        seg = segment_synthetic(raster, "hole")
        assert seg.m == 2
        by_color = {tuple(int(round(v)) for v in r.color): r for r in seg.regions}
        outer_region = by_color[tuple(int(round(v)) for v in RED)]
        # outer contour is the external square, not an annulus boundary
        assert shape_similarity(
            fourier_descriptor(S.square()), outer_region.descriptor
        ) > 0.99

    def test_small_specks_dropped(self):
        rect = apply_transform(Transform(tx=30, ty=30, s=15), S.square())
        speck = apply_transform(Transform(tx=80, ty=80, s=2), S.square())  # ~16 px
        raster = render_scene([(rect, RED), (speck, BLUE)], 100, 100)
        seg = segment_synthetic(raster, "speck")
        assert seg.m == 1

    def test_background_only_rejected(self):
        raster = RasterImage(np.full((50, 50, 3), 255, dtype=np.uint8))
        with pytest.raises(SegmentationError):
            segment_synthetic(raster, "blank")

    def test_regions_connected_and_disjoint(self):
        seg = segment_synthetic(simple_scene(), "chk")
        masks = []
        for region in seg.regions:
            from PIL import Image, ImageDraw

            canvas = Image.new("L", (240, 200), 0)
            ImageDraw.Draw(canvas).polygon(
                [(float(x), float(y)) for x, y in region.contour.array], fill=1
            )
            mask = np.asarray(canvas, dtype=bool)
            _, count = ndimage.label(mask)
            assert count == 1
            masks.append(mask)
        assert not np.any(masks[0] & masks[1])

    def test_translation_stability_of_region_count(self):
        rect = apply_transform(Transform(tx=60, ty=60, s=18), S.triangle())
        base = render_scene([(rect, RED)], 160, 160)
        moved_rect = apply_transform(Transform(tx=90, ty=85, s=18), S.triangle())
        moved = render_scene([(moved_rect, RED)], 160, 160)
        assert segment_synthetic(base, "a").m == segment_synthetic(moved, "b").m


class TestSegmentedImageDocuments:
    def test_round_trip_identical(self):
        seg = segment_synthetic(simple_scene(), "rt")
        doc = serialize_segmented_image(seg)
        again = parse_segmented_image(json.dumps(doc))
        assert again.id == seg.id
        assert again.m == seg.m
        for a, b in zip(again.regions, seg.regions):
            assert np.array_equal(a.contour.array, b.contour.array)
            assert a.color == b.color
            assert a.texture == b.texture
            assert a.size == pytest.approx(b.size, abs=1e-9)
            assert np.allclose(a.descriptor.coeffs, b.descriptor.coeffs, atol=1e-12)

    def test_two_point_contour_rejected(self):
        doc = {
            "id": "bad",
            "regions": [{"contour": [[0, 0], [1, 1]], "color": [1, 2, 3], "texture": None}],
        }
        with pytest.raises(ParseError, match="contour"):
            parse_segmented_image(doc)

    def test_overlapping_regions_rejected_with_names(self):
        square = [[0, 0], [10, 0], [10, 10], [0, 10]]
        shifted = [[3, 3], [13, 3], [13, 13], [3, 13]]
        doc = {
            "id": "bad",
            "regions": [
                {"contour": square, "color": [255, 0, 0], "texture": None},
                {"contour": shifted, "color": [0, 0, 255], "texture": None},
            ],
        }
        with pytest.raises(ParseError, match="0 and 1"):
            parse_segmented_image(doc)

    def test_missing_fields_rejected(self):
        with pytest.raises(ParseError):
            parse_segmented_image({"id": "x"})
        with pytest.raises(ParseError):
            parse_segmented_image({"regions": []})
        with pytest.raises(ParseError):
            parse_segmented_image(b"][")


class TestExtractRegionFeatures:
    def test_uniform_red_square_features(self):
        rect = apply_transform(Transform(tx=50, ty=50, s=25), S.square())
        raster = render_scene([(rect, RED)], 100, 100)
        region = extract_region_features(rect, raster)
        assert region.color == RED
        assert float(region.texture.values.max()) < 1e-9

    def test_features_idempotent(self):
        rect = apply_transform(Transform(tx=50, ty=50, s=25), S.square())
        raster = render_scene([(rect, RED)], 100, 100)
        a = extract_region_features(rect, raster)
        b = extract_region_features(rect, raster)
        assert np.array_equal(a.descriptor.coeffs, b.descriptor.coeffs)
        assert a.size == b.size and a.centroid == b.centroid

    def test_pose_invariant_descriptor_across_extractions(self):
        t1 = Transform(tx=60, ty=60, s=20, theta=0.0)
        t2 = Transform(tx=150, ty=90, s=32, theta=1.1)
        r1 = apply_transform(t1, S.triangle())
        r2 = apply_transform(t2, S.triangle())
        raster = render_scene([(r1, RED), (r2, BLUE)], 220, 160)
        seg = segment_synthetic(raster, "poses")
        assert seg.m == 2
        sim = shape_similarity(seg.regions[0].descriptor, seg.regions[1].descriptor)
        assert sim > 0.99
