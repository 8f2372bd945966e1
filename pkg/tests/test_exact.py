import numpy as np
import pytest

from shapesearch import shapes as S
from shapesearch.errors import GeometryError
from shapesearch.exact import (
    boundary_distance,
    contour_match,
    recognize_exact,
    recognize_exact_oracle,
    solve_two_point_transform,
    subsumes,
)
from shapesearch.features import build_region
from shapesearch.geometry import (
    CompositeDescription,
    SegmentedImage,
    Transform,
    Vec2,
    apply_transform,
    prototypical_image,
    size,
)

from conftest import embed_scene, make_component, random_description, random_transform


class TestTwoPointSolver:
    def test_identity_geometry(self):
        t = solve_two_point_transform(Vec2(1, 2), Vec2(4, -1), Vec2(1, 2), Vec2(4, -1))
        assert t.s == 1.0 and t.theta == 0.0
        assert abs(t.tx) < 1e-12 and abs(t.ty) < 1e-12

    def test_known_rotation_scaling_case(self):
        t = solve_two_point_transform(Vec2(0, 0), Vec2(1, 0), Vec2(2, 2), Vec2(2, 4))
        assert t.s == pytest.approx(2.0, abs=1e-12)
        assert t.theta == pytest.approx(np.pi / 2, abs=1e-12)
        assert (t.tx, t.ty) == pytest.approx((2.0, 2.0), abs=1e-12)

    def test_coincident_anchors_rejected(self):
        with pytest.raises(GeometryError):
            solve_two_point_transform(Vec2(1, 1), Vec2(1, 1), Vec2(0, 0), Vec2(1, 0))
        with pytest.raises(GeometryError):
            solve_two_point_transform(Vec2(0, 0), Vec2(1, 0), Vec2(2, 2), Vec2(2, 2))

    def test_residuals_vanish_on_random_instances(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            p1, p2 = rng.uniform(-10, 10, (2, 2))
            if np.linalg.norm(p2 - p1) < 1e-6:
                continue
            true = random_transform(rng)
            v1, v2 = true.apply_points(np.array([p1, p2]))
            t = solve_two_point_transform(Vec2(*p1), Vec2(*p2), Vec2(*v1), Vec2(*v2))
            got = t.apply_points(np.array([p1, p2]))
            assert np.linalg.norm(got - np.array([v1, v2])) < 1e-9


class TestContourMatch:
    def test_self_match(self):
        c = S.star()
        assert contour_match(c, c, eps=1e-9)

    def test_shifted_copy_fails(self):
        c = S.square(2.0)
        eps = 0.02
        shift = 10 * eps * size(c)
        moved = apply_transform(Transform(tx=shift), c)
        assert not contour_match(c, moved, eps=eps)

    def test_jittered_square_within_tolerance(self):
        rng = np.random.default_rng(11)
        c = S.square(2.0)
        jitter = 0.01 * rng.uniform(-1, 1, size=c.array.shape)
        noisy = apply_transform(Transform.identity(), c)
        noisy = type(c)(c.array + jitter)
        dist = boundary_distance(c, noisy)
        assert dist <= 0.05 * size(c)
        assert contour_match(c, noisy, eps=0.05)

    def test_transformed_copy_matches_exactly(self):
        c = S.blob(6)
        t = random_transform(np.random.default_rng(12))
        moved = apply_transform(t, c)
        back = apply_transform(t.invert(), moved)
        assert boundary_distance(c, back) < 1e-9


class TestRecognizeExact:
    def test_identity_on_prototypical_image(self, shape_library):
        rng = np.random.default_rng(13)
        for n in (1, 2, 4):
            d = random_description(rng, shape_library, n, f"d{n}")
            match = recognize_exact(d, prototypical_image(d))
            assert match is not None
            assert match.mapping == tuple(range(n))
            assert match.transform.s == pytest.approx(1.0, abs=1e-9)

    def test_extra_disjoint_region_still_matches(self, shape_library):
        rng = np.random.default_rng(14)
        d = random_description(rng, shape_library, 3, "d")
        img = embed_scene(rng, d, distractors=2, shapes=shape_library)
        assert recognize_exact(d, img) is not None

    def test_missing_component_fails(self, shape_library):
        rng = np.random.default_rng(15)
        d = random_description(rng, shape_library, 2, "d")
        img = embed_scene(rng, d, drop=1)
        assert recognize_exact(d, img) is None

    def test_single_component_found_under_transform(self, shape_library):
        rng = np.random.default_rng(16)
        d = random_description(rng, shape_library, 1, "one")
        img = embed_scene(rng, d, distractors=1, shapes=shape_library)
        match = recognize_exact(d, img)
        assert match is not None and match.mapping == (0,)

    def test_anchor_solve_budget(self, shape_library):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(2, 5))
            d = random_description(rng, shape_library, n, "d")
            img = embed_scene(rng, d, distractors=int(rng.integers(0, 3)),
                              shapes=shape_library)
            counters = {}
            recognize_exact(d, img, counters=counters)
            m = img.m
            assert counters["transform_solves"] <= m * (m - 1)

    def test_transform_invariance_of_recognition(self, shape_library):
        rng = np.random.default_rng(18)
        for _ in range(5):
            d = random_description(rng, shape_library, 3, "d")
            base = embed_scene(rng, d, transform=Transform.identity())
            extra = random_transform(rng)
            moved = SegmentedImage(
                "moved",
                tuple(
                    build_region(apply_transform(extra, r.contour), r.color, r.texture)
                    for r in base.regions
                ),
            )
            assert (recognize_exact(d, base) is None) == (recognize_exact(d, moved) is None)

    def test_deterministic_result(self, shape_library):
        rng = np.random.default_rng(19)
        d = random_description(rng, shape_library, 3, "d")
        img = embed_scene(rng, d, distractors=2, shapes=shape_library)
        first = recognize_exact(d, img)
        second = recognize_exact(d, img)
        assert first == second

    def test_complexity_smoke(self, shape_library):
        # Work per call stays within the quadratic anchor budget: at most
        # m*(m-1) solves, with contour comparisons bounded by a small
        # multiple of m^2 * n thanks to the centroid prefilter.
        rng = np.random.default_rng(25)
        for n, distractors in ((2, 2), (3, 4), (4, 6)):
            d = random_description(rng, shape_library, n, f"c{n}")
            img = embed_scene(rng, d, distractors=distractors, shapes=shape_library)
            counters = {}
            assert recognize_exact(d, img, counters=counters) is not None
            m = img.m
            assert counters["transform_solves"] <= m * (m - 1)
            assert counters.get("contour_checks", 0) <= 3 * m * m * n


class TestSubsumption:
    def test_reflexive(self, shape_library):
        rng = np.random.default_rng(20)
        d = random_description(rng, shape_library, 2, "d")
        assert subsumes(d, d)

    def test_parent_subsumes_refinement_not_conversely(self, shape_library):
        rng = np.random.default_rng(21)
        c = random_description(rng, shape_library, 2, "c")
        extra = make_component(shape_library["star"], 40.0, 40.0, s=1.0)
        refined = CompositeDescription("refined", c.components + (extra,))
        assert subsumes(c, refined)
        assert not subsumes(refined, c)

    def test_transitive_along_refinement_chain(self, shape_library):
        rng = np.random.default_rng(22)
        c0 = random_description(rng, shape_library, 2, "c0")
        c1 = CompositeDescription(
            "c1", c0.components + (make_component(shape_library["triangle"], 40.0, 0.0),)
        )
        c2 = CompositeDescription(
            "c2", c1.components + (make_component(shape_library["circle"], 40.0, 40.0),)
        )
        assert subsumes(c0, c1) and subsumes(c1, c2) and subsumes(c0, c2)


class TestOracleAgreement:
    def test_oracle_limits(self, shape_library):
        rng = np.random.default_rng(23)
        d = random_description(rng, shape_library, 2, "d")
        big = embed_scene(rng, d, distractors=5, shapes=shape_library)
        with pytest.raises(ValueError):
            recognize_exact_oracle(d, big)

    def test_engine_matches_oracle_on_mixed_cases(self, shape_library):
        rng = np.random.default_rng(24)
        for case in range(60):
            n = int(rng.integers(1, 5))
            d = random_description(rng, shape_library, n, f"d{case}")
            kind = case % 3
            if kind == 0:
                img = embed_scene(rng, d, distractors=int(rng.integers(0, 2)),
                                  shapes=shape_library)
            elif kind == 1 and n > 1:
                img = embed_scene(rng, d, drop=int(rng.integers(n)), distractors=1,
                                  shapes=shape_library)
            else:
                other = random_description(rng, shape_library, max(1, n - 1), "other")
                img = embed_scene(rng, other, distractors=1, shapes=shape_library)
            engine = recognize_exact(d, img)
            oracle = recognize_exact_oracle(d, img)
            assert (engine is None) == (oracle is None)
