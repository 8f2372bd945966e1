"""Core domain model: contours, similarity transforms, shape descriptions, regions.

All types are immutable after construction and safe to share across threads.
Angles are radians, coordinates are image-plane pixels, scale is dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from shapely.geometry import Polygon

from .errors import GeometryError, UnsatisfiableDescriptionError

# Interior overlap below this fraction of the smaller polygon's area counts
# as tangency, not overlap.
OVERLAP_REL_TOL = 1e-9

# Number of boundary samples used when computing a contour's size.
SIZE_SAMPLES = 256


class Vec2(NamedTuple):
    x: float
    y: float


class ColorRGB(NamedTuple):
    """RGB color with channels in [0, 255]."""

    r: float
    g: float
    b: float

    @staticmethod
    def of(values: Sequence[float]) -> "ColorRGB":
        r, g, b = (float(v) for v in values)
        for v in (r, g, b):
            if not (0.0 <= v <= 255.0) or not np.isfinite(v):
                raise GeometryError(f"color channel out of range: {values}")
        return ColorRGB(r, g, b)

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


TEXTURE_DIM = 24


class TextureVec:
    """Fixed 24-component texture feature vector."""

    __slots__ = ("_values",)

    def __init__(self, values: Sequence[float]):
        arr = np.asarray(values, dtype=float)
        if arr.shape != (TEXTURE_DIM,):
            raise GeometryError(
                f"texture vector must have {TEXTURE_DIM} components, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise GeometryError("texture vector has non-finite components")
        arr.setflags(write=False)
        self._values = arr

    @staticmethod
    def zeros() -> "TextureVec":
        return TextureVec(np.zeros(TEXTURE_DIM))

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __eq__(self, other) -> bool:
        return isinstance(other, TextureVec) and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash(self._values.tobytes())

    def __repr__(self):
        return f"TextureVec({self._values.tolist()!r})"


@dataclass(frozen=True)
class Transform:
    """Similarity transform: p -> s * R(theta) * p + (tx, ty).

    Forms a group under composition; rotation is counter-clockwise.
    """

    tx: float = 0.0
    ty: float = 0.0
    theta: float = 0.0
    s: float = 1.0

    def __post_init__(self):
        if not (self.s > 0.0) or not np.isfinite(self.s):
            raise GeometryError(f"transform scale must be positive, got {self.s}")
        for v in (self.tx, self.ty, self.theta):
            if not np.isfinite(v):
                raise GeometryError("transform has non-finite parameters")

    @staticmethod
    def identity() -> "Transform":
        return Transform()

    def rotation_matrix(self) -> np.ndarray:
        c, s = np.cos(self.theta), np.sin(self.theta)
        return np.array([[c, -s], [s, c]])

    def apply_points(self, pts: np.ndarray) -> np.ndarray:
        """Apply to an (N, 2) array of points."""
        rot = self.rotation_matrix()
        return self.s * pts @ rot.T + np.array([self.tx, self.ty])

    def apply_point(self, p: Sequence[float]) -> Vec2:
        out = self.apply_points(np.asarray(p, dtype=float).reshape(1, 2))[0]
        return Vec2(float(out[0]), float(out[1]))

    def invert(self) -> "Transform":
        inv_s = 1.0 / self.s
        c, s = np.cos(-self.theta), np.sin(-self.theta)
        tx = -inv_s * (c * self.tx - s * self.ty)
        ty = -inv_s * (s * self.tx + c * self.ty)
        return Transform(tx=tx, ty=ty, theta=-self.theta, s=inv_s)


def compose(outer: Transform, inner: Transform) -> Transform:
    """Composition such that apply(compose(a, b), p) == apply(a, apply(b, p))."""
    rot = outer.rotation_matrix()
    t = outer.s * rot @ np.array([inner.tx, inner.ty]) + np.array([outer.tx, outer.ty])
    return Transform(
        tx=float(t[0]),
        ty=float(t[1]),
        theta=float(np.mod(outer.theta + inner.theta, 2.0 * np.pi)),
        s=outer.s * inner.s,
    )


def _signed_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


class Contour:
    """Closed, non-self-intersecting polyline.

    Normalized on construction: counter-clockwise traversal, starting at the
    vertex with lowest y (ties broken by lowest x). The last point implicitly
    connects back to the first.
    """

    __slots__ = ("_pts",)

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise GeometryError(f"contour points must be (N, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise GeometryError("contour has non-finite coordinates")
        # Drop an explicit closing point and consecutive duplicates.
        if len(pts) > 1 and np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(np.abs(np.diff(pts, axis=0)) > 1e-12, axis=1)
        pts = pts[keep]
        if len(pts) < 3:
            raise GeometryError("contour needs at least 3 distinct points")
        poly = Polygon(pts)
        if not poly.is_valid or poly.area <= 0.0:
            raise GeometryError("contour is self-intersecting or degenerate")
        if _signed_area(pts) < 0.0:
            pts = pts[::-1]
        start = int(np.lexsort((pts[:, 0], pts[:, 1]))[0])
        pts = np.roll(pts, -start, axis=0)
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        self._pts = pts

    @property
    def array(self) -> np.ndarray:
        """(N, 2) read-only vertex array."""
        return self._pts

    @property
    def points(self) -> list[Vec2]:
        return [Vec2(float(x), float(y)) for x, y in self._pts]

    def __len__(self) -> int:
        return len(self._pts)

    def polygon(self) -> Polygon:
        return Polygon(self._pts)

    def area(self) -> float:
        return _signed_area(self._pts)

    def __eq__(self, other) -> bool:
        return isinstance(other, Contour) and np.array_equal(self._pts, other._pts)

    def __hash__(self):
        return hash(self._pts.tobytes())

    def __repr__(self):
        return f"Contour({len(self._pts)} points)"


def apply_transform(t: Transform, c: Contour) -> Contour:
    """Pointwise transform of a whole contour."""
    return Contour(t.apply_points(c.array))


def centroid(c: Contour) -> Vec2:
    """Area centroid of the enclosed polygon (first-order moments over area)."""
    pts = c.array
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * float(np.sum(cross))
    if abs(area) < 1e-12:
        raise GeometryError("degenerate contour: zero area")
    cx = float(np.sum((x + xn) * cross) / (6.0 * area))
    cy = float(np.sum((y + yn) * cross) / (6.0 * area))
    return Vec2(cx, cy)


def arc_lengths(pts: np.ndarray) -> np.ndarray:
    """Cumulative arc length over the closed polyline, length N + 1."""
    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def resample_closed(pts: np.ndarray, n: int) -> np.ndarray:
    """n points equally spaced by arc length along the closed polyline."""
    cum = arc_lengths(pts)
    total = cum[-1]
    if total <= 0.0:
        raise GeometryError("degenerate contour: zero perimeter")
    targets = np.arange(n) * (total / n)
    closed = np.vstack([pts, pts[:1]])
    xs = np.interp(targets, cum, closed[:, 0])
    ys = np.interp(targets, cum, closed[:, 1])
    return np.column_stack([xs, ys])


def size(c: Contour) -> float:
    """Mean distance from the centroid to uniformly resampled boundary points."""
    cen = np.array(centroid(c))
    samples = resample_closed(c.array, SIZE_SAMPLES)
    return float(np.mean(np.linalg.norm(samples - cen, axis=1)))


@dataclass(frozen=True)
class BasicShape:
    """Named closed contour with its centroid at the origin.

    The contour is re-centered on construction, so callers may pass any pose.
    """

    id: str
    contour: Contour

    CENTERING_TOL = 1e-6

    def __post_init__(self):
        cen = centroid(self.contour)
        if np.hypot(cen.x, cen.y) > self.CENTERING_TOL * size(self.contour):
            recentered = Contour(self.contour.array - np.array(cen))
            object.__setattr__(self, "contour", recentered)


@dataclass(frozen=True)
class ShapeComponent:
    """One posed, colored, textured basic shape inside a composite description."""

    color: ColorRGB
    texture: TextureVec
    transform: Transform
    shape: BasicShape

    def posed_contour(self) -> Contour:
        return apply_transform(self.transform, self.shape.contour)

    def posed_centroid(self) -> Vec2:
        # Basic shapes are centered at the origin, so the posed centroid is
        # exactly the transform's translation.
        return Vec2(self.transform.tx, self.transform.ty)


@dataclass(frozen=True)
class CompositeDescription:
    """Conjunction of shape components; the query / index unit."""

    id: str
    components: tuple[ShapeComponent, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 1:
            raise GeometryError("description needs at least one component")
        object.__setattr__(self, "components", comps)

    @property
    def n(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class Region:
    """Segmented image region with its feature cache.

    Cached features are computed once at construction (see
    features.build_region) and never mutated afterwards.
    """

    contour: Contour
    color: ColorRGB
    texture: TextureVec
    centroid: Vec2
    size: float
    descriptor: object = field(repr=False)  # features.FourierDescriptor


@dataclass(frozen=True)
class SegmentedImage:
    """A set of pairwise-disjoint regions."""

    id: str
    regions: tuple[Region, ...]
    source: Optional[str] = None

    def __post_init__(self):
        regions = tuple(self.regions)
        if len(regions) < 1:
            raise GeometryError("segmented image needs at least one region")
        bad = _first_overlapping_pair(
            [r.contour for r in regions], allow_containment=True
        )
        if bad is not None:
            i, j = bad
            raise GeometryError(f"regions {i} and {j} have overlapping interiors")
        object.__setattr__(self, "regions", regions)

    @property
    def m(self) -> int:
        return len(self.regions)


def _first_overlapping_pair(
    contours: Sequence[Contour], allow_containment: bool = False
) -> Optional[tuple[int, int]]:
    """First pair of contours whose interiors illegally intersect.

    With allow_containment, strict nesting is tolerated: regions keep only
    their outer contours, so a region sitting in another region's hole has a
    contour fully inside the outer one.
    """
    polys = [c.polygon() for c in contours]
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            small = min(polys[i].area, polys[j].area)
            large = max(polys[i].area, polys[j].area)
            inter = polys[i].intersection(polys[j]).area
            if inter <= OVERLAP_REL_TOL * small:
                continue
            nested = inter >= (1.0 - 1e-9) * small and small < (1.0 - 1e-9) * large
            if allow_containment and nested:
                continue
            return (i, j)
    return None


def is_satisfiable(d: CompositeDescription) -> bool:
    """True iff no pair of posed component contours overlaps in the interior.

    Shared boundary points (tangency) are permitted.
    """
    contours = [comp.posed_contour() for comp in d.components]
    return _first_overlapping_pair(contours) is None


def prototypical_image(d: CompositeDescription) -> SegmentedImage:
    """Image with one region per component, each posed by its transform."""
    if not is_satisfiable(d):
        raise UnsatisfiableDescriptionError(
            f"description {d.id!r} has overlapping components"
        )
    from .features import build_region

    regions = tuple(
        build_region(comp.posed_contour(), comp.color, comp.texture)
        for comp in d.components
    )
    return SegmentedImage(id=f"proto:{d.id}", regions=regions, source="prototype")
