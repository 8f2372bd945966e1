"""Exact recognition of composite descriptions in segmented images.

A description is recognized when one global similarity transform maps every
component contour onto a distinct region contour. The transform is pinned
down by two centroid correspondences, so at most m*(m-1) candidate transforms
exist for an image with m regions; each is verified by contour comparison.
Subsumption between descriptions reduces to recognition in the prototypical
image of the subsumee.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Optional

import numpy as np

from .errors import GeometryError
from .features import fourier_descriptor, orientation_info, shape_similarity
from .geometry import (
    CompositeDescription,
    Contour,
    SegmentedImage,
    Transform,
    Vec2,
    apply_transform,
    prototypical_image,
    resample_closed,
    size,
)

DEFAULT_EPS = 0.02
FOURIER_PREFILTER = 0.98

# Boundary samples for contour comparison; the candidate side is sampled at
# ALIGN_FACTOR times the density so cyclic alignment resolves to a fraction
# of an arc step.
MATCH_SAMPLES = 128
ALIGN_FACTOR = 4

# Centroid prefilter slack relative to the contour-match tolerance.
CENTROID_SLACK = 3.0

ORACLE_LIMIT = 6


@dataclass(frozen=True)
class ExactMatch:
    """Injective component -> region mapping plus the global transform."""

    mapping: tuple[int, ...]
    transform: Transform


def solve_two_point_transform(p1: Vec2, p2: Vec2, v1: Vec2, v2: Vec2) -> Transform:
    """The unique similarity transform with t(p1) = v1 and t(p2) = v2."""
    dp = np.array([p2[0] - p1[0], p2[1] - p1[1]])
    dv = np.array([v2[0] - v1[0], v2[1] - v1[1]])
    np_len = float(np.linalg.norm(dp))
    nv_len = float(np.linalg.norm(dv))
    if np_len < 1e-12 or nv_len < 1e-12:
        raise GeometryError("degenerate anchors: coincident source or target points")
    s = nv_len / np_len
    theta = float(np.arctan2(dv[1], dv[0]) - np.arctan2(dp[1], dp[0]))
    c, sn = np.cos(theta), np.sin(theta)
    tx = v1[0] - s * (c * p1[0] - sn * p1[1])
    ty = v1[1] - s * (sn * p1[0] + c * p1[1])
    return Transform(tx=float(tx), ty=float(ty), theta=theta % (2.0 * np.pi), s=s)


def boundary_distance(
    a: Contour, b: Contour, cutoff: Optional[float] = None
) -> float:
    """Mean boundary distance under the best cyclic start alignment.

    The mean pointwise distance can never fall below the distance between
    the boundary-sample means, so when that bound already exceeds `cutoff`
    the expensive alignment scan is skipped and the bound is returned.
    """
    pa = resample_closed(a.array, MATCH_SAMPLES)
    m = MATCH_SAMPLES * ALIGN_FACTOR
    pb = resample_closed(b.array, m)
    za = pa[:, 0] + 1j * pa[:, 1]
    zb = pb[:, 0] + 1j * pb[:, 1]
    # Every alignment compares za against a stride-ALIGN_FACTOR subset of zb,
    # so the smallest |mean difference| over the stride classes bounds the
    # mean pointwise distance from below.
    sub_means = zb.reshape(MATCH_SAMPLES, ALIGN_FACTOR).mean(axis=0)
    lower = float(np.min(np.abs(za.mean() - sub_means)))
    if cutoff is not None and lower > cutoff:
        return lower
    dists = np.abs(za[:, None] - zb[None, :])
    base = ALIGN_FACTOR * np.arange(MATCH_SAMPLES)
    cols = (base[None, :] + np.arange(m)[:, None]) % m
    means = dists[np.arange(MATCH_SAMPLES)[None, :], cols].mean(axis=1)
    return float(means.min())


def contour_match(a: Contour, b: Contour, eps: float = DEFAULT_EPS) -> bool:
    """True iff the aligned mean boundary distance is within eps * size(a)."""
    threshold = eps * size(a)
    return boundary_distance(a, b, cutoff=threshold) <= threshold


def _anchor_components(c: CompositeDescription) -> tuple[int, int]:
    """First component pair with distinct centroids, preferring (0, 1)."""
    cents = [comp.posed_centroid() for comp in c.components]
    scale = max(max(abs(v.x), abs(v.y)) for v in cents) + 1.0
    tol = 1e-9 * scale
    for i in range(len(cents)):
        for j in range(i + 1, len(cents)):
            if np.hypot(cents[i].x - cents[j].x, cents[i].y - cents[j].y) > tol:
                return i, j
    raise GeometryError("all component centroids coincide; no anchor pair")


def _recognize_single(
    comp_contour: Contour,
    comp_size: float,
    comp_centroid: Vec2,
    comp_desc,
    img: SegmentedImage,
    eps: float,
    fourier_threshold: float,
) -> Optional[ExactMatch]:
    """Pose-invariant search for a one-component description."""
    for j, region in enumerate(img.regions):
        if shape_similarity(comp_desc, region.descriptor) < fourier_threshold:
            continue
        s = region.size / comp_size
        info = orientation_info(region.descriptor, comp_desc)
        phases = info.phases if not info.is_circularly_symmetric else (0.0,)
        for theta in phases:
            cth, sth = np.cos(theta), np.sin(theta)
            tx = region.centroid.x - s * (cth * comp_centroid.x - sth * comp_centroid.y)
            ty = region.centroid.y - s * (sth * comp_centroid.x + cth * comp_centroid.y)
            t = Transform(tx=float(tx), ty=float(ty), theta=float(theta) % (2 * np.pi), s=s)
            if contour_match(apply_transform(t, comp_contour), region.contour, eps):
                return ExactMatch(mapping=(j,), transform=t)
    return None


def recognize_exact(
    c: CompositeDescription,
    img: SegmentedImage,
    eps: float = DEFAULT_EPS,
    fourier_threshold: float = FOURIER_PREFILTER,
    counters: Optional[dict] = None,
) -> Optional[ExactMatch]:
    """Find a transform and injective mapping placing every component onto a
    distinct region, or None.

    Candidate transforms come from mapping the two anchor components onto
    every ordered pair of region centroids; transformed component centroids
    are then matched to region centroids before the costlier contour checks.
    """
    n, m = c.n, img.m
    if counters is not None:
        counters.setdefault("transform_solves", 0)
    if n > m:
        return None

    contours = [comp.posed_contour() for comp in c.components]
    centroids = [comp.posed_centroid() for comp in c.components]
    sizes = [size(k) for k in contours]

    if n == 1:
        return _recognize_single(
            contours[0],
            sizes[0],
            centroids[0],
            fourier_descriptor(contours[0]),
            img,
            eps,
            fourier_threshold,
        )

    a1, a2 = _anchor_components(c)
    region_centroids = np.array([(r.centroid.x, r.centroid.y) for r in img.regions])
    comp_pts = np.array([(v.x, v.y) for v in centroids])

    for i in range(m):
        for h in range(m):
            if i == h:
                continue
            if counters is not None:
                counters["transform_solves"] += 1
            try:
                t = solve_two_point_transform(
                    centroids[a1],
                    centroids[a2],
                    img.regions[i].centroid,
                    img.regions[h].centroid,
                )
            except GeometryError:
                continue

            targets = t.apply_points(comp_pts)
            candidates: list[list[int]] = []
            feasible = True
            for k in range(n):
                if k == a1:
                    candidates.append([i])
                    continue
                if k == a2:
                    candidates.append([h])
                    continue
                tol = CENTROID_SLACK * eps * t.s * sizes[k]
                near = np.nonzero(
                    np.linalg.norm(region_centroids - targets[k], axis=1) <= tol
                )[0]
                if len(near) == 0:
                    feasible = False
                    break
                candidates.append(list(near))
            if not feasible:
                continue

            verified: dict[tuple[int, int], bool] = {}

            def check(k: int, j: int) -> bool:
                key = (k, j)
                if key not in verified:
                    if counters is not None:
                        counters["contour_checks"] = counters.get("contour_checks", 0) + 1
                    verified[key] = contour_match(
                        apply_transform(t, contours[k]), img.regions[j].contour, eps
                    )
                return verified[key]

            order = sorted(range(n), key=lambda k: len(candidates[k]))
            assignment: dict[int, int] = {}

            def assign(pos: int) -> bool:
                if pos == n:
                    return True
                k = order[pos]
                for j in candidates[k]:
                    if j in assignment.values():
                        continue
                    if check(k, j):
                        assignment[k] = j
                        if assign(pos + 1):
                            return True
                        del assignment[k]
                return False

            if assign(0):
                return ExactMatch(
                    mapping=tuple(assignment[k] for k in range(n)), transform=t
                )
    return None


def subsumes(
    c: CompositeDescription, d: CompositeDescription, eps: float = DEFAULT_EPS
) -> bool:
    """True iff c is recognized in the prototypical image of d."""
    proto = prototypical_image(d)  # raises for unsatisfiable d
    return recognize_exact(c, proto, eps) is not None


def _procrustes_rotation_distance(pa: np.ndarray, pb: np.ndarray) -> float:
    """Min over cyclic shifts and rotations of the mean point distance.

    Both inputs are centered resampled boundaries; the optimal rotation per
    shift is the closed-form least-squares (complex Procrustes) solution.
    """
    za = pa[:, 0] + 1j * pa[:, 1]
    zb = pb[:, 0] + 1j * pb[:, 1]
    n = len(za)
    best = np.inf
    for k in range(n):
        shifted = np.roll(za, -k)
        corr = np.vdot(zb, shifted)  # sum(shifted * conj(zb))
        if abs(corr) < 1e-30:
            continue
        rot = corr / abs(corr)
        dist = float(np.mean(np.abs(shifted - rot * zb)))
        if dist < best:
            best = dist
    return best


def recognize_exact_oracle(
    c: CompositeDescription,
    img: SegmentedImage,
    eps: float = DEFAULT_EPS,
) -> Optional[ExactMatch]:
    """Exhaustive reference implementation for small instances.

    Enumerates every injective mapping and, per mapping, every ordered pair
    of component anchors; single-component descriptions use a cyclic-shift
    Procrustes search instead of descriptor phases.
    """
    n, m = c.n, img.m
    if n > ORACLE_LIMIT or m > ORACLE_LIMIT:
        raise ValueError(f"oracle limited to {ORACLE_LIMIT} components/regions")
    if n > m:
        return None

    contours = [comp.posed_contour() for comp in c.components]
    centroids = [comp.posed_centroid() for comp in c.components]

    if n == 1:
        comp_size = size(contours[0])
        pa = resample_closed(contours[0].array, 128)
        pa = pa - pa.mean(axis=0)
        for j, region in enumerate(img.regions):
            s = region.size / comp_size
            pb = resample_closed(region.contour.array, 128)
            pb = (pb - pb.mean(axis=0)) / s
            if _procrustes_rotation_distance(pb, pa) <= eps * comp_size:
                # Recover the full transform for the reported match.
                theta_best, best = 0.0, np.inf
                za = pa[:, 0] + 1j * pa[:, 1]
                zb = pb[:, 0] + 1j * pb[:, 1]
                for k in range(len(za)):
                    shifted = np.roll(zb, -k)
                    corr = np.vdot(za, shifted)
                    if abs(corr) < 1e-30:
                        continue
                    rot = corr / abs(corr)
                    d = float(np.mean(np.abs(shifted - rot * za)))
                    if d < best:
                        best, theta_best = d, float(np.angle(rot))
                cth, sth = np.cos(theta_best), np.sin(theta_best)
                p = centroids[0]
                tx = region.centroid.x - s * (cth * p.x - sth * p.y)
                ty = region.centroid.y - s * (sth * p.x + cth * p.y)
                return ExactMatch(
                    mapping=(j,),
                    transform=Transform(tx, ty, theta_best % (2 * np.pi), s),
                )
        return None

    for mapping in permutations(range(m), n):
        for k1 in range(n):
            for k2 in range(n):
                if k1 == k2:
                    continue
                try:
                    t = solve_two_point_transform(
                        centroids[k1],
                        centroids[k2],
                        img.regions[mapping[k1]].centroid,
                        img.regions[mapping[k2]].centroid,
                    )
                except GeometryError:
                    continue
                if all(
                    contour_match(
                        apply_transform(t, contours[k]),
                        img.regions[mapping[k]].contour,
                        eps,
                    )
                    for k in range(n)
                ):
                    return ExactMatch(mapping=tuple(mapping), transform=t)
    return None
