"""Approximate recognition: weighted six-feature similarity scoring.

A candidate component-to-region mapping is scored by six feature-group
similarities (spatial arrangement, shape, color, rotation, scale, texture).
Pose groups measure how far the mapped regions are from *some* rigid
arrangement of the components: angle differences seen from each centroid,
rotation-phase differences against reference vectors, and size/distance
ratio gaps. Every group takes its worst value over the mapped components,
which is what makes scores monotone under query refinement.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .config import SensitivityConfig, Weights
from .features import (
    FourierDescriptor,
    OrientationInfo,
    distance_to_similarity,
    fourier_descriptor,
    orientation_info,
    shape_similarity,
)
from .geometry import BasicShape, CompositeDescription, SegmentedImage

MAPPING_CAP = 10_000
RELAXED_CANDIDATES = 3

FEATURE_ORDER = ("spatial", "shape", "color", "rotation", "scale", "texture")

_COINCIDENT_TOL = 1e-9


@dataclass(frozen=True)
class MatchResult:
    """Scored injective component -> region mapping."""

    mapping: tuple[int, ...]
    score: float
    breakdown: dict[str, float]
    deltas: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "mapping": list(self.mapping),
            "score": self.score,
            "breakdown": dict(self.breakdown),
            "deltas": dict(self.deltas),
        }


@lru_cache(maxsize=512)
def _shape_descriptor(shape: BasicShape) -> FourierDescriptor:
    return fourier_descriptor(shape.contour)


def _circular_diff(a: float, b: float) -> float:
    """Circular distance between two angles, in [0, pi] radians."""
    d = abs(a - b) % (2.0 * np.pi)
    return min(d, 2.0 * np.pi - d)


class _MatchContext:
    """Per (description, image) feature cache shared by all mappings."""

    def __init__(
        self,
        c: CompositeDescription,
        img: SegmentedImage,
        cfg: SensitivityConfig,
    ):
        self.c = c
        self.img = img
        self.cfg = cfg
        self.n = c.n
        self.m = img.m
        self.comp_pts = np.array([comp.posed_centroid() for comp in c.components])
        self.comp_sizes = np.array(
            [comp.transform.s * _shape_size(comp.shape) for comp in c.components]
        )
        self.comp_h_angles = [comp.transform.theta for comp in c.components]
        self.comp_colors = [comp.color.as_array() for comp in c.components]
        self.comp_textures = [comp.texture.values for comp in c.components]
        self.reg_pts = np.array([(r.centroid.x, r.centroid.y) for r in img.regions])
        self.reg_sizes = np.array([r.size for r in img.regions])
        self._scale = float(
            np.max(np.abs(np.vstack([self.comp_pts, self.reg_pts]))) + 1.0
        )

        if cfg.texture_stds is not None:
            stds = np.asarray(cfg.texture_stds, dtype=float)
        else:
            stds = np.std(np.array([r.texture.values for r in img.regions]), axis=0)
        self.texture_stds = np.where(stds > 1e-12, stds, 1.0)

        # (component, region) similarity matrix used for candidate selection
        # and the shape feature group.
        self.sim_ss = np.array(
            [
                [
                    shape_similarity(_shape_descriptor(comp.shape), r.descriptor)
                    for r in img.regions
                ]
                for comp in c.components
            ]
        )
        self._orientation: dict[tuple[int, int], OrientationInfo] = {}

    def orientation(self, k: int, j: int) -> OrientationInfo:
        key = (k, j)
        if key not in self._orientation:
            self._orientation[key] = orientation_info(
                self.img.regions[j].descriptor,
                _shape_descriptor(self.c.components[k].shape),
                symmetry_maxima_threshold=self.cfg.symmetry_maxima_threshold,
                circular_symmetry_threshold=self.cfg.circular_symmetry_threshold,
            )
        return self._orientation[key]

    # ---- pose difference groups (degrees / dimensionless) ----

    def delta_spatial(self, mapping: Sequence[int]) -> float:
        n = self.n
        if n <= 2:
            return 0.0
        tol = _COINCIDENT_TOL * self._scale
        worst = 0.0
        for k in range(n):
            comp_ang: dict[int, float] = {}
            reg_ang: dict[int, float] = {}
            for i in range(n):
                if i == k:
                    continue
                dc = self.comp_pts[i] - self.comp_pts[k]
                dr = self.reg_pts[mapping[i]] - self.reg_pts[mapping[k]]
                if np.linalg.norm(dc) <= tol or np.linalg.norm(dr) <= tol:
                    continue
                comp_ang[i] = float(np.arctan2(dc[1], dc[0]))
                reg_ang[i] = float(np.arctan2(dr[1], dr[0]))
            valid = sorted(comp_ang)
            comp_worst = 0.0
            for a_idx in range(len(valid)):
                for b_idx in range(a_idx + 1, len(valid)):
                    i, h = valid[a_idx], valid[b_idx]
                    alpha = (comp_ang[h] - comp_ang[i]) % (2.0 * np.pi)
                    beta = (reg_ang[h] - reg_ang[i]) % (2.0 * np.pi)
                    comp_worst = max(comp_worst, _circular_diff(alpha, beta))
            worst = max(worst, comp_worst)
        return float(np.degrees(worst))

    def delta_rotation(self, mapping: Sequence[int]) -> float:
        n = self.n
        if n == 1:
            return 0.0
        tol = _COINCIDENT_TOL * self._scale
        worst = 0.0
        for k in range(n):
            info = self.orientation(k, mapping[k])
            if info.is_circularly_symmetric:
                continue
            gammas: dict[int, float] = {}
            reg_dirs: dict[int, float] = {}
            for i in range(n):
                if i == k:
                    continue
                dc = self.comp_pts[i] - self.comp_pts[k]
                dr = self.reg_pts[mapping[i]] - self.reg_pts[mapping[k]]
                if np.linalg.norm(dc) <= tol or np.linalg.norm(dr) <= tol:
                    continue
                gammas[i] = float(np.arctan2(dc[1], dc[0])) - self.comp_h_angles[k]
                reg_dirs[i] = float(np.arctan2(dr[1], dr[0]))
            if not gammas:
                continue
            best = np.inf
            for u in info.phases:
                diff = max(
                    _circular_diff(gammas[i], reg_dirs[i] - u) for i in gammas
                )
                best = min(best, diff)
            worst = max(worst, best)
        return float(np.degrees(worst))

    def delta_scale(self, mapping: Sequence[int]) -> float:
        n = self.n
        if n == 1:
            return 0.0
        tol = _COINCIDENT_TOL * self._scale
        worst = 0.0
        for k in range(n):
            comp_worst = 0.0
            for i in range(n):
                if i == k:
                    continue
                d = float(np.linalg.norm(self.comp_pts[i] - self.comp_pts[k]))
                dd = float(
                    np.linalg.norm(self.reg_pts[mapping[i]] - self.reg_pts[mapping[k]])
                )
                if d <= tol or dd <= tol:
                    continue
                ratio_c = self.comp_sizes[k] / d
                ratio_r = self.reg_sizes[mapping[k]] / dd
                lo, hi = min(ratio_c, ratio_r), max(ratio_c, ratio_r)
                comp_worst = max(comp_worst, abs(1.0 - lo / hi))
            worst = max(worst, comp_worst)
        return float(worst)

    # ---- feature groups ----

    def group_sims(self, mapping: Sequence[int]) -> tuple[dict[str, float], dict[str, float]]:
        cfg = self.cfg
        deltas = {
            "spatial": self.delta_spatial(mapping),
            "rotation": self.delta_rotation(mapping),
            "scale": self.delta_scale(mapping),
            "shape": max(
                max(0.0, 1.0 - self.sim_ss[k, mapping[k]]) for k in range(self.n)
            ),
            "color": max(
                float(
                    np.linalg.norm(
                        self.comp_colors[k]
                        - self.img.regions[mapping[k]].color.as_array()
                    )
                )
                for k in range(self.n)
            ),
            "texture": max(
                float(
                    np.mean(
                        np.abs(
                            self.comp_textures[k]
                            - self.img.regions[mapping[k]].texture.values
                        )
                        / self.texture_stds
                    )
                )
                for k in range(self.n)
            ),
        }
        sims = {
            name: distance_to_similarity(deltas[name], cfg.fx(name), cfg.fy(name))
            for name in FEATURE_ORDER
        }
        return sims, deltas

    def score(self, mapping: Sequence[int], weights: Weights) -> MatchResult:
        sims, deltas = self.group_sims(mapping)
        w = weights.as_dict()
        total = sum(w[name] * sims[name] for name in FEATURE_ORDER)
        return MatchResult(
            mapping=tuple(mapping), score=float(total), breakdown=sims, deltas=deltas
        )


def _shape_size(shape: BasicShape) -> float:
    return _shape_size_cached(shape)


@lru_cache(maxsize=512)
def _shape_size_cached(shape: BasicShape) -> float:
    from .geometry import size

    return size(shape.contour)


def _candidate_sets(ctx: _MatchContext) -> list[list[int]]:
    cfg = ctx.cfg
    sets = []
    for k in range(ctx.n):
        sims = ctx.sim_ss[k]
        strict = [j for j in range(ctx.m) if sims[j] >= cfg.fourier_descriptors_threshold]
        if not strict:
            take = max(1, min(RELAXED_CANDIDATES, ctx.m))
            order = sorted(range(ctx.m), key=lambda j: (-sims[j], j))[:take]
            strict = sorted(order)
        sets.append(strict)
    return sets


def _enumerate_injective(sets: list[list[int]], cap: int) -> list[tuple[int, ...]]:
    """All injective assignments in lexicographic order, stopping at cap."""
    out: list[tuple[int, ...]] = []
    used: set[int] = set()
    pick: list[int] = []

    def rec(k: int) -> bool:
        if len(out) >= cap:
            return False
        if k == len(sets):
            out.append(tuple(pick))
            return len(out) < cap
        for j in sets[k]:
            if j in used:
                continue
            used.add(j)
            pick.append(j)
            more = rec(k + 1)
            pick.pop()
            used.discard(j)
            if not more:
                return False
        return True

    rec(0)
    return out


def candidate_mappings(
    c: CompositeDescription,
    img: SegmentedImage,
    cfg: Optional[SensitivityConfig] = None,
) -> list[tuple[int, ...]]:
    """Injective component -> region assignments worth scoring.

    Per-component candidates are the regions above the descriptor-similarity
    threshold, falling back to the best three regions when none qualifies.
    At most MAPPING_CAP assignments are produced, in lexicographic order.
    """
    cfg = cfg or SensitivityConfig()
    if c.n > img.m:
        return []
    ctx = _MatchContext(c, img, cfg)
    return _enumerate_injective(_candidate_sets(ctx), MAPPING_CAP)


def delta_spatial(c, img, mapping, cfg: Optional[SensitivityConfig] = None) -> float:
    """Worst angular arrangement difference over components, in degrees."""
    return _MatchContext(c, img, cfg or SensitivityConfig()).delta_spatial(mapping)


def delta_rotation(c, img, mapping, cfg: Optional[SensitivityConfig] = None) -> float:
    """Worst reference-vector rotation difference over components, degrees."""
    return _MatchContext(c, img, cfg or SensitivityConfig()).delta_rotation(mapping)


def delta_scale(c, img, mapping, cfg: Optional[SensitivityConfig] = None) -> float:
    """Worst size/distance ratio gap over components, dimensionless."""
    return _MatchContext(c, img, cfg or SensitivityConfig()).delta_scale(mapping)


def group_feature_sims(
    c, img, mapping, cfg: Optional[SensitivityConfig] = None
) -> dict[str, float]:
    """The six worst-of-group feature similarities for one mapping."""
    sims, _ = _MatchContext(c, img, cfg or SensitivityConfig()).group_sims(mapping)
    return sims


def score_mapping(
    c,
    img,
    mapping,
    weights: Optional[Weights] = None,
    cfg: Optional[SensitivityConfig] = None,
) -> MatchResult:
    """Weighted sum of the six group similarities for one mapping."""
    ctx = _MatchContext(c, img, cfg or SensitivityConfig())
    return ctx.score(mapping, weights or Weights())


def recognize_approx(
    c: CompositeDescription,
    img: SegmentedImage,
    weights: Optional[Weights] = None,
    cfg: Optional[SensitivityConfig] = None,
) -> Optional[MatchResult]:
    """Best-scoring candidate mapping, or None below the global threshold.

    Ties keep the lexicographically smallest mapping. Mappings whose spatial
    similarity falls below the spatial threshold are skipped early, but only
    when that alone already caps their score below the global threshold.
    """
    weights = weights or Weights()
    cfg = cfg or SensitivityConfig()
    if c.n > img.m:
        return None
    ctx = _MatchContext(c, img, cfg)
    mappings = _enumerate_injective(_candidate_sets(ctx), MAPPING_CAP)
    if not mappings:
        return None

    best: Optional[MatchResult] = None
    w_spatial = weights.spatial
    for mapping in mappings:
        d_sp = ctx.delta_spatial(mapping)
        phi_sp = distance_to_similarity(d_sp, cfg.fx("spatial"), cfg.fy("spatial"))
        if (
            phi_sp < cfg.spatial_similarity_threshold
            and w_spatial * phi_sp + (1.0 - w_spatial) < cfg.global_similarity_threshold
        ):
            continue
        result = ctx.score(mapping, weights)
        if best is None or result.score > best.score:
            best = result
    if best is None or best.score < cfg.global_similarity_threshold:
        return None
    return best


def retrieve(
    c: CompositeDescription,
    images: Sequence[SegmentedImage],
    weights: Optional[Weights] = None,
    cfg: Optional[SensitivityConfig] = None,
) -> list[tuple[str, MatchResult]]:
    """Rank images by their best mapping score, best first.

    Only images at or above the global similarity threshold are returned;
    ties are broken by image id.
    """
    results = []
    for img in images:
        match = recognize_approx(c, img, weights, cfg)
        if match is not None:
            results.append((img.id, match))
    results.sort(key=lambda pair: (-pair[1].score, pair[0]))
    return results
