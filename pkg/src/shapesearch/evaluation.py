"""Retrieval evaluation: judge-ranking merge, normalized rank agreement,
and the synthetic end-to-end experiment runner.

Rankings are ordered tiers of image ids (tier 1 best); images outside every
tier are unranked. The agreement score between a system ranking and a user
ranking counts concordant and inverted preference pairs, mapping to 1 for
full agreement and 0 for full reversal.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .approx import MatchResult, retrieve
from .config import SensitivityConfig, Weights
from .errors import EvaluationError
from .features import snap_color
from .geometry import (
    CompositeDescription,
    SegmentedImage,
    ShapeComponent,
    TextureVec,
    Transform,
    apply_transform,
    prototypical_image,
)
from .shapes import standard_shapes

SCORE_TIE_EPS = 1e-6


class Ranking:
    """Ordered tiers of image ids; tier 1 is best, unranked ids are implicit."""

    __slots__ = ("tiers",)

    def __init__(self, tiers: Sequence[Sequence[str]]):
        cleaned: list[frozenset[str]] = []
        seen: set[str] = set()
        for tier in tiers:
            ids = frozenset(str(i) for i in tier)
            if not ids:
                continue
            if ids & seen:
                dup = sorted(ids & seen)[0]
                raise EvaluationError(f"image {dup!r} appears in more than one tier")
            seen |= ids
            cleaned.append(ids)
        self.tiers = tuple(cleaned)

    def tier_of(self, image_id: str) -> Optional[int]:
        """1-based tier, or None when unranked."""
        for idx, tier in enumerate(self.tiers, start=1):
            if image_id in tier:
                return idx
        return None

    def ranked_ids(self) -> set[str]:
        out: set[str] = set()
        for tier in self.tiers:
            out |= tier
        return out

    def reversed(self) -> "Ranking":
        return Ranking([sorted(t) for t in self.tiers[::-1]])

    def to_lists(self) -> list[list[str]]:
        return [sorted(t) for t in self.tiers]

    def __eq__(self, other):
        return isinstance(other, Ranking) and self.tiers == other.tiers

    def __repr__(self):
        return f"Ranking({self.to_lists()!r})"


def merge_user_rankings(rankings: Sequence[Ranking]) -> Ranking:
    """Merge judge rankings: every image keeps its worst tier.

    An image left unranked by any judge is withdrawn from the merge.
    """
    if not rankings:
        raise EvaluationError("need at least one ranking to merge")
    common = set.intersection(*(r.ranked_ids() for r in rankings))
    worst: dict[str, int] = {}
    for image_id in common:
        worst[image_id] = max(r.tier_of(image_id) for r in rankings)
    if not worst:
        return Ranking([])
    tiers: dict[int, list[str]] = {}
    for image_id, tier in worst.items():
        tiers.setdefault(tier, []).append(image_id)
    return Ranking([sorted(tiers[t]) for t in sorted(tiers)])


def rnorm(sys: Ranking, usr: Ranking) -> float:
    """Pair-inversion agreement of a system ranking with a user ranking.

    Counts user strict-preference pairs: concordant system pairs add to S+,
    inverted ones to S-, system ties count in neither. Images the system
    leaves unranked sit below every ranked tier; images the user leaves
    unranked are excluded from pair counting entirely.
    """
    ids = sorted(usr.ranked_ids())

    def sys_key(image_id: str) -> int:
        tier = sys.tier_of(image_id)
        return tier if tier is not None else 10**9

    s_plus = s_minus = s_max = 0
    for a_idx in range(len(ids)):
        for b_idx in range(a_idx + 1, len(ids)):
            a, b = ids[a_idx], ids[b_idx]
            ua, ub = usr.tier_of(a), usr.tier_of(b)
            if ua == ub:
                continue
            if ua > ub:
                a, b = b, a  # user strictly prefers a
            s_max += 1
            ka, kb = sys_key(a), sys_key(b)
            if ka < kb:
                s_plus += 1
            elif ka > kb:
                s_minus += 1
    if s_max == 0:
        raise EvaluationError("user ranking has no strict preference pair")
    return 0.5 * (1.0 + (s_plus - s_minus) / s_max)


def system_ranking(
    results: Sequence[tuple[str, MatchResult]], tie_eps: float = SCORE_TIE_EPS
) -> Ranking:
    """Tiered ranking from retrieval results; near-equal scores share a tier."""
    tiers: list[list[str]] = []
    last_score: Optional[float] = None
    for image_id, match in results:
        if last_score is not None and abs(match.score - last_score) < tie_eps:
            tiers[-1].append(image_id)
        else:
            tiers.append([image_id])
        last_score = match.score
    return Ranking(tiers)


# ---- experiment runner ----


@dataclass(frozen=True)
class QueryOutcome:
    query_id: str
    retrieved: int
    rnorm: float


@dataclass(frozen=True)
class ExperimentReport:
    outcomes: tuple[QueryOutcome, ...]
    mean_rnorm: float
    skipped: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "queries": [
                {"query_id": o.query_id, "retrieved": o.retrieved, "rnorm": o.rnorm}
                for o in self.outcomes
            ],
            "mean_rnorm": self.mean_rnorm,
            "skipped": list(self.skipped),
        }

    def to_table(self) -> str:
        """Aligned-column text table with an average row."""
        rows = [("query", "retrieved", "R_norm")]
        for o in self.outcomes:
            rows.append((o.query_id, str(o.retrieved), f"{o.rnorm:.4f}"))
        rows.append(("average", "", f"{self.mean_rnorm:.4f}"))
        widths = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = []
        for idx, row in enumerate(rows):
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
            if idx == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["query_id", "retrieved", "rnorm"])
        for o in self.outcomes:
            writer.writerow([o.query_id, o.retrieved, f"{o.rnorm:.6f}"])
        writer.writerow(["average", "", f"{self.mean_rnorm:.6f}"])
        return buf.getvalue()


def parse_gold_rankings(data: Union[bytes, str, dict]) -> dict[str, Ranking]:
    """Gold file: {query_id: [[tier-1 ids], [tier-2 ids], ...]}."""
    doc = json.loads(data) if isinstance(data, (bytes, str)) else data
    if not isinstance(doc, dict):
        raise EvaluationError("gold ranking file must map query ids to tier lists")
    return {qid: Ranking(tiers) for qid, tiers in doc.items()}


def run_experiment(
    queries: Sequence[CompositeDescription],
    database: Sequence[SegmentedImage],
    gold: dict[str, Ranking],
    weights: Optional[Weights] = None,
    cfg: Optional[SensitivityConfig] = None,
    report_dir: Optional[Union[str, Path]] = None,
) -> ExperimentReport:
    """Retrieve every query, score rankings against gold, report the mean.

    Queries without a gold ranking are skipped with a warning. When a report
    directory is given, the report is written as JSON, CSV and an aligned
    text table, with a per-query agreement figure alongside.
    """
    outcomes = []
    skipped = []
    for query in queries:
        if query.id not in gold:
            warnings.warn(f"no gold ranking for query {query.id!r}; skipped")
            skipped.append(query.id)
            continue
        results = retrieve(query, database, weights, cfg)
        value = rnorm(system_ranking(results), gold[query.id])
        outcomes.append(QueryOutcome(query.id, len(results), value))
    mean = float(np.mean([o.rnorm for o in outcomes])) if outcomes else float("nan")
    report = ExperimentReport(tuple(outcomes), mean, tuple(skipped))
    if report_dir is not None:
        write_report(report, report_dir)
    return report


def write_report(report: ExperimentReport, report_dir: Union[str, Path]) -> None:
    out = Path(report_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2))
    (out / "report.csv").write_text(report.to_csv())
    (out / "report.txt").write_text(report.to_table())
    _write_rnorm_figure(report, out / "rnorm_per_query.png")


def _write_rnorm_figure(report: ExperimentReport, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [o.query_id for o in report.outcomes]
    values = [o.rnorm for o in report.outcomes]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(labels) + 2.0), 3.2))
    ax.bar(range(len(values)), values, color="#4878a8")
    if values:
        ax.axhline(report.mean_rnorm, color="#a84848", linestyle="--", linewidth=1,
                   label=f"mean = {report.mean_rnorm:.3f}")
        ax.legend(loc="lower right", fontsize=8)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("R_norm")
    ax.set_title("Ranking agreement per query")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---- synthetic suite ----

_SUITE_COLORS = [
    (255, 0, 0),
    (0, 0, 255),
    (0, 200, 0),
    (255, 200, 0),
    (160, 0, 200),
    (0, 200, 200),
    (255, 120, 0),
    (120, 60, 20),
]


@dataclass(frozen=True)
class SyntheticSuite:
    queries: tuple[CompositeDescription, ...]
    database: tuple[SegmentedImage, ...]
    gold: dict[str, Ranking]


def _grid_slots(rng: np.random.Generator, count: int, spacing: float = 8.0):
    """Well-separated jittered positions so scene regions never overlap."""
    cells = [(i, j) for i in range(4) for j in range(4)]
    rng.shuffle(cells)
    slots = []
    for i, j in cells[:count]:
        slots.append(
            (
                i * spacing + rng.uniform(-1.0, 1.0),
                j * spacing + rng.uniform(-1.0, 1.0),
            )
        )
    return slots


def build_synthetic_suite(
    seed: int = 0,
    n_queries: int = 5,
    n_scenes: int = 30,
) -> SyntheticSuite:
    """Scenes built from the standard palette, with constructed gold rankings.

    Each query gets scenes that contain its arrangement (under a random
    similarity transform, plus distractors) and scenes missing one component.
    Gold ranks containing scenes above incomplete ones; unrelated scenes are
    left unranked.
    """
    rng = np.random.default_rng(seed)
    shapes = standard_shapes()
    shape_names = list(shapes)

    queries = []
    for qi in range(n_queries):
        names = [shape_names[(2 * qi + k) % len(shape_names)] for k in range(2 + qi % 2)]
        slots = _grid_slots(rng, len(names))
        components = []
        for k, name in enumerate(names):
            color = snap_color(_SUITE_COLORS[(qi + 3 * k) % len(_SUITE_COLORS)])
            components.append(
                ShapeComponent(
                    color,
                    TextureVec.zeros(),
                    Transform(
                        tx=slots[k][0],
                        ty=slots[k][1],
                        theta=rng.uniform(0.0, 2.0 * np.pi),
                        s=rng.uniform(0.8, 1.6),
                    ),
                    shapes[name],
                )
            )
        queries.append(CompositeDescription(f"query{qi}", tuple(components)))

    def scene_regions(desc, drop: Optional[int], n_distractors: int, scene_rng):
        glob = Transform(
            tx=scene_rng.uniform(-30.0, 30.0),
            ty=scene_rng.uniform(-30.0, 30.0),
            theta=scene_rng.uniform(0.0, 2.0 * np.pi),
            s=scene_rng.uniform(0.7, 1.8),
        )
        from .features import build_region

        regions = []
        for k, comp in enumerate(desc.components):
            if k == drop:
                continue
            contour = apply_transform(glob, comp.posed_contour())
            regions.append(build_region(contour, comp.color, comp.texture))
        # Distractors go on a far shelf so they never collide with the scene.
        for di in range(n_distractors):
            name = shape_names[int(scene_rng.integers(len(shape_names)))]
            color = snap_color(_SUITE_COLORS[int(scene_rng.integers(len(_SUITE_COLORS)))])
            t = Transform(
                tx=120.0 + 10.0 * di,
                ty=-80.0 + scene_rng.uniform(-2.0, 2.0),
                theta=scene_rng.uniform(0.0, 2.0 * np.pi),
                s=scene_rng.uniform(0.6, 1.2),
            )
            regions.append(build_region(apply_transform(t, shapes[name].contour), color))
        return tuple(regions)

    database = []
    containing: dict[str, list[str]] = {q.id: [] for q in queries}
    incomplete: dict[str, list[str]] = {q.id: [] for q in queries}
    scene_idx = 0
    while scene_idx < n_scenes:
        query = queries[scene_idx % len(queries)]
        kind = (scene_idx // len(queries)) % 3
        scene_rng = np.random.default_rng(seed + 1000 + scene_idx)
        scene_id = f"scene{scene_idx:03d}"
        if kind in (0, 1):
            regions = scene_regions(query, None, kind, scene_rng)
            containing[query.id].append(scene_id)
        else:
            drop = int(scene_rng.integers(query.n))
            regions = scene_regions(query, drop, 1, scene_rng)
            incomplete[query.id].append(scene_id)
        database.append(SegmentedImage(id=scene_id, regions=regions, source="suite"))
        scene_idx += 1

    gold = {}
    for q in queries:
        tiers = []
        if containing[q.id]:
            tiers.append(sorted(containing[q.id]))
        if incomplete[q.id]:
            tiers.append(sorted(incomplete[q.id]))
        gold[q.id] = Ranking(tiers)
    return SyntheticSuite(tuple(queries), tuple(database), gold)
