"""The semantic index: a subsumption DAG of descriptions with image links.

Basic shapes are the roots. Composite descriptions hang below the most
specific descriptions that subsume them (decided by exact recognition on
prototypical images). Images link to the most specific description nodes
they satisfy under approximate recognition; queries are answered by scoring
stored images and can optionally be persisted as new descriptions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .approx import MatchResult, recognize_approx
from .config import SensitivityConfig, Weights
from .errors import HierarchyError, UnsatisfiableDescriptionError
from .exact import DEFAULT_EPS, subsumes
from .features import FourierDescriptor
from .geometry import (
    BasicShape,
    ColorRGB,
    CompositeDescription,
    Contour,
    Region,
    SegmentedImage,
    ShapeComponent,
    TextureVec,
    Transform,
    Vec2,
    is_satisfiable,
)
from .interchange import parse_description, serialize_description

FILE_VERSION = 1

# Color and texture attached to root basic-shape descriptions; neutral so a
# root is satisfied by any pose and color of its shape in practice.
ROOT_COLOR = ColorRGB(128.0, 128.0, 128.0)


@dataclass
class HierarchyNode:
    id: str
    parents: set[str] = field(default_factory=set)
    children: set[str] = field(default_factory=set)
    images: set[str] = field(default_factory=set)
    aliases: set[str] = field(default_factory=set)
    is_root: bool = False


class Hierarchy:
    """Subsumption DAG plus the stored shapes, descriptions and images."""

    def __init__(self, shapes: Optional[dict[str, BasicShape]] = None):
        self.shapes: dict[str, BasicShape] = {}
        self.descriptions: dict[str, CompositeDescription] = {}
        self.nodes: dict[str, HierarchyNode] = {}
        self.images: dict[str, SegmentedImage] = {}
        self.image_links: dict[str, set[str]] = {}
        for shape in (shapes or {}).values():
            self.add_shape(shape)

    # ---- structure helpers ----

    def add_shape(self, shape: BasicShape) -> str:
        """Register a basic shape as a root node."""
        if shape.id in self.nodes:
            raise HierarchyError(f"duplicate id {shape.id!r}")
        self.shapes[shape.id] = shape
        self.descriptions[shape.id] = CompositeDescription(
            shape.id,
            (ShapeComponent(ROOT_COLOR, TextureVec.zeros(), Transform.identity(), shape),),
        )
        self.nodes[shape.id] = HierarchyNode(id=shape.id, is_root=True)
        return shape.id

    def roots(self) -> list[str]:
        return sorted(nid for nid, n in self.nodes.items() if n.is_root)

    def topo_order(self) -> list[str]:
        """Parents-before-children order; raises on cycles."""
        indeg = {nid: 0 for nid in self.nodes}
        for node in self.nodes.values():
            for child in node.children:
                indeg[child] += 1
        queue = sorted(nid for nid, d in indeg.items() if d == 0)
        order = []
        while queue:
            nid = queue.pop(0)
            order.append(nid)
            for child in sorted(self.nodes[nid].children):
                indeg[child] -= 1
                if indeg[child] == 0:
                    queue.append(child)
        if len(order) != len(self.nodes):
            raise HierarchyError("hierarchy contains a cycle")
        return order

    def descendants(self, nid: str) -> set[str]:
        seen: set[str] = set()
        stack = list(self.nodes[nid].children)
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(self.nodes[cur].children)
        return seen

    def ancestors(self, nid: str) -> set[str]:
        seen: set[str] = set()
        stack = list(self.nodes[nid].parents)
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(self.nodes[cur].parents)
        return seen

    def resolve(self, description_id: str) -> str:
        """Node id for a description id (follows equivalence aliases)."""
        if description_id in self.nodes:
            return description_id
        for nid, node in self.nodes.items():
            if description_id in node.aliases:
                return nid
        raise HierarchyError(f"unknown description {description_id!r}")

    # ---- classification ----

    def classify_description(
        self, d: CompositeDescription, eps: float = DEFAULT_EPS
    ) -> tuple[set[str], set[str]]:
        """(most specific subsumers, most general subsumees) of d.

        The subsumer search walks top-down and prunes subtrees whose root
        does not subsume d (no descendant can, by transitivity).
        """
        if not is_satisfiable(d):
            raise UnsatisfiableDescriptionError(f"description {d.id!r} is unsatisfiable")

        subsumers: set[str] = set()
        tested: dict[str, bool] = {}
        queue = list(self.roots())
        while queue:
            nid = queue.pop(0)
            if nid in tested:
                continue
            tested[nid] = subsumes(self.descriptions[nid], d, eps)
            if tested[nid]:
                subsumers.add(nid)
                queue.extend(sorted(self.nodes[nid].children))
        parents = {
            nid for nid in subsumers if not (self.descendants(nid) & subsumers)
        }

        # Anything d subsumes is itself subsumed by every parent of d, so the
        # candidates are the common descendants of the parent frontier (the
        # parents included, for the equivalence case).
        candidates: set[str] = set(self.nodes)
        for p in parents:
            candidates &= self.descendants(p) | {p}
        subsumees = {
            nid for nid in candidates if subsumes(d, self.descriptions[nid], eps)
        }
        children = {
            nid for nid in subsumees if not (self.ancestors(nid) & subsumees)
        }
        return parents, children

    # ---- mutation ----

    def insert_description(
        self,
        d: CompositeDescription,
        weights: Optional[Weights] = None,
        cfg: Optional[SensitivityConfig] = None,
        eps: float = DEFAULT_EPS,
    ) -> str:
        """Insert d, restore transitive reduction, and reclassify images.

        Returns the node id, which is an existing node when d is equivalent
        to it (recorded as an alias).
        """
        if d.id in self.descriptions or any(
            d.id in n.aliases for n in self.nodes.values()
        ):
            raise HierarchyError(f"duplicate description id {d.id!r}")
        parents, children = self.classify_description(d, eps)

        equivalent = parents & children
        if equivalent:
            target = sorted(equivalent)[0]
            self.nodes[target].aliases.add(d.id)
            self.descriptions[d.id] = d
            return target

        self.descriptions[d.id] = d
        node = HierarchyNode(id=d.id, parents=set(parents), children=set(children))
        self.nodes[d.id] = node
        for p in parents:
            self.nodes[p].children.add(d.id)
        for c in children:
            self.nodes[c].parents.add(d.id)

        # Any direct edge from an ancestor of d to a child of d is now
        # transitive; drop it to keep the reduction.
        above = self.ancestors(d.id)
        for c in children:
            for x in sorted(self.nodes[c].parents):
                if x != d.id and x in above:
                    self.nodes[c].parents.discard(x)
                    self.nodes[x].children.discard(c)

        # Reclassify images linked at direct parents: those satisfying d are
        # now most specific at d (or deeper, but deeper nodes were already
        # checked when the image was inserted).
        candidates = set()
        for p in parents:
            candidates |= self.nodes[p].images
        for image_id in sorted(candidates):
            match = recognize_approx(d, self.images[image_id], weights, cfg)
            if match is None:
                continue
            node.images.add(image_id)
            self.image_links.setdefault(image_id, set()).add(d.id)
            for p in parents:
                if image_id in self.nodes[p].images:
                    self.nodes[p].images.discard(image_id)
                    self.image_links[image_id].discard(p)
        return d.id

    def insert_image(
        self,
        img: SegmentedImage,
        weights: Optional[Weights] = None,
        cfg: Optional[SensitivityConfig] = None,
    ) -> set[str]:
        """Store the image and link it at its most specific satisfied nodes.

        Nodes are tested top-down; a node is only evaluated when all its
        parents are satisfied. Images satisfying nothing stay unlinked.
        """
        if img.id in self.images:
            raise HierarchyError(f"duplicate image id {img.id!r}")
        self.images[img.id] = img
        satisfied: dict[str, bool] = {}
        for nid in self.topo_order():
            node = self.nodes[nid]
            if node.parents and not all(satisfied[p] for p in node.parents):
                satisfied[nid] = False
                continue
            satisfied[nid] = (
                recognize_approx(self.descriptions[nid], img, weights, cfg) is not None
            )
        links = {
            nid
            for nid, ok in satisfied.items()
            if ok and not any(satisfied[c] for c in self.nodes[nid].children)
        }
        for nid in links:
            self.nodes[nid].images.add(img.id)
        self.image_links[img.id] = set(links)
        return links

    # ---- querying ----

    def answer_query(
        self,
        q: CompositeDescription,
        weights: Optional[Weights] = None,
        cfg: Optional[SensitivityConfig] = None,
        persist: bool = False,
        eps: float = DEFAULT_EPS,
    ) -> list[tuple[str, MatchResult]]:
        """Ranked (image id, match) pairs at or above the global threshold.

        Classification places the query in the DAG (persisted when asked);
        every stored image is then scored against the query, so the answer
        set is exactly what a flat scan returns. Approximate scores do not
        follow exact subsumption tightly enough near the threshold to prune
        siblings or ancestors safely, and ranking needs fresh scores anyway.
        """
        if persist:
            self.insert_description(q, weights, cfg, eps)
        results = []
        for image_id in sorted(self.images):
            match = recognize_approx(q, self.images[image_id], weights, cfg)
            if match is not None:
                results.append((image_id, match))
        results.sort(key=lambda pair: (-pair[1].score, pair[0]))
        return results

    # ---- persistence ----

    def to_doc(self) -> dict:
        return {
            "version": FILE_VERSION,
            "shapes": {
                sid: [[float(x), float(y)] for x, y in shape.contour.array]
                for sid, shape in sorted(self.shapes.items())
            },
            "descriptions": {
                did: serialize_description(d, self.shapes)
                for did, d in sorted(self.descriptions.items())
                if not (did in self.nodes and self.nodes[did].is_root)
            },
            "nodes": {
                nid: {
                    "parents": sorted(node.parents),
                    "children": sorted(node.children),
                    "images": sorted(node.images),
                    "aliases": sorted(node.aliases),
                    "root": node.is_root,
                }
                for nid, node in sorted(self.nodes.items())
            },
            "images": {
                iid: _image_doc(img) for iid, img in sorted(self.images.items())
            },
        }

    @staticmethod
    def from_doc(doc: dict) -> "Hierarchy":
        if not isinstance(doc, dict) or doc.get("version") != FILE_VERSION:
            raise HierarchyError(
                f"unsupported hierarchy file version: {doc.get('version')!r}"
            )
        h = Hierarchy()
        for sid, points in doc.get("shapes", {}).items():
            h.shapes[sid] = BasicShape(sid, Contour(points))
        for nid, raw in doc.get("nodes", {}).items():
            h.nodes[nid] = HierarchyNode(
                id=nid,
                parents=set(raw.get("parents", [])),
                children=set(raw.get("children", [])),
                images=set(raw.get("images", [])),
                aliases=set(raw.get("aliases", [])),
                is_root=bool(raw.get("root", False)),
            )
        for nid, node in h.nodes.items():
            if node.is_root:
                if nid not in h.shapes:
                    raise HierarchyError(f"root node {nid!r} has no shape")
                h.descriptions[nid] = CompositeDescription(
                    nid,
                    (
                        ShapeComponent(
                            ROOT_COLOR,
                            TextureVec.zeros(),
                            Transform.identity(),
                            h.shapes[nid],
                        ),
                    ),
                )
        for did, raw in doc.get("descriptions", {}).items():
            h.descriptions[did] = parse_description(raw, h.shapes)
        for iid, raw in doc.get("images", {}).items():
            h.images[iid] = _image_from_doc(raw)
        for nid, node in h.nodes.items():
            for p in node.parents:
                if p not in h.nodes or nid not in h.nodes[p].children:
                    raise HierarchyError(f"broken edge {p!r} -> {nid!r}")
            for c in node.children:
                if c not in h.nodes or nid not in h.nodes[c].parents:
                    raise HierarchyError(f"broken edge {nid!r} -> {c!r}")
            if nid not in h.descriptions:
                raise HierarchyError(f"node {nid!r} has no description")
            for iid in node.images:
                if iid not in h.images:
                    raise HierarchyError(f"node {nid!r} links unknown image {iid!r}")
                h.image_links.setdefault(iid, set()).add(nid)
        for iid in h.images:
            h.image_links.setdefault(iid, set())
        h.topo_order()  # cycle check
        return h

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_doc(), sort_keys=True))

    @staticmethod
    def load(path: Union[str, Path]) -> "Hierarchy":
        p = Path(path)
        if not p.exists():
            raise HierarchyError(f"no hierarchy file at {p}")
        try:
            doc = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise HierarchyError(f"corrupt hierarchy file: {exc}")
        return Hierarchy.from_doc(doc)

    def clone(self) -> "Hierarchy":
        """Independent copy (used for snapshot isolation by the service)."""
        return Hierarchy.from_doc(self.to_doc())


def _image_doc(img: SegmentedImage) -> dict:
    doc = {
        "id": img.id,
        "regions": [
            {
                "contour": [[float(x), float(y)] for x, y in r.contour.array],
                "color": [r.color.r, r.color.g, r.color.b],
                "texture": r.texture.values.tolist(),
                "centroid": [r.centroid.x, r.centroid.y],
                "size": r.size,
                "descriptor": r.descriptor.to_pairs(),
            }
            for r in img.regions
        ],
    }
    if img.source is not None:
        doc["source"] = img.source
    return doc


def _image_from_doc(doc: dict) -> SegmentedImage:
    regions = tuple(
        Region(
            contour=Contour(raw["contour"]),
            color=ColorRGB.of(raw["color"]),
            texture=TextureVec(raw["texture"]),
            centroid=Vec2(*raw["centroid"]),
            size=float(raw["size"]),
            descriptor=FourierDescriptor.from_pairs(raw["descriptor"]),
        )
        for raw in doc["regions"]
    )
    return SegmentedImage(id=doc["id"], regions=regions, source=doc.get("source"))
