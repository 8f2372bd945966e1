"""Shared fixtures and scene generators.

Generated descriptions place components on a jittered grid with bounded
scales, so they are satisfiable by construction; generated images embed a
description under a random global similarity transform, optionally dropping
components or adding distractor regions on a far shelf that cannot collide
with the scene.
"""

from __future__ import annotations

import numpy as np
import pytest

from shapesearch import shapes as shape_lib
from shapesearch.features import build_region, snap_color
from shapesearch.geometry import (
    BasicShape,
    CompositeDescription,
    SegmentedImage,
    ShapeComponent,
    TextureVec,
    Transform,
    apply_transform,
    is_satisfiable,
)
from shapesearch.shapes import standard_shapes

# Scene components come from the standard palette (largest radius 1.5), so a
# six-unit grid spacing with scale <= 1.8 keeps regions disjoint.
GRID_SPACING = 8.0
SCENE_SCALE_RANGE = (0.7, 1.8)

PALETTE_COLORS = [
    snap_color(c)
    for c in [
        (255, 0, 0),
        (0, 0, 255),
        (0, 200, 0),
        (255, 200, 0),
        (160, 0, 200),
        (0, 200, 200),
        (255, 120, 0),
        (120, 60, 20),
    ]
]


@pytest.fixture(scope="session")
def shape_library() -> dict[str, BasicShape]:
    lib = standard_shapes()
    lib["lshape"] = BasicShape("lshape", shape_lib.lshape())
    lib["blob"] = BasicShape("blob", shape_lib.blob())
    return lib


def make_component(
    shape: BasicShape,
    tx: float,
    ty: float,
    theta: float = 0.0,
    s: float = 1.0,
    color=(255, 0, 0),
    texture: TextureVec | None = None,
) -> ShapeComponent:
    return ShapeComponent(
        snap_color(color),
        texture if texture is not None else TextureVec.zeros(),
        Transform(tx=tx, ty=ty, theta=theta, s=s),
        shape,
    )


def random_transform(rng: np.random.Generator, max_offset: float = 30.0) -> Transform:
    return Transform(
        tx=float(rng.uniform(-max_offset, max_offset)),
        ty=float(rng.uniform(-max_offset, max_offset)),
        theta=float(rng.uniform(0.0, 2.0 * np.pi)),
        s=float(rng.uniform(0.6, 2.0)),
    )


def random_description(
    rng: np.random.Generator,
    shapes: dict[str, BasicShape],
    n: int,
    desc_id: str = "desc",
    shape_names=None,
) -> CompositeDescription:
    names = list(shape_names) if shape_names else sorted(standard_shapes())
    cells = [(i, j) for i in range(4) for j in range(4)]
    rng.shuffle(cells)
    components = []
    for k in range(n):
        i, j = cells[k]
        name = names[int(rng.integers(len(names)))]
        components.append(
            make_component(
                shapes[name],
                tx=i * GRID_SPACING + float(rng.uniform(-1.0, 1.0)),
                ty=j * GRID_SPACING + float(rng.uniform(-1.0, 1.0)),
                theta=float(rng.uniform(0.0, 2.0 * np.pi)),
                s=float(rng.uniform(*SCENE_SCALE_RANGE)),
                color=PALETTE_COLORS[int(rng.integers(len(PALETTE_COLORS)))],
            )
        )
    desc = CompositeDescription(desc_id, tuple(components))
    assert is_satisfiable(desc)
    return desc


def embed_scene(
    rng: np.random.Generator,
    desc: CompositeDescription,
    image_id: str = "scene",
    drop: int | None = None,
    distractors: int = 0,
    shapes: dict[str, BasicShape] | None = None,
    transform: Transform | None = None,
) -> SegmentedImage:
    """Image containing desc under a random global transform.

    Optionally drops one component and parks distractor regions on a far
    shelf, outside any reachable scene position.
    """
    glob = transform if transform is not None else random_transform(rng)
    regions = []
    for k, comp in enumerate(desc.components):
        if k == drop:
            continue
        regions.append(
            build_region(
                apply_transform(glob, comp.posed_contour()), comp.color, comp.texture
            )
        )
    if distractors:
        names = sorted(shapes or standard_shapes())
        lib = shapes or standard_shapes()
        for d in range(distractors):
            name = names[int(rng.integers(len(names)))]
            t = Transform(
                tx=220.0 + 18.0 * d,
                ty=-220.0 + float(rng.uniform(-2.0, 2.0)),
                theta=float(rng.uniform(0.0, 2.0 * np.pi)),
                s=float(rng.uniform(0.6, 1.2)),
            )
            regions.append(
                build_region(
                    apply_transform(t, lib[name].contour),
                    PALETTE_COLORS[int(rng.integers(len(PALETTE_COLORS)))],
                )
            )
    return SegmentedImage(id=image_id, regions=tuple(regions))
