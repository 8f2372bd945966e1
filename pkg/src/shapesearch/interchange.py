"""Description interchange documents.

A description document looks like::

    {"id": "...", "components": [
        {"shape": "circle" | {"points": [[x, y], ...]},
         "color": [r, g, b],
         "texture": [24 numbers] | null,
         "transform": {"tx": 0, "ty": 0, "theta": 0, "s": 1}}]}

Angles are radians, scale dimensionless, coordinates pixels. Shapes are
referenced by library id or carried inline as contour points.
"""

from __future__ import annotations

import json
import math
from typing import Mapping, Optional, Union

from .errors import GeometryError, ParseError
from .geometry import (
    BasicShape,
    ColorRGB,
    CompositeDescription,
    Contour,
    ShapeComponent,
    TextureVec,
    Transform,
)

_TRANSFORM_KEYS = ("tx", "ty", "theta", "s")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ParseError(f"{where}: non-finite number")
    return float(value)


def parse_description(
    data: Union[bytes, str, dict],
    shapes: Optional[Mapping[str, BasicShape]] = None,
) -> CompositeDescription:
    """Parse and validate a description document.

    Shape references are resolved against the given library; inline contours
    become anonymous basic shapes scoped to the description.
    """
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}")
    else:
        doc = data
    if not isinstance(doc, dict):
        raise ParseError("description document must be a JSON object")
    desc_id = doc.get("id")
    if not isinstance(desc_id, str) or not desc_id:
        raise ParseError("description needs a nonempty string 'id'")
    raw_components = doc.get("components")
    if not isinstance(raw_components, list) or not raw_components:
        raise ParseError("description needs a nonempty 'components' list")

    components = []
    for idx, raw in enumerate(raw_components):
        where = f"component {idx}"
        if not isinstance(raw, dict):
            raise ParseError(f"{where}: must be an object")

        shape_ref = raw.get("shape")
        if isinstance(shape_ref, str):
            if shapes is None or shape_ref not in shapes:
                raise ParseError(f"{where}: unknown shape {shape_ref!r}")
            shape = shapes[shape_ref]
        elif isinstance(shape_ref, dict) and isinstance(shape_ref.get("points"), list):
            try:
                contour = Contour(
                    [(float(x), float(y)) for x, y in shape_ref["points"]]
                )
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{where}: bad inline shape points: {exc}")
            except GeometryError as exc:
                raise ParseError(f"{where}: {exc}")
            shape = BasicShape(f"{desc_id}/inline{idx}", contour)
        else:
            raise ParseError(f"{where}: 'shape' must be an id or {{'points': ...}}")

        color_raw = raw.get("color")
        if not isinstance(color_raw, (list, tuple)) or len(color_raw) != 3:
            raise ParseError(f"{where}: color must be [r, g, b]")
        try:
            color = ColorRGB.of([_number(v, f"{where} color") for v in color_raw])
        except GeometryError as exc:
            raise ParseError(f"{where}: {exc}")

        tex_raw = raw.get("texture")
        if tex_raw is None:
            texture = TextureVec.zeros()
        elif isinstance(tex_raw, list) and len(tex_raw) == 24:
            texture = TextureVec([_number(v, f"{where} texture") for v in tex_raw])
        else:
            raise ParseError(f"{where}: texture must be null or 24 numbers")

        t_raw = raw.get("transform")
        if not isinstance(t_raw, dict):
            raise ParseError(f"{where}: transform must be an object")
        vals = {}
        for key in _TRANSFORM_KEYS:
            if key not in t_raw:
                raise ParseError(f"{where}: transform missing {key!r}")
            vals[key] = _number(t_raw[key], f"{where} transform.{key}")
        try:
            transform = Transform(**vals)
        except GeometryError as exc:
            raise ParseError(f"{where}: {exc}")

        components.append(ShapeComponent(color, texture, transform, shape))

    return CompositeDescription(desc_id, tuple(components))


def serialize_description(
    d: CompositeDescription,
    shapes: Optional[Mapping[str, BasicShape]] = None,
) -> dict:
    """Description document; known library shapes by id, others inline."""
    components = []
    for comp in d.components:
        if shapes is not None and shapes.get(comp.shape.id) == comp.shape:
            shape_ref: Union[str, dict] = comp.shape.id
        else:
            shape_ref = {
                "points": [[float(x), float(y)] for x, y in comp.shape.contour.array]
            }
        components.append(
            {
                "shape": shape_ref,
                "color": [comp.color.r, comp.color.g, comp.color.b],
                "texture": comp.texture.values.tolist(),
                "transform": {
                    "tx": comp.transform.tx,
                    "ty": comp.transform.ty,
                    "theta": comp.transform.theta,
                    "s": comp.transform.s,
                },
            }
        )
    return {"id": d.id, "components": components}


def _collapse_integral(value):
    if isinstance(value, float) and value.is_integer() and abs(value) < 2**53:
        return int(value)
    if isinstance(value, list):
        return [_collapse_integral(v) for v in value]
    if isinstance(value, dict):
        return {k: _collapse_integral(v) for k, v in value.items()}
    return value


def canonical_json(doc: dict) -> str:
    """Deterministic JSON rendering shared with clients.

    Keys are sorted, separators are compact, and integral floats collapse to
    integers so number formatting agrees across JSON implementations.
    """
    return json.dumps(_collapse_integral(doc), sort_keys=True, separators=(",", ":"))
