"""HTTP/JSON retrieval service over a Store.

Endpoints (all JSON unless noted):

    GET  /health                      liveness, store counters
    GET  /shapes                      basic-shape palette
    POST /shapes                      add a basic shape {id, points}
    POST /descriptions                insert a description document
    POST /descriptions/echo           parse + canonical re-serialization
    GET  /hierarchy                   subsumption DAG with image links
    POST /images                      ingest a segmented-image document
    POST /images/raster?id=...        ingest raw PNG/PPM bytes (segmented here)
    GET  /images/{image_id}           stored segmented image
    POST /query                       {description, persist?} -> ranked results
    POST /query/by-example            {image_id | raster_base64} -> ranked results
"""

from __future__ import annotations

import base64
import binascii

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response

from .errors import (
    GeometryError,
    HierarchyError,
    ParseError,
    SegmentationError,
    ShapeSearchError,
    UnsatisfiableDescriptionError,
)
from .geometry import (
    BasicShape,
    CompositeDescription,
    Contour,
    SegmentedImage,
    ShapeComponent,
    Transform,
    is_satisfiable,
)
from .ingest import RasterImage, parse_segmented_image, segment_synthetic, serialize_segmented_image
from .interchange import canonical_json, parse_description, serialize_description
from .store import Store


def example_description(img: SegmentedImage) -> CompositeDescription:
    """Query description built from a segmented example image.

    The coordinate frame is anchored at the example's overall centroid with
    unit scale; each region contributes one component whose shape is the
    region contour.
    """
    overall = np.mean([(r.centroid.x, r.centroid.y) for r in img.regions], axis=0)
    components = []
    for k, region in enumerate(img.regions):
        shape = BasicShape(f"{img.id}/region{k}", region.contour)
        t = Transform(
            tx=region.centroid.x - float(overall[0]),
            ty=region.centroid.y - float(overall[1]),
        )
        components.append(ShapeComponent(region.color, region.texture, t, shape))
    return CompositeDescription(f"example:{img.id}", tuple(components))


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail=str(exc))


def create_app(store: Store) -> FastAPI:
    app = FastAPI(title="shapesearch", docs_url=None, redoc_url=None)

    def run_query(hierarchy, desc, persist: bool) -> dict:
        if persist:
            results = store.mutate(
                lambda h: h.answer_query(desc, store.weights, store.cfg, persist=True)
            )
        else:
            results = hierarchy.answer_query(desc, store.weights, store.cfg)
        return {
            "query_id": desc.id,
            "results": [
                {"image_id": image_id, **match.to_dict()} for image_id, match in results
            ],
        }

    @app.get("/health")
    def health():
        h = store.hierarchy
        return {
            "status": "ok",
            "images": len(h.images),
            "descriptions": len(h.nodes),
        }

    @app.get("/shapes")
    def shapes():
        h = store.hierarchy
        return {
            "shapes": [
                {
                    "id": sid,
                    "points": [[float(x), float(y)] for x, y in shape.contour.array],
                }
                for sid, shape in sorted(h.shapes.items())
            ]
        }

    @app.post("/shapes")
    async def add_shape(request: Request):
        doc = await request.json()
        sid = doc.get("id")
        points = doc.get("points")
        if not isinstance(sid, str) or not sid or not isinstance(points, list):
            raise _bad_request(ParseError("shape needs 'id' and 'points'"))
        try:
            shape = BasicShape(sid, Contour(points))
            store.mutate(lambda h: h.add_shape(shape))
        except (GeometryError, ValueError, TypeError) as exc:
            raise _bad_request(exc)
        except HierarchyError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"id": sid}

    @app.post("/descriptions")
    async def add_description(request: Request):
        doc = await request.json()
        h = store.hierarchy
        try:
            desc = parse_description(doc, h.shapes)
            node_id = store.mutate(
                lambda hh: hh.insert_description(desc, store.weights, store.cfg)
            )
        except (ParseError, UnsatisfiableDescriptionError) as exc:
            raise _bad_request(exc)
        except HierarchyError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        node = store.hierarchy.nodes[node_id]
        return {
            "node_id": node_id,
            "parents": sorted(node.parents),
            "children": sorted(node.children),
        }

    @app.post("/descriptions/echo")
    async def echo_description(request: Request):
        doc = await request.json()
        try:
            desc = parse_description(doc, store.hierarchy.shapes)
        except ParseError as exc:
            raise _bad_request(exc)
        payload = canonical_json(serialize_description(desc, store.hierarchy.shapes))
        return Response(content=payload, media_type="application/json")

    @app.get("/hierarchy")
    def hierarchy_dump():
        h = store.hierarchy
        return {
            "roots": h.roots(),
            "nodes": {
                nid: {
                    "parents": sorted(node.parents),
                    "children": sorted(node.children),
                    "images": sorted(node.images),
                    "aliases": sorted(node.aliases),
                    "root": node.is_root,
                }
                for nid, node in sorted(h.nodes.items())
            },
        }

    @app.post("/images")
    async def add_image(request: Request):
        body = await request.body()
        try:
            img = parse_segmented_image(body)
            links = store.mutate(
                lambda h: h.insert_image(img, store.weights, store.cfg)
            )
        except ParseError as exc:
            raise _bad_request(exc)
        except HierarchyError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"image_id": img.id, "links": sorted(links)}

    @app.post("/images/raster")
    async def add_raster(request: Request, id: str):
        body = await request.body()
        try:
            raster = RasterImage.from_bytes(body)
            img = segment_synthetic(raster, image_id=id)
            links = store.mutate(
                lambda h: h.insert_image(img, store.weights, store.cfg)
            )
        except (ParseError, SegmentationError, GeometryError) as exc:
            raise _bad_request(exc)
        except HierarchyError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {
            "image_id": img.id,
            "regions": img.m,
            "links": sorted(links),
        }

    @app.get("/images/{image_id}")
    def get_image(image_id: str):
        h = store.hierarchy
        if image_id not in h.images:
            raise HTTPException(status_code=404, detail=f"no image {image_id!r}")
        return serialize_segmented_image(h.images[image_id])

    @app.post("/query")
    async def query(request: Request):
        doc = await request.json()
        if not isinstance(doc, dict) or "description" not in doc:
            raise _bad_request(ParseError("query body needs a 'description'"))
        h = store.hierarchy
        try:
            desc = parse_description(doc["description"], h.shapes)
            if not is_satisfiable(desc):
                raise UnsatisfiableDescriptionError(
                    f"description {desc.id!r} is unsatisfiable: components overlap"
                )
            return run_query(h, desc, persist=bool(doc.get("persist", False)))
        except (ParseError, UnsatisfiableDescriptionError) as exc:
            raise _bad_request(exc)
        except HierarchyError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.post("/query/by-example")
    async def query_by_example(request: Request):
        doc = await request.json()
        h = store.hierarchy
        if isinstance(doc, dict) and isinstance(doc.get("image_id"), str):
            image_id = doc["image_id"]
            if image_id not in h.images:
                raise HTTPException(status_code=404, detail=f"no image {image_id!r}")
            img = h.images[image_id]
        elif isinstance(doc, dict) and isinstance(doc.get("raster_base64"), str):
            try:
                data = base64.b64decode(doc["raster_base64"], validate=True)
                raster = RasterImage.from_bytes(data)
                img = segment_synthetic(
                    raster, image_id=str(doc.get("id", "example"))
                )
            except (binascii.Error, ParseError, SegmentationError) as exc:
                raise _bad_request(exc)
        else:
            raise _bad_request(
                ParseError("body needs 'image_id' or 'raster_base64'")
            )
        try:
            desc = example_description(img)
            return run_query(h, desc, persist=False)
        except (ShapeSearchError, ValueError) as exc:
            raise _bad_request(exc)

    return app


def serve(store: Store, host: str = "127.0.0.1", port: int = 8409) -> None:
    """Run the service until interrupted; state persists on every mutation."""
    import uvicorn

    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")
