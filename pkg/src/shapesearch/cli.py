"""Command-line interface.

Exit codes: 0 on success, 2 on usage errors (argparse), 1 on operation
errors, which are printed to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import shapes as shape_lib
from .errors import ShapeSearchError
from .evaluation import build_synthetic_suite, parse_gold_rankings, run_experiment
from .geometry import BasicShape, Contour
from .ingest import RasterImage, parse_segmented_image, segment_synthetic
from .interchange import parse_description
from .store import Store

BUILTIN_SHAPES = {
    "circle": shape_lib.circle,
    "ellipse": shape_lib.ellipse,
    "square": shape_lib.square,
    "rectangle": shape_lib.rectangle,
    "triangle": shape_lib.triangle,
    "pentagon": lambda: shape_lib.regular_polygon(5),
    "hexagon": lambda: shape_lib.regular_polygon(6),
    "star": shape_lib.star,
    "lshape": shape_lib.lshape,
}

RASTER_SUFFIXES = {".png", ".ppm"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapesearch",
        description="Composite-shape retrieval over segmented images",
    )
    parser.add_argument(
        "--data-dir", default="shapesearch-data", help="store directory"
    )
    parser.add_argument("--config", default=None, help="key = value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("add-shape", help="register a basic shape")
    p.add_argument("name")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--points", help="JSON file with [[x, y], ...]")
    src.add_argument("--builtin", choices=sorted(BUILTIN_SHAPES))

    p = sub.add_parser("add-description", help="insert a description document")
    p.add_argument("file")

    p = sub.add_parser("ingest", help="ingest segmented JSON or PNG/PPM rasters")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("query", help="rank stored images against a description")
    p.add_argument("file")
    p.add_argument("--persist", action="store_true", help="keep the query as a description")
    p.add_argument("--top", type=int, default=None, help="print at most N rows")

    p = sub.add_parser("classify", help="show where a description would sit")
    p.add_argument("file")

    sub.add_parser("hierarchy", help="print the description DAG")

    p = sub.add_parser("evaluate", help="run a retrieval experiment")
    p.add_argument("--out", default=None, help="report directory (json/csv/txt/figure)")
    p.add_argument("--seed", type=int, default=0, help="synthetic suite seed")
    p.add_argument("--queries", default=None, help="JSON file: list of description docs")
    p.add_argument("--images", default=None, help="directory of segmented-image JSON files")
    p.add_argument("--gold", default=None, help="gold ranking JSON file")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8409)
    return parser


def _print_results(results, top=None) -> None:
    rows = [("image", "score", "spatial", "shape", "color", "rotation", "scale", "texture", "mapping")]
    for image_id, match in results[: top if top else len(results)]:
        b = match.breakdown
        rows.append(
            (
                image_id,
                f"{match.score:.4f}",
                f"{b['spatial']:.3f}",
                f"{b['shape']:.3f}",
                f"{b['color']:.3f}",
                f"{b['rotation']:.3f}",
                f"{b['scale']:.3f}",
                f"{b['texture']:.3f}",
                ",".join(str(j) for j in match.mapping),
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for idx, row in enumerate(rows):
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
        if idx == 0:
            print("  ".join("-" * w for w in widths))


def _cmd_add_shape(store: Store, args) -> int:
    if args.builtin:
        contour = BUILTIN_SHAPES[args.builtin]()
    else:
        points = json.loads(Path(args.points).read_text())
        contour = Contour(points)
    store.mutate(lambda h: h.add_shape(BasicShape(args.name, contour)))
    print(f"added shape {args.name}")
    return 0


def _cmd_add_description(store: Store, args) -> int:
    doc = json.loads(Path(args.file).read_text())
    desc = parse_description(doc, store.hierarchy.shapes)
    node_id = store.mutate(
        lambda h: h.insert_description(desc, store.weights, store.cfg)
    )
    node = store.hierarchy.nodes[node_id]
    print(f"inserted {desc.id} at node {node_id}")
    print(f"  parents:  {', '.join(sorted(node.parents)) or '(none)'}")
    print(f"  children: {', '.join(sorted(node.children)) or '(none)'}")
    return 0


def _cmd_ingest(store: Store, args) -> int:
    for name in args.files:
        path = Path(name)
        if path.suffix.lower() in RASTER_SUFFIXES:
            raster = RasterImage.from_file(path)
            img = segment_synthetic(raster, image_id=path.stem)
        else:
            img = parse_segmented_image(path.read_text())
        links = store.mutate(lambda h: h.insert_image(img, store.weights, store.cfg))
        print(f"ingested {img.id}: {img.m} regions, linked at {sorted(links) or '(nothing)'}")
    return 0


def _cmd_query(store: Store, args) -> int:
    doc = json.loads(Path(args.file).read_text())
    desc = parse_description(doc, store.hierarchy.shapes)
    if args.persist:
        results = store.mutate(
            lambda h: h.answer_query(desc, store.weights, store.cfg, persist=True)
        )
    else:
        results = store.hierarchy.answer_query(desc, store.weights, store.cfg)
    _print_results(results, args.top)
    return 0


def _cmd_classify(store: Store, args) -> int:
    doc = json.loads(Path(args.file).read_text())
    desc = parse_description(doc, store.hierarchy.shapes)
    parents, children = store.hierarchy.classify_description(desc)
    print(f"{desc.id}:")
    print(f"  parents:  {', '.join(sorted(parents)) or '(none)'}")
    print(f"  children: {', '.join(sorted(children)) or '(none)'}")
    return 0


def _cmd_hierarchy(store: Store, args) -> int:
    h = store.hierarchy
    for nid in h.topo_order():
        node = h.nodes[nid]
        depth = len(h.ancestors(nid))
        mark = "*" if node.is_root else " "
        extras = []
        if node.images:
            extras.append(f"images: {', '.join(sorted(node.images))}")
        if node.aliases:
            extras.append(f"aliases: {', '.join(sorted(node.aliases))}")
        suffix = f"  ({'; '.join(extras)})" if extras else ""
        print(f"{mark} {'  ' * depth}{nid}{suffix}")
    return 0


def _cmd_evaluate(store: Store, args) -> int:
    if args.queries or args.images or args.gold:
        if not (args.queries and args.images and args.gold):
            print("evaluate: --queries, --images and --gold go together", file=sys.stderr)
            return 1
        query_docs = json.loads(Path(args.queries).read_text())
        queries = [parse_description(d, store.hierarchy.shapes) for d in query_docs]
        database = [
            parse_segmented_image(p.read_text())
            for p in sorted(Path(args.images).glob("*.json"))
        ]
        gold = parse_gold_rankings(Path(args.gold).read_text())
    else:
        suite = build_synthetic_suite(seed=args.seed)
        queries, database, gold = suite.queries, suite.database, suite.gold
    report = run_experiment(
        queries, database, gold, store.weights, store.cfg, report_dir=args.out
    )
    print(report.to_table(), end="")
    if args.out:
        print(f"report written to {args.out}")
    return 0


def _cmd_serve(store: Store, args) -> int:
    from .service import serve

    print(f"serving on http://{args.host}:{args.port} (data: {store.data_dir})")
    serve(store, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "add-shape": _cmd_add_shape,
    "add-description": _cmd_add_description,
    "ingest": _cmd_ingest,
    "query": _cmd_query,
    "classify": _cmd_classify,
    "hierarchy": _cmd_hierarchy,
    "evaluate": _cmd_evaluate,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        store = Store(args.data_dir, config_path=args.config)
        return _COMMANDS[args.command](store, args)
    except (ShapeSearchError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
