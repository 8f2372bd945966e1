"""Image ingestion: segmented-region documents, synthetic rasters, features.

Two entry paths produce SegmentedImage values: a JSON document of traced
regions (external segmentation) and a synthetic segmenter for flat-colored
rasters based on palette quantization plus connected components.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from PIL import Image, ImageDraw
from scipy import ndimage
from shapely.geometry import Polygon
from skimage import measure

from .errors import GeometryError, ParseError, SegmentationError
from .features import build_region, gabor_texture, mean_color, quantize_colors
from .geometry import (
    TEXTURE_DIM,
    ColorRGB,
    Contour,
    Region,
    SegmentedImage,
    TextureVec,
)

MIN_REGION_AREA = 50
SIMPLIFY_TOLERANCE = 0.5


@dataclass(frozen=True)
class RasterImage:
    """Row-major RGB pixel grid."""

    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise GeometryError(f"raster must be (H, W, 3), got {arr.shape}")
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def gray(self) -> np.ndarray:
        """Luminance in [0, 255]."""
        arr = self.pixels.astype(float)
        return 0.299 * arr[..., 0] + 0.587 * arr[..., 1] + 0.114 * arr[..., 2]

    @staticmethod
    def from_bytes(data: bytes) -> "RasterImage":
        try:
            img = Image.open(io.BytesIO(data)).convert("RGB")
        except Exception as exc:
            raise ParseError(f"cannot decode raster image: {exc}")
        return RasterImage(np.asarray(img))

    @staticmethod
    def from_file(path: Union[str, Path]) -> "RasterImage":
        return RasterImage.from_bytes(Path(path).read_bytes())

    def to_png_bytes(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.pixels).save(buf, format="PNG")
        return buf.getvalue()


def render_scene(
    items: Sequence[tuple[Contour, ColorRGB]],
    width: int,
    height: int,
    background: Sequence[float] = (255, 255, 255),
) -> RasterImage:
    """Rasterize filled contours over a flat background (draw order given)."""
    img = Image.new("RGB", (width, height), tuple(int(round(v)) for v in background))
    draw = ImageDraw.Draw(img)
    for contour, color in items:
        xy = [(float(x), float(y)) for x, y in contour.array]
        draw.polygon(xy, fill=tuple(int(round(v)) for v in color))
    return RasterImage(np.asarray(img))


# ---- segmented-image interchange documents ----


def _parse_texture(value, where: str) -> Optional[TextureVec]:
    if value is None:
        return None
    if not isinstance(value, (list, tuple)) or len(value) != TEXTURE_DIM:
        raise ParseError(f"{where}: texture must be null or {TEXTURE_DIM} numbers")
    try:
        return TextureVec([float(v) for v in value])
    except (TypeError, ValueError, GeometryError) as exc:
        raise ParseError(f"{where}: bad texture: {exc}")


def parse_segmented_image(data: Union[bytes, str, dict]) -> SegmentedImage:
    """Parse and validate a segmented-image JSON document.

    Regions come back with their feature caches populated.
    """
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}")
    else:
        doc = data
    if not isinstance(doc, dict):
        raise ParseError("segmented image document must be a JSON object")
    image_id = doc.get("id")
    if not isinstance(image_id, str) or not image_id:
        raise ParseError("segmented image needs a nonempty string 'id'")
    raw_regions = doc.get("regions")
    if not isinstance(raw_regions, list) or not raw_regions:
        raise ParseError("segmented image needs a nonempty 'regions' list")

    regions = []
    for idx, raw in enumerate(raw_regions):
        where = f"region {idx}"
        if not isinstance(raw, dict):
            raise ParseError(f"{where}: must be an object")
        pts = raw.get("contour")
        if not isinstance(pts, list) or len(pts) < 3:
            raise ParseError(f"{where}: contour needs at least 3 [x, y] points")
        try:
            contour = Contour([(float(x), float(y)) for x, y in pts])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: bad contour points: {exc}")
        except GeometryError as exc:
            raise ParseError(f"{where}: {exc}")
        color_raw = raw.get("color")
        if not isinstance(color_raw, (list, tuple)) or len(color_raw) != 3:
            raise ParseError(f"{where}: color must be [r, g, b]")
        try:
            color = ColorRGB.of(color_raw)
        except GeometryError as exc:
            raise ParseError(f"{where}: {exc}")
        texture = _parse_texture(raw.get("texture"), where)
        regions.append(build_region(contour, color, texture))

    try:
        return SegmentedImage(
            id=image_id, regions=tuple(regions), source=doc.get("source")
        )
    except GeometryError as exc:
        raise ParseError(str(exc))


def serialize_segmented_image(img: SegmentedImage) -> dict:
    doc = {
        "id": img.id,
        "regions": [
            {
                "contour": [[float(x), float(y)] for x, y in r.contour.array],
                "color": [r.color.r, r.color.g, r.color.b],
                "texture": r.texture.values.tolist(),
            }
            for r in img.regions
        ],
    }
    if img.source is not None:
        doc["source"] = img.source
    return doc


# ---- synthetic segmentation ----


def _trace_component(mask: np.ndarray) -> Contour:
    """Outer boundary of a connected pixel mask as a simplified contour."""
    padded = np.pad(mask.astype(float), 1)
    contours = measure.find_contours(padded, 0.5)
    if not contours:
        raise SegmentationError("component produced no boundary")
    outer = max(contours, key=len)
    # find_contours yields (row, col); shift for padding and swap to (x, y).
    xy = np.column_stack([outer[:, 1] - 1.0, outer[:, 0] - 1.0])
    poly = Polygon(xy).simplify(SIMPLIFY_TOLERANCE, preserve_topology=True)
    return Contour(np.asarray(poly.exterior.coords)[:-1])


def extract_region_features(
    contour: Contour,
    raster: RasterImage,
    mask: Optional[np.ndarray] = None,
) -> Region:
    """Region with color, texture, and shape features taken from the raster."""
    if mask is None:
        canvas = Image.new("L", (raster.width, raster.height), 0)
        ImageDraw.Draw(canvas).polygon(
            [(float(x), float(y)) for x, y in contour.array], fill=1
        )
        mask = np.asarray(canvas, dtype=bool)
    if not mask.any():
        raise SegmentationError("region mask is empty")
    color = mean_color(raster.pixels[mask])
    rows, cols = np.nonzero(mask)
    r0, r1 = rows.min(), rows.max() + 1
    c0, c1 = cols.min(), cols.max() + 1
    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        texture = gabor_texture(raster.gray()[r0:r1, c0:c1], mask[r0:r1, c0:c1])
    return build_region(contour, color, texture)


def segment_synthetic(
    raster: RasterImage,
    image_id: str = "raster",
    min_area: int = MIN_REGION_AREA,
) -> SegmentedImage:
    """Segment a flat-colored synthetic raster into regions.

    Pixels are quantized to the 112-entry palette; connected components of
    each non-background palette color become regions. Background is the modal
    border color. Components below min_area pixels are dropped and only outer
    contours are traced, so holes do not produce nested regions.
    """
    h, w = raster.height, raster.width
    quant = quantize_colors(raster.pixels.reshape(-1, 3)).reshape(h, w)
    border = np.concatenate([quant[0, :], quant[-1, :], quant[:, 0], quant[:, -1]])
    background = int(np.bincount(border).argmax())

    regions = []
    for palette_idx in np.unique(quant):
        if palette_idx == background:
            continue
        labels, count = ndimage.label(quant == palette_idx)
        for label in range(1, count + 1):
            mask = labels == label
            if int(mask.sum()) < min_area:
                continue
            try:
                contour = _trace_component(mask)
            except (GeometryError, SegmentationError):
                continue
            regions.append(extract_region_features(contour, raster, mask))
    if not regions:
        raise SegmentationError("no non-background component found")
    # Deterministic order: top-to-bottom, left-to-right by centroid.
    regions.sort(key=lambda r: (round(r.centroid.y, 3), round(r.centroid.x, 3)))
    return SegmentedImage(id=image_id, regions=tuple(regions), source="synthetic")
