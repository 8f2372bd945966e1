// DOM rendering: the sketch canvas, palette, and the ranked results grid.

import { applyToPoints } from "./transform.js";
import type {
  CanvasItem,
  PaletteShape,
  RegionDoc,
  ResultRow,
  SegmentedImageDoc,
} from "./types.js";

export const CANVAS_SCALE = 12; // pixels per model unit on the sketch canvas

function rgb(color: [number, number, number]): string {
  const [r, g, b] = color.map((v) => Math.round(v));
  return `rgb(${r},${g},${b})`;
}

function drawPolygon(
  ctx: CanvasRenderingContext2D,
  points: number[][],
  fill: string,
  stroke = "#333",
) {
  if (points.length < 3) return;
  ctx.beginPath();
  ctx.moveTo(points[0][0], points[0][1]);
  for (const [x, y] of points.slice(1)) ctx.lineTo(x, y);
  ctx.closePath();
  ctx.fillStyle = fill;
  ctx.fill();
  ctx.strokeStyle = stroke;
  ctx.stroke();
}

export function drawSketch(
  canvas: HTMLCanvasElement,
  items: CanvasItem[],
  shapes: Map<string, PaletteShape>,
  selected: number,
) {
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.save();
  ctx.translate(canvas.width / 2, canvas.height / 2);
  ctx.scale(CANVAS_SCALE, CANVAS_SCALE);
  ctx.lineWidth = 1 / CANVAS_SCALE;
  items.forEach((item, idx) => {
    const shape = shapes.get(item.shapeId);
    if (!shape) return;
    const pts = applyToPoints(item.transform, shape.points);
    drawPolygon(ctx, pts, rgb(item.color), idx === selected ? "#e03" : "#333");
  });
  ctx.restore();
}

function fitRegions(regions: RegionDoc[], size: number) {
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (const region of regions) {
    for (const [x, y] of region.contour) {
      minX = Math.min(minX, x); maxX = Math.max(maxX, x);
      minY = Math.min(minY, y); maxY = Math.max(maxY, y);
    }
  }
  const span = Math.max(maxX - minX, maxY - minY, 1e-9);
  const scale = (size * 0.9) / span;
  return (p: number[]) => [
    (p[0] - (minX + maxX) / 2) * scale + size / 2,
    (p[1] - (minY + maxY) / 2) * scale + size / 2,
  ];
}

export function drawThumbnail(canvas: HTMLCanvasElement, doc: SegmentedImageDoc) {
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const place = fitRegions(doc.regions, canvas.width);
  for (const region of doc.regions) {
    drawPolygon(ctx, region.contour.map(place), rgb(region.color));
  }
}

export function breakdownTitle(row: ResultRow): string {
  const parts = Object.entries(row.breakdown)
    .map(([name, value]) => `${name}: ${value.toFixed(3)}`)
    .join("\n");
  return `score ${row.score.toFixed(4)}\n${parts}`;
}

export function renderResults(
  container: HTMLElement,
  rows: ResultRow[],
  dropped: string[],
  thumbnail: (imageId: string, canvas: HTMLCanvasElement) => void,
) {
  container.innerHTML = "";
  if (rows.length === 0 && dropped.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "No images match this sketch yet.";
    container.appendChild(empty);
    return;
  }
  for (const row of rows) {
    const cell = document.createElement("figure");
    cell.className = "result";
    cell.title = breakdownTitle(row);
    const canvas = document.createElement("canvas");
    canvas.width = canvas.height = 96;
    thumbnail(row.image_id, canvas);
    const caption = document.createElement("figcaption");
    caption.textContent = `${row.image_id} · ${row.score.toFixed(3)}`;
    cell.append(canvas, caption);
    container.appendChild(cell);
  }
  for (const id of dropped) {
    const cell = document.createElement("figure");
    cell.className = "result dropped";
    const caption = document.createElement("figcaption");
    caption.textContent = `${id} (dropped by refinement)`;
    cell.appendChild(caption);
    container.appendChild(cell);
  }
}
