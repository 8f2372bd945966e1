// Application wiring: palette, pointer gestures, submission, refinement.
//
// Gestures: drag moves a shape, shift-drag rotates it around its centroid,
// mouse wheel rescales it. Submitting sends the built description to the
// service; adding more shapes and resubmitting refines the query (the
// server guarantees the result set never grows).

import { ServiceClient } from "./api.js";
import { CANVAS_SCALE, drawSketch, drawThumbnail, renderResults } from "./render.js";
import { SketchSession } from "./state.js";
import { dragged, rotated, scaled } from "./transform.js";
import type { PaletteShape, SegmentedImageDoc } from "./types.js";

const SWATCHES: [number, number, number][] = [
  [255, 0, 0],
  [0, 0, 255],
  [0, 200, 0],
  [255, 200, 0],
  [160, 0, 200],
  [0, 200, 200],
  [120, 60, 20],
  [40, 40, 40],
];

function serviceUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? "http://127.0.0.1:8409";
}

async function start() {
  const client = new ServiceClient(serviceUrl());
  const session = new SketchSession();
  const shapeIndex = new Map<string, PaletteShape>();
  const thumbnails = new Map<string, SegmentedImageDoc>();

  const canvas = document.getElementById("sketch") as HTMLCanvasElement;
  const palette = document.getElementById("palette")!;
  const results = document.getElementById("results")!;
  const status = document.getElementById("status")!;
  const swatchBox = document.getElementById("swatches")!;

  let selected = -1;
  let activeColor = SWATCHES[0];

  const redraw = () => drawSketch(canvas, session.items, shapeIndex, selected);

  const showResults = () => {
    const view = session.results;
    renderResults(results, view?.rows ?? [], view?.dropped ?? [], (id, cell) => {
      const doc = thumbnails.get(id);
      if (doc) {
        drawThumbnail(cell, doc);
        return;
      }
      client
        .image(id)
        .then((fetched) => {
          thumbnails.set(id, fetched);
          drawThumbnail(cell, fetched);
        })
        .catch(() => undefined);
    });
  };

  try {
    for (const shape of await client.shapes()) {
      shapeIndex.set(shape.id, shape);
      const button = document.createElement("button");
      button.textContent = shape.id;
      button.addEventListener("click", () => {
        session.addItem(shape.id, activeColor);
        selected = session.items.length - 1;
        redraw();
      });
      palette.appendChild(button);
    }
  } catch (error) {
    status.textContent = `service unreachable at ${serviceUrl()}: ${error}`;
    return;
  }

  SWATCHES.forEach((color) => {
    const swatch = document.createElement("button");
    swatch.className = "swatch";
    swatch.style.background = `rgb(${color.join(",")})`;
    swatch.addEventListener("click", () => {
      activeColor = color;
      if (selected >= 0) {
        session.items[selected] = { ...session.items[selected], color };
        redraw();
      }
    });
    swatchBox.appendChild(swatch);
  });

  // ---- pointer gestures ----
  let dragging = false;
  let rotating = false;
  let lastX = 0;
  let lastY = 0;

  const toModel = (event: MouseEvent): [number, number] => {
    const rect = canvas.getBoundingClientRect();
    return [
      (event.clientX - rect.left - canvas.width / 2) / CANVAS_SCALE,
      (event.clientY - rect.top - canvas.height / 2) / CANVAS_SCALE,
    ];
  };

  canvas.addEventListener("mousedown", (event) => {
    const [mx, my] = toModel(event);
    selected = -1;
    session.items.forEach((item, idx) => {
      const dx = mx - item.transform.tx;
      const dy = my - item.transform.ty;
      if (Math.hypot(dx, dy) < 2.5 * item.transform.s) selected = idx;
    });
    dragging = selected >= 0;
    rotating = event.shiftKey;
    lastX = mx;
    lastY = my;
    redraw();
  });

  canvas.addEventListener("mousemove", (event) => {
    if (!dragging || selected < 0) return;
    const [mx, my] = toModel(event);
    const item = session.items[selected];
    if (rotating) {
      const t = item.transform;
      const before = Math.atan2(lastY - t.ty, lastX - t.tx);
      const after = Math.atan2(my - t.ty, mx - t.tx);
      session.updateItem(selected, rotated(t, after - before));
    } else {
      session.updateItem(selected, dragged(item.transform, mx - lastX, my - lastY));
    }
    lastX = mx;
    lastY = my;
    redraw();
  });

  canvas.addEventListener("mouseup", () => {
    dragging = false;
  });

  canvas.addEventListener(
    "wheel",
    (event) => {
      if (selected < 0) return;
      event.preventDefault();
      const factor = event.deltaY < 0 ? 1.1 : 1 / 1.1;
      session.updateItem(selected, scaled(session.items[selected].transform, factor));
      redraw();
    },
    { passive: false },
  );

  // ---- submission ----
  const submit = async () => {
    if (session.items.length === 0) {
      status.textContent = "add a shape before searching";
      return;
    }
    session.pushUndo();
    const doc = session.description();
    const seq = session.nextSeq();
    status.textContent = "searching...";
    try {
      const response = await client.query(doc);
      if (session.applyResults(seq, response.results)) {
        status.textContent = `${response.results.length} image(s)`;
        showResults();
      }
    } catch (error: unknown) {
      const detail = String((error as Error).message ?? error);
      status.textContent = detail.includes("overlap")
        ? `unsatisfiable sketch: ${detail}`
        : `query failed: ${detail}`;
    }
  };

  document.getElementById("search")!.addEventListener("click", submit);
  document.getElementById("undo")!.addEventListener("click", () => {
    if (session.undo()) {
      selected = -1;
      redraw();
      showResults();
      status.textContent = `${session.resultCount} image(s) (restored)`;
    }
  });
  document.getElementById("clear")!.addEventListener("click", () => {
    session.pushUndo();
    session.items = [];
    selected = -1;
    redraw();
  });

  redraw();
  const health = await client.health();
  status.textContent = `connected: ${health.images} images, ${health.descriptions} descriptions`;
}

start();
