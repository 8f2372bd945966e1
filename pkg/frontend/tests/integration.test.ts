// End-to-end tests against a live service instance (spawned by the global
// setup). Covers the echo round trip, the scripted refinement loop, and the
// overlap warning surface.

import { beforeAll, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { canonicalJson } from "../src/canonical.js";
import { SketchSession } from "../src/state.js";
import { applyToPoints, dragged, rotated, scaled } from "../src/transform.js";
import type { PaletteShape, SegmentedImageDoc } from "../src/types.js";

const BASE = process.env.SHAPESEARCH_URL ?? "http://127.0.0.1:8561";

const RED: [number, number, number] = [255, 0, 0];
const BLUE: [number, number, number] = [72.85714285714282, 0, 255];
const GREEN: [number, number, number] = [72.85714285714285, 255, 0];

let client: ServiceClient;
let palette: Map<string, PaletteShape>;

function poseCanvas(session: SketchSession, steps: number): void {
  // Step 1: a red circle at the origin; step 2 adds a blue square to the
  // right; step 3 adds a green rotated triangle above.
  session.addItem("circle", RED);
  if (steps >= 2) {
    session.addItem("square", BLUE);
    session.updateItem(1, dragged(session.items[1].transform, 8, 0));
  }
  if (steps >= 3) {
    session.addItem("triangle", GREEN);
    session.updateItem(
      2,
      scaled(rotated(dragged(session.items[2].transform, 0, 8), 0.5), 1.5),
    );
  }
}

function sceneDoc(id: string, session: SketchSession): SegmentedImageDoc {
  return {
    id,
    regions: session.items.map((item) => ({
      contour: applyToPoints(item.transform, palette.get(item.shapeId)!.points),
      color: item.color,
      texture: item.texture,
    })),
  };
}

beforeAll(async () => {
  client = new ServiceClient(BASE);
  const shapes = await client.shapes();
  palette = new Map(shapes.map((s) => [s.id, s]));
  // Seed one image per refinement stage, ignoring duplicates on re-runs.
  for (const steps of [1, 2, 3]) {
    const session = new SketchSession();
    poseCanvas(session, steps);
    try {
      await client.ingestImage(sceneDoc(`stage${steps}`, session));
    } catch (error: any) {
      if (error.status !== 409) throw error;
    }
  }
});

describe("description echo", () => {
  it("round-trips canvas descriptions bit-identically", async () => {
    const session = new SketchSession();
    poseCanvas(session, 3);
    const doc = session.description();
    const echoed = await client.echoDescription(doc);
    expect(echoed).toBe(canonicalJson(doc));
  });

  it("echo is a fixed point", async () => {
    const session = new SketchSession();
    poseCanvas(session, 2);
    const first = await client.echoDescription(session.description());
    const second = await client.echoDescription(JSON.parse(first));
    expect(second).toBe(first);
  });
});

describe("scripted refinement", () => {
  it("shows non-increasing result counts over three steps", async () => {
    const session = new SketchSession();
    const counts: number[] = [];
    const resultSets: string[][] = [];
    for (const steps of [1, 2, 3]) {
      session.items = [];
      poseCanvas(session, steps);
      const seq = session.nextSeq();
      const response = await client.query(session.description());
      expect(session.applyResults(seq, response.results)).toBe(true);
      counts.push(session.resultCount);
      resultSets.push(response.results.map((r) => r.image_id));
    }
    expect(counts[0]).toBeGreaterThan(0);
    expect(counts[0]).toBeGreaterThanOrEqual(counts[1]);
    expect(counts[1]).toBeGreaterThanOrEqual(counts[2]);
    // refinement keeps subsets, and dropped images are surfaced for diffing
    expect(resultSets[1].every((id) => resultSets[0].includes(id))).toBe(true);
    expect(resultSets[2].every((id) => resultSets[1].includes(id))).toBe(true);
    for (const id of session.results?.dropped ?? []) {
      expect(resultSets[1]).toContain(id);
    }
  });

  it("grid order follows the API response order", async () => {
    const session = new SketchSession();
    poseCanvas(session, 1);
    const response = await client.query(session.description());
    session.applyResults(session.nextSeq(), response.results);
    expect(session.results?.rows.map((r) => r.image_id)).toEqual(
      response.results.map((r) => r.image_id),
    );
    const scores = response.results.map((r) => r.score);
    expect([...scores].sort((a, b) => b - a)).toEqual(scores);
  });

  it("stale responses never overwrite fresher results", async () => {
    const session = new SketchSession();
    poseCanvas(session, 2);
    const docCoarse = session.description();
    session.items = [];
    poseCanvas(session, 3);
    const docFine = session.description();

    const seqCoarse = session.nextSeq();
    const seqFine = session.nextSeq();
    const fine = await client.query(docFine);
    expect(session.applyResults(seqFine, fine.results)).toBe(true);
    const coarse = await client.query(docCoarse);
    expect(session.applyResults(seqCoarse, coarse.results)).toBe(false);
    expect(session.resultCount).toBe(fine.results.length);
  });
});

describe("overlap warning", () => {
  it("unsatisfiable sketches are reported by the service", async () => {
    const session = new SketchSession();
    session.addItem("square", RED);
    session.addItem("square", BLUE); // coincident with the first
    await expect(client.query(session.description())).rejects.toThrow(/unsatisfiable/);
  });
});

describe("thumbnails", () => {
  it("stored images are fetchable as segmented documents", async () => {
    const doc = await client.image("stage2");
    expect(doc.regions).toHaveLength(2);
    expect(doc.regions[0].contour.length).toBeGreaterThanOrEqual(3);
  });
});
