import { describe, expect, it } from "vitest";

import { buildDescription } from "../src/description.js";
import { SketchSession } from "../src/state.js";
import { dragged } from "../src/transform.js";
import type { ResultRow } from "../src/types.js";

function row(id: string, score: number): ResultRow {
  return { image_id: id, score, breakdown: {}, mapping: [0] };
}

describe("buildDescription", () => {
  it("emits one component per item with the accumulated pose", () => {
    const session = new SketchSession();
    session.addItem("circle", [255, 0, 0]);
    session.addItem("square", [0, 0, 255], Array(24).fill(0.5));
    session.updateItem(1, dragged(session.items[1].transform, 4, -2));
    const doc = buildDescription("q", session.items);
    expect(doc.components).toHaveLength(2);
    expect(doc.components[0].transform).toEqual({ tx: 0, ty: 0, theta: 0, s: 1 });
    expect(doc.components[1].transform).toEqual({ tx: 4, ty: -2, theta: 0, s: 1 });
    expect(doc.components[1].texture).toHaveLength(24);
  });

  it("rejects an empty canvas", () => {
    expect(() => buildDescription("q", [])).toThrow(/empty/);
  });
});

describe("query sequencing", () => {
  it("ignores stale responses", () => {
    const session = new SketchSession();
    session.addItem("circle", [255, 0, 0]);
    const first = session.nextSeq();
    const second = session.nextSeq();
    expect(session.applyResults(second, [row("a", 0.9)])).toBe(true);
    // the older in-flight response arrives late and must be dropped
    expect(session.applyResults(first, [row("b", 0.8)])).toBe(false);
    expect(session.results?.rows.map((r) => r.image_id)).toEqual(["a"]);
  });

  it("rejects unknown sequence numbers", () => {
    const session = new SketchSession();
    expect(session.applyResults(99, [])).toBe(false);
  });
});

describe("refinement bookkeeping", () => {
  it("marks images dropped by a refinement", () => {
    const session = new SketchSession();
    session.addItem("circle", [255, 0, 0]);
    session.applyResults(session.nextSeq(), [row("a", 0.99), row("b", 0.8)]);
    session.applyResults(session.nextSeq(), [row("a", 0.97)]);
    expect(session.results?.rows.map((r) => r.image_id)).toEqual(["a"]);
    expect(session.results?.dropped).toEqual(["b"]);
  });

  it("undo restores the canvas and the previous result set exactly", () => {
    const session = new SketchSession();
    session.addItem("circle", [255, 0, 0]);
    session.pushUndo();
    session.applyResults(session.nextSeq(), [row("a", 0.99), row("b", 0.8)]);
    const before = session.results;

    session.pushUndo(); // snapshot taken right before the refining query
    session.addItem("square", [0, 0, 255]);
    session.applyResults(session.nextSeq(), [row("a", 0.95)]);
    expect(session.resultCount).toBe(1);

    expect(session.undo()).toBe(true); // undoes addItem's snapshot
    expect(session.undo()).toBe(true); // back to the pre-refinement snapshot
    expect(session.items).toHaveLength(1);
    expect(session.results).toEqual(before);
  });
});
