// Session state: canvas items, query lifecycle, refinement diffing, undo.
//
// At most one query matters at a time: every submission takes a sequence
// number and responses arriving out of order are dropped. Refinement keeps
// the previous result set so the view can mark images that fell out.

import { buildDescription } from "./description.js";
import { identity } from "./transform.js";
import type { CanvasItem, DescriptionDoc, ResultRow } from "./types.js";

export interface ResultsView {
  rows: ResultRow[];
  dropped: string[]; // ids retrieved by the previous query but not this one
}

interface Snapshot {
  items: CanvasItem[];
  results: ResultsView | null;
}

function cloneItems(items: CanvasItem[]): CanvasItem[] {
  return items.map((item) => ({
    ...item,
    transform: { ...item.transform },
    color: [...item.color] as [number, number, number],
    texture: item.texture ? [...item.texture] : null,
  }));
}

export class SketchSession {
  items: CanvasItem[] = [];
  results: ResultsView | null = null;

  private seq = 0;
  private applied = 0;
  private undoStack: Snapshot[] = [];
  private queryCounter = 0;

  addItem(shapeId: string, color: [number, number, number], texture: number[] | null = null): CanvasItem {
    this.pushUndo();
    const item: CanvasItem = { shapeId, transform: identity(), color, texture };
    this.items.push(item);
    return item;
  }

  removeItem(index: number): void {
    this.pushUndo();
    this.items.splice(index, 1);
  }

  updateItem(index: number, transform: CanvasItem["transform"]): void {
    this.items[index] = { ...this.items[index], transform: { ...transform } };
  }

  description(): DescriptionDoc {
    this.queryCounter += 1;
    return buildDescription(`sketch-${this.queryCounter}`, this.items);
  }

  // ---- query sequencing ----

  nextSeq(): number {
    this.seq += 1;
    return this.seq;
  }

  /** Apply a response; stale (out-of-order) responses are ignored. */
  applyResults(seq: number, rows: ResultRow[]): boolean {
    if (seq <= this.applied || seq > this.seq) {
      return false;
    }
    this.applied = seq;
    const previous = this.results?.rows.map((r) => r.image_id) ?? [];
    const current = new Set(rows.map((r) => r.image_id));
    this.results = {
      rows,
      dropped: previous.filter((id) => !current.has(id)),
    };
    return true;
  }

  // ---- refinement / undo ----

  pushUndo(): void {
    this.undoStack.push({
      items: cloneItems(this.items),
      results: this.results
        ? { rows: [...this.results.rows], dropped: [...this.results.dropped] }
        : null,
    });
  }

  /** Restore the canvas and the previously displayed result set exactly. */
  undo(): boolean {
    const snapshot = this.undoStack.pop();
    if (!snapshot) return false;
    this.items = snapshot.items;
    this.results = snapshot.results;
    return true;
  }

  get resultCount(): number {
    return this.results?.rows.length ?? 0;
  }
}
