// Turn canvas state into a description document for the service.
//
// Untextured items serialize as explicit zero vectors (the engine treats
// null and zeros identically, but the service always echoes the vector, and
// round-trips are compared byte for byte).

import type { CanvasItem, DescriptionDoc } from "./types.js";

export const TEXTURE_DIM = 24;

export function buildDescription(id: string, items: CanvasItem[]): DescriptionDoc {
  if (items.length === 0) {
    throw new Error("canvas is empty: add at least one shape");
  }
  return {
    id,
    components: items.map((item) => ({
      shape: item.shapeId,
      color: [...item.color] as [number, number, number],
      texture: item.texture ? [...item.texture] : new Array(TEXTURE_DIM).fill(0),
      transform: { ...item.transform },
    })),
  };
}
