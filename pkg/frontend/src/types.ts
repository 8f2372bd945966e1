// Shared types mirroring the service's JSON interfaces.

export interface Transform {
  tx: number;
  ty: number;
  theta: number; // radians, counter-clockwise
  s: number; // uniform scale, > 0
}

export type ShapeRef = string | { points: number[][] };

export interface ComponentDoc {
  shape: ShapeRef;
  color: [number, number, number];
  texture: number[] | null;
  transform: Transform;
}

export interface DescriptionDoc {
  id: string;
  components: ComponentDoc[];
}

export interface PaletteShape {
  id: string;
  points: number[][];
}

export interface CanvasItem {
  shapeId: string;
  transform: Transform;
  color: [number, number, number];
  texture: number[] | null;
}

export interface ResultRow {
  image_id: string;
  score: number;
  breakdown: Record<string, number>;
  mapping: number[];
}

export interface QueryResponse {
  query_id: string;
  results: ResultRow[];
}

export interface RegionDoc {
  contour: number[][];
  color: [number, number, number];
  texture: number[] | null;
}

export interface SegmentedImageDoc {
  id: string;
  regions: RegionDoc[];
}
