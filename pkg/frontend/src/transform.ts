// Similarity transform helpers matching the engine's conventions:
// p -> s * R(theta) * p + (tx, ty), rotation counter-clockwise in radians.

import type { Transform } from "./types.js";

const TWO_PI = 2 * Math.PI;

export function identity(): Transform {
  return { tx: 0, ty: 0, theta: 0, s: 1 };
}

export function compose(outer: Transform, inner: Transform): Transform {
  const c = Math.cos(outer.theta);
  const sn = Math.sin(outer.theta);
  return {
    tx: outer.s * (c * inner.tx - sn * inner.ty) + outer.tx,
    ty: outer.s * (sn * inner.tx + c * inner.ty) + outer.ty,
    theta: mod2pi(outer.theta + inner.theta),
    s: outer.s * inner.s,
  };
}

export function applyToPoint(t: Transform, p: [number, number]): [number, number] {
  const c = Math.cos(t.theta);
  const sn = Math.sin(t.theta);
  return [
    t.s * (c * p[0] - sn * p[1]) + t.tx,
    t.s * (sn * p[0] + c * p[1]) + t.ty,
  ];
}

export function applyToPoints(t: Transform, pts: number[][]): number[][] {
  return pts.map((p) => applyToPoint(t, [p[0], p[1]]));
}

export function mod2pi(theta: number): number {
  const r = theta % TWO_PI;
  return r < 0 ? r + TWO_PI : r;
}

// Canvas gestures update an item's pose in place. Basic shapes are centered
// at the origin, so an item's on-canvas centroid is exactly (tx, ty): a
// rotation or scaling about the item centroid leaves the translation alone.

export function dragged(t: Transform, dx: number, dy: number): Transform {
  return { ...t, tx: t.tx + dx, ty: t.ty + dy };
}

export function rotated(t: Transform, phi: number): Transform {
  return { ...t, theta: mod2pi(t.theta + phi) };
}

export function scaled(t: Transform, factor: number): Transform {
  if (factor <= 0) throw new Error(`scale factor must be positive, got ${factor}`);
  return { ...t, s: t.s * factor };
}
