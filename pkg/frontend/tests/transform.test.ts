import { describe, expect, it } from "vitest";

import {
  applyToPoint,
  compose,
  dragged,
  identity,
  rotated,
  scaled,
} from "../src/transform.js";

describe("transform composition", () => {
  it("matches the engine convention on a known case", () => {
    // s=2, theta=pi/2, t=(2,2) maps (1,0) to (2,4)
    const t = { tx: 2, ty: 2, theta: Math.PI / 2, s: 2 };
    const [x, y] = applyToPoint(t, [1, 0]);
    expect(x).toBeCloseTo(2, 12);
    expect(y).toBeCloseTo(4, 12);
  });

  it("compose agrees with sequential application", () => {
    const a = { tx: 3, ty: -1, theta: 0.7, s: 1.4 };
    const b = { tx: -2, ty: 5, theta: 2.1, s: 0.6 };
    const p: [number, number] = [1.3, -0.4];
    const viaCompose = applyToPoint(compose(a, b), p);
    const sequential = applyToPoint(a, applyToPoint(b, p));
    expect(viaCompose[0]).toBeCloseTo(sequential[0], 10);
    expect(viaCompose[1]).toBeCloseTo(sequential[1], 10);
  });

  it("identity composes neutrally", () => {
    const t = { tx: 1, ty: 2, theta: 0.5, s: 1.5 };
    expect(compose(t, identity())).toEqual(t);
  });
});

describe("canvas gestures", () => {
  it("fresh palette item carries the identity transform", () => {
    expect(identity()).toEqual({ tx: 0, ty: 0, theta: 0, s: 1 });
  });

  it("dragging accumulates a translation", () => {
    const t = dragged(dragged(identity(), 3, 4), -1, 2);
    expect(t).toEqual({ tx: 2, ty: 6, theta: 0, s: 1 });
  });

  it("rotate then scale equals the composed transform", () => {
    // Rotations and scalings act about the item centroid, which sits at the
    // transform's translation; starting from identity both act at origin and
    // agree with plain composition.
    const viaGestures = scaled(rotated(identity(), Math.PI / 6), 2);
    const composed = compose(
      { tx: 0, ty: 0, theta: 0, s: 2 },
      compose({ tx: 0, ty: 0, theta: Math.PI / 6, s: 1 }, identity()),
    );
    expect(viaGestures.theta).toBeCloseTo(composed.theta, 12);
    expect(viaGestures.s).toBeCloseTo(composed.s, 12);
    expect(viaGestures.tx).toBeCloseTo(composed.tx, 12);
    expect(viaGestures.ty).toBeCloseTo(composed.ty, 12);
  });

  it("rotation and scaling keep the item centroid fixed", () => {
    const posed = dragged(identity(), 5, -3);
    const spun = scaled(rotated(posed, 1.1), 1.7);
    expect(spun.tx).toBe(5);
    expect(spun.ty).toBe(-3);
  });

  it("rejects nonpositive scale factors", () => {
    expect(() => scaled(identity(), 0)).toThrow();
  });
});
