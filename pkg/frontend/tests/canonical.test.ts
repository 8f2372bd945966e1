import { describe, expect, it } from "vitest";

import { canonicalJson } from "../src/canonical.js";

describe("canonical JSON", () => {
  it("sorts keys recursively and stays compact", () => {
    const doc = { b: 1, a: { z: true, m: [3, 2] } };
    expect(canonicalJson(doc)).toBe('{"a":{"m":[3,2],"z":true},"b":1}');
  });

  it("renders integral floats as integers", () => {
    expect(canonicalJson({ x: 1.0, y: [2.0, 2.5] })).toBe('{"x":1,"y":[2,2.5]}');
  });

  it("keeps shortest round-trip decimals", () => {
    expect(canonicalJson({ v: 0.1 })).toBe('{"v":0.1}');
    expect(canonicalJson({ v: Math.PI })).toBe('{"v":3.141592653589793}');
  });

  it("is stable under re-parsing", () => {
    const doc = {
      id: "q",
      components: [
        {
          shape: "circle",
          color: [255, 0, 0],
          texture: null,
          transform: { tx: 1.5, ty: -2, theta: 0.7853981633974483, s: 2 },
        },
      ],
    };
    const once = canonicalJson(doc);
    expect(canonicalJson(JSON.parse(once))).toBe(once);
  });
});
