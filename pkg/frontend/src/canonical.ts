// Canonical JSON shared with the service: keys sorted, compact separators,
// integral floats collapsed to integers. Both sides emit shortest round-trip
// decimal for doubles, so canonical renderings compare byte for byte.

type JsonValue = null | boolean | number | string | JsonValue[] | { [key: string]: JsonValue };

function canonicalize(value: JsonValue): JsonValue {
  if (Array.isArray(value)) {
    return value.map(canonicalize);
  }
  if (value !== null && typeof value === "object") {
    const out: { [key: string]: JsonValue } = {};
    for (const key of Object.keys(value).sort()) {
      out[key] = canonicalize(value[key]);
    }
    return out;
  }
  return value; // numbers already collapse: JSON.stringify(1.0) === "1"
}

export function canonicalJson(doc: unknown): string {
  return JSON.stringify(canonicalize(doc as JsonValue));
}
