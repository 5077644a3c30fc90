// Canonical JSON, byte-identical to the server's encoding: sorted keys
// (by code point), no insignificant whitespace, integers only, UTF-8.

export function canonicalJson(value: unknown): string {
  if (value === null) return "null";
  const kind = typeof value;
  if (kind === "boolean") return value ? "true" : "false";
  if (kind === "number") {
    const n = value as number;
    if (!Number.isInteger(n) || !Number.isSafeInteger(n)) {
      throw new Error("only safe integers are canonically serializable");
    }
    return String(n);
  }
  if (kind === "string") return JSON.stringify(value);
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  if (kind === "object") {
    const entries = Object.entries(value as Record<string, unknown>);
    entries.sort((a, b) => compareCodePoints(a[0], b[0]));
    const parts = entries.map(([k, v]) => JSON.stringify(k) + ":" + canonicalJson(v));
    return "{" + parts.join(",") + "}";
  }
  throw new Error(`type ${kind} is not canonically serializable`);
}

// Sort keys by Unicode code point, matching the server, not by UTF-16 unit.
function compareCodePoints(a: string, b: string): number {
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    const ca = a.codePointAt(i)!;
    const cb = b.codePointAt(j)!;
    if (ca !== cb) return ca - cb;
    i += ca > 0xffff ? 2 : 1;
    j += cb > 0xffff ? 2 : 1;
  }
  return a.length - i - (b.length - j);
}

export function bytesToHex(bytes: Uint8Array): string {
  let out = "";
  for (const b of bytes) out += b.toString(16).padStart(2, "0");
  return out;
}

export function hexToBytes(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || /[^0-9a-f]/.test(hex)) {
    throw new Error("malformed hex");
  }
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(i * 2, i * 2 + 2), 16);
  }
  return out;
}

export function utf8Bytes(text: string): Uint8Array {
  return new TextEncoder().encode(text);
}
