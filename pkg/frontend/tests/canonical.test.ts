// Cross-component agreement: the browser's canonical JSON and fingerprints
// must be byte-identical to the server's over the shared 50-vector corpus.

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, test } from "vitest";

import { canonicalJson, hexToBytes } from "../src/canonical.js";
import { digestOf, sha256Hex } from "../src/crypto.js";

interface Vector {
  value: unknown;
  canonical: string;
  value_sha256: string;
  blob_hex: string;
  blob_sha256: string;
}

const corpusPath = fileURLToPath(
  new URL("../shared/digest-corpus.json", import.meta.url),
);
const vectors: Vector[] = JSON.parse(readFileSync(corpusPath, "utf-8")).vectors;

describe("shared digest corpus", () => {
  test("has the agreed size", () => {
    expect(vectors.length).toBe(50);
  });

  test("canonical JSON matches the server byte for byte", () => {
    for (const vector of vectors) {
      expect(canonicalJson(vector.value)).toBe(vector.canonical);
    }
  });

  test("value digests match the server", async () => {
    for (const vector of vectors) {
      expect(await digestOf(vector.value)).toBe(vector.value_sha256);
    }
  });

  test("blob fingerprints match the server", async () => {
    for (const vector of vectors) {
      expect(await sha256Hex(hexToBytes(vector.blob_hex))).toBe(vector.blob_sha256);
    }
  });
});

describe("canonicalJson rules", () => {
  test("sorts keys by code point", () => {
    expect(canonicalJson({ b: 1, a: 2, C: 3 })).toBe('{"C":3,"a":2,"b":1}');
    expect(canonicalJson({ "é": 1, z: 2 })).toBe('{"z":2,"é":1}');
  });

  test("rejects non-integer numbers", () => {
    expect(() => canonicalJson({ price: 1.5 })).toThrow();
    expect(() => canonicalJson(Number.MAX_SAFE_INTEGER + 2)).toThrow();
  });

  test("known digest for the empty object", async () => {
    expect(await sha256Hex("")).toBe(
      "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
    );
  });
});
