// WebCrypto Ed25519 and SHA-256. Signatures here are byte-identical to the
// server's (deterministic Ed25519 over the same digests), so a transaction
// signed in the page verifies on-chain.

import { bytesToHex, canonicalJson, hexToBytes, utf8Bytes } from "./canonical.js";

// PKCS#8 wrapper for a raw 32-byte Ed25519 seed.
const PKCS8_PREFIX = "302e020100300506032b657004220420";

function subtle(): SubtleCrypto {
  const c = globalThis.crypto;
  if (!c || !c.subtle) throw new Error("WebCrypto is not available");
  return c.subtle;
}

export async function sha256Hex(data: Uint8Array | string): Promise<string> {
  const bytes = typeof data === "string" ? utf8Bytes(data) : data;
  const digest = await subtle().digest("SHA-256", bytes as BufferSource);
  return bytesToHex(new Uint8Array(digest));
}

export async function digestOf(value: unknown): Promise<string> {
  return sha256Hex(canonicalJson(value));
}

export interface RawKeyPair {
  privateKey: string; // 32-byte seed, hex
  publicKey: string; // 32-byte raw public key, hex
}

export async function generateEd25519(): Promise<RawKeyPair> {
  const pair = (await subtle().generateKey({ name: "Ed25519" }, true, [
    "sign",
    "verify",
  ])) as CryptoKeyPair;
  const pkcs8 = new Uint8Array(await subtle().exportKey("pkcs8", pair.privateKey));
  const raw = new Uint8Array(await subtle().exportKey("raw", pair.publicKey));
  return {
    privateKey: bytesToHex(pkcs8.slice(pkcs8.length - 32)),
    publicKey: bytesToHex(raw),
  };
}

export async function publicKeyFromPrivate(privateHex: string): Promise<string> {
  // exportKey("jwk") carries the public half for Ed25519 private keys
  const key = await importPrivate(privateHex);
  const jwk = await subtle().exportKey("jwk", key);
  if (!jwk.x) throw new Error("could not derive public key");
  return bytesToHex(base64UrlToBytes(jwk.x));
}

async function importPrivate(privateHex: string): Promise<CryptoKey> {
  const pkcs8 = hexToBytes(PKCS8_PREFIX + privateHex);
  return subtle().importKey("pkcs8", pkcs8 as BufferSource, { name: "Ed25519" }, true, ["sign"]);
}

export async function signDigest(privateHex: string, digestHex: string): Promise<string> {
  const key = await importPrivate(privateHex);
  const sig = await subtle().sign({ name: "Ed25519" }, key, hexToBytes(digestHex) as BufferSource);
  return bytesToHex(new Uint8Array(sig));
}

export async function verifyDigest(
  publicHex: string,
  digestHex: string,
  signatureHex: string,
): Promise<boolean> {
  try {
    const key = await subtle().importKey(
      "raw",
      hexToBytes(publicHex) as BufferSource,
      { name: "Ed25519" },
      false,
      ["verify"],
    );
    return await subtle().verify(
      { name: "Ed25519" },
      key,
      hexToBytes(signatureHex) as BufferSource,
      hexToBytes(digestHex) as BufferSource,
    );
  } catch {
    return false;
  }
}

function base64UrlToBytes(b64url: string): Uint8Array {
  const b64 = b64url.replace(/-/g, "+").replace(/_/g, "/");
  const padded = b64 + "=".repeat((4 - (b64.length % 4)) % 4);
  const binary = atob(padded);
  const out = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) out[i] = binary.charCodeAt(i);
  return out;
}
