// In-browser wallet: keys live in memory and optionally local storage.
// The private key never leaves the page; only signatures are sent.

import { hexToBytes } from "./canonical.js";
import { generateEd25519, publicKeyFromPrivate, sha256Hex } from "./crypto.js";

export interface SessionKeys {
  privateKey: string;
  publicKey: string;
  address: string;
}

const STORAGE_KEY = "chainprocure.wallet";

export async function deriveAddress(publicKeyHex: string): Promise<string> {
  if (hexToBytes(publicKeyHex).length !== 32) throw new Error("malformed public key");
  const digest = await sha256Hex(hexToBytes(publicKeyHex));
  return "bp1" + digest.slice(0, 40);
}

export async function generateWallet(): Promise<SessionKeys> {
  const pair = await generateEd25519();
  return { ...pair, address: await deriveAddress(pair.publicKey) };
}

// Accepts the service's key-file format: {"private_key": hex, "public_key": hex}
export async function walletFromJson(text: string): Promise<SessionKeys> {
  const parsed = JSON.parse(text) as Record<string, unknown>;
  const privateKey = parsed["private_key"];
  if (typeof privateKey !== "string" || hexToBytes(privateKey).length !== 32) {
    throw new Error("key file needs a 32-byte hex private_key");
  }
  const publicKey =
    typeof parsed["public_key"] === "string" && parsed["public_key"].length === 64
      ? (parsed["public_key"] as string)
      : await publicKeyFromPrivate(privateKey);
  const derived = await publicKeyFromPrivate(privateKey);
  if (derived !== publicKey) throw new Error("public_key does not match private_key");
  return { privateKey, publicKey, address: await deriveAddress(publicKey) };
}

export function walletToJson(session: SessionKeys): string {
  return JSON.stringify({
    private_key: session.privateKey,
    public_key: session.publicKey,
  });
}

export function saveSession(session: SessionKeys): void {
  try {
    localStorage.setItem(STORAGE_KEY, walletToJson(session));
  } catch {
    // storage unavailable (private mode, non-browser); session stays in memory
  }
}

export async function loadSession(): Promise<SessionKeys | null> {
  try {
    const stored = localStorage.getItem(STORAGE_KEY);
    return stored ? await walletFromJson(stored) : null;
  } catch {
    return null;
  }
}

export function clearSession(): void {
  try {
    localStorage.removeItem(STORAGE_KEY);
  } catch {
    // ignore
  }
}
