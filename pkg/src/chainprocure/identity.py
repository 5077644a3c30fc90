"""Key generation, address derivation, signing and verification.

Ed25519 throughout: signatures are deterministic for a fixed key and
message, which keeps re-serialized transactions byte-identical across
runs. Addresses are the first 20 bytes of SHA-256 over the raw public
key, hex-encoded behind a "bp1" prefix. Private keys never enter ledger
state; they live with the caller.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature as _CryptoInvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .errors import BadSeed, InvalidInput, MalformedKey

ADDRESS_PREFIX = "bp1"
SEED_BYTES = 32
KEY_BYTES = 32
SIGNATURE_BYTES = 64


@dataclass(frozen=True)
class KeyPair:
    private_key: bytes
    public_key: bytes

    @property
    def address(self) -> str:
        return derive_address(self.public_key)


def generate_keypair(seed: bytes | None = None) -> KeyPair:
    """Generate a key pair, deterministically when a 32-byte seed is given."""
    if seed is not None:
        if not isinstance(seed, (bytes, bytearray)) or len(seed) != SEED_BYTES:
            raise BadSeed(f"seed must be exactly {SEED_BYTES} bytes")
        private = Ed25519PrivateKey.from_private_bytes(bytes(seed))
    else:
        private = Ed25519PrivateKey.generate()
    return KeyPair(
        private_key=private.private_bytes_raw(),
        public_key=private.public_key().public_bytes_raw(),
    )


def derive_address(public_key: bytes) -> str:
    """Address = "bp1" + hex of the first 20 bytes of SHA-256(public_key)."""
    if not isinstance(public_key, (bytes, bytearray)) or len(public_key) != KEY_BYTES:
        raise MalformedKey("public key must be 32 raw Ed25519 bytes")
    return ADDRESS_PREFIX + hashlib.sha256(bytes(public_key)).digest()[:20].hex()


def is_address(value: object) -> bool:
    if not isinstance(value, str) or not value.startswith(ADDRESS_PREFIX):
        return False
    payload = value[len(ADDRESS_PREFIX):]
    return len(payload) == 40 and all(c in "0123456789abcdef" for c in payload)


def sign(private_key: bytes, digest: bytes) -> bytes:
    """Sign a 32-byte digest; deterministic for a fixed key and digest."""
    if not isinstance(digest, (bytes, bytearray)) or len(digest) != 32:
        raise InvalidInput("digest must be exactly 32 bytes")
    try:
        key = Ed25519PrivateKey.from_private_bytes(bytes(private_key))
    except Exception as exc:
        raise MalformedKey("private key must be 32 raw Ed25519 bytes") from exc
    return key.sign(bytes(digest))


def verify(public_key: bytes, digest: bytes, signature: bytes) -> bool:
    """True iff signature was produced over digest by the paired private key.

    Malformed inputs of any kind return False rather than raising.
    """
    try:
        key = Ed25519PublicKey.from_public_bytes(bytes(public_key))
        key.verify(bytes(signature), bytes(digest))
        return True
    except (_CryptoInvalidSignature, ValueError, TypeError):
        return False


def save_keypair(path: str | os.PathLike, keypair: KeyPair) -> None:
    payload = {
        "private_key": keypair.private_key.hex(),
        "public_key": keypair.public_key.hex(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_keypair(path: str | os.PathLike) -> KeyPair:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        private = bytes.fromhex(payload["private_key"])
        public = bytes.fromhex(payload["public_key"])
    except (KeyError, ValueError, TypeError) as exc:
        raise MalformedKey(f"unreadable key file {path}") from exc
    if len(private) != KEY_BYTES or len(public) != KEY_BYTES:
        raise MalformedKey(f"key file {path} has wrong key lengths")
    return KeyPair(private_key=private, public_key=public)
