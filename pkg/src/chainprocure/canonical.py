"""Canonical JSON serialization and SHA-256 helpers.

Every digest in the system (block hashes, transaction ids, tx roots,
fingerprints, multisig addresses) is SHA-256 over the same byte encoding:
UTF-8 JSON with lexicographically sorted keys, no insignificant whitespace,
integers in base 10, and binary values as lowercase hex strings. Floats are
rejected outright so serialized bytes can never drift across platforms.
"""

from __future__ import annotations

import hashlib
import json
import re

from .errors import InvalidInput

ZERO_HASH = "0" * 64

_HEX_DIGEST_RE = re.compile(r"^[0-9a-f]{64}$")


def _check_canonical(value: object) -> None:
    if value is None or isinstance(value, (bool, str)):
        return
    if isinstance(value, float):
        raise InvalidInput("floats are not canonically serializable")
    if isinstance(value, int):
        return
    if isinstance(value, (list, tuple)):
        for item in value:
            _check_canonical(item)
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise InvalidInput("object keys must be strings")
            _check_canonical(item)
        return
    raise InvalidInput(f"type {type(value).__name__} is not canonically serializable")


def canonical_json_bytes(value: object) -> bytes:
    """Serialize to the canonical byte encoding used for all hashing."""
    _check_canonical(value)
    return json.dumps(
        value, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_of(value: object) -> str:
    """SHA-256 hex digest of a value's canonical serialization."""
    return sha256_hex(canonical_json_bytes(value))


def is_hex_digest(value: object) -> bool:
    """True iff value renders a 32-byte digest as lowercase hex."""
    return isinstance(value, str) and bool(_HEX_DIGEST_RE.match(value))


def require_hex_digest(value: object, what: str = "digest") -> str:
    if not is_hex_digest(value):
        raise InvalidInput(f"{what} must be 64 lowercase hex chars")
    return value  # type: ignore[return-value]
