"""Document fingerprinting, on-chain notarization records, and auditing.

Only fingerprints (SHA-256 of the exact byte stream) ever reach the
ledger; document bytes stay with their owners. Auditing a fingerprint
scans the chain for every notarization carrying it, oldest first, so a
caller can confirm a file is the one that was recorded and see its full
provenance. Audits are pure reads.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from . import ledger
from .canonical import require_hex_digest
from .errors import InvalidInput

MAX_LABEL_LENGTH = 256


@dataclass(frozen=True)
class NotarizationRecord:
    fingerprint: str
    owner: str
    tx_id: str
    block_height: int
    timestamp: int
    label: str

    def to_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "owner": self.owner,
            "tx_id": self.tx_id,
            "block_height": self.block_height,
            "timestamp": self.timestamp,
            "label": self.label,
        }


@dataclass
class AuditResult:
    found: bool
    records: list[NotarizationRecord]

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "records": [r.to_dict() for r in self.records],
        }


def fingerprint(data: bytes) -> str:
    """SHA-256 hex digest of the exact byte stream; empty input allowed."""
    return hashlib.sha256(data).hexdigest()


def fingerprint_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def make_notarize_body(
    fingerprint_hex: str, owner: str, label: str, ref: str | None = None
) -> dict:
    require_hex_digest(fingerprint_hex, "fingerprint")
    if not isinstance(label, str) or len(label) > MAX_LABEL_LENGTH:
        raise InvalidInput(f"label must be a string of at most {MAX_LABEL_LENGTH} chars")
    return {"fingerprint": fingerprint_hex, "owner": owner, "label": label, "ref": ref}


def record_from_tx(height: int, block_ts: int, tx: ledger.Transaction) -> NotarizationRecord:
    return NotarizationRecord(
        fingerprint=tx.body["fingerprint"],
        owner=tx.body["owner"],
        tx_id=tx.tx_id,
        block_height=height,
        timestamp=block_ts,
        label=tx.body.get("label", ""),
    )


def audit(chain: ledger.Chain, fingerprint_hex: str) -> AuditResult:
    """All notarizations of a fingerprint, in chain order (oldest first)."""
    records = [
        record_from_tx(height, block_ts, tx)
        for height, block_ts, tx in chain.iter_transactions()
        if tx.kind == ledger.TxKind.NOTARIZE.value
        and tx.body.get("fingerprint") == fingerprint_hex
    ]
    return AuditResult(found=bool(records), records=records)
