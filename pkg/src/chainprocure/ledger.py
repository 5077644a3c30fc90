"""Append-only hash-chained block store.

Blocks batch signed transactions. Each header commits to the previous
block's hash and to a tx root (SHA-256 over the concatenated transaction
ids in block order); the block hash is the digest of the canonical header.
Any mutation of a recorded field is therefore detectable by revalidation:
body edits break the tx root, header edits break the block hash, block
swaps break the next block's prev link, signature or key edits fail
signature verification.

The chain is owned by a single logical writer; validation and lookups are
read-only. Persistence is a block log: one canonical-JSON block per line.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from . import identity
from .canonical import ZERO_HASH, canonical_json_bytes, digest_of, sha256_hex
from .errors import CorruptLog, DuplicateTransaction, InvalidSignature
from .identity import KeyPair

GENESIS_TIMESTAMP = 0


class TxKind(str, Enum):
    REGISTER = "register"
    KYC_VERIFY = "kyc_verify"
    CREATE_MULTISIG = "create_multisig"
    POST_REQUEST = "post_request"
    SUBMIT_BID = "submit_bid"
    CLOSE_REQUEST = "close_request"
    ISSUE_CONTRACT = "issue_contract"
    COSIGN = "cosign"
    NOTARIZE = "notarize"


# Validation failure reasons, first failing height wins.
BAD_LINK = "bad link"
BAD_HEIGHT = "bad height"
BAD_BLOCK_HASH = "bad block hash"
BAD_TX_ROOT = "bad tx root"
BAD_TX_ID = "bad tx id"
BAD_TX_SIGNATURE = "bad tx signature"


@dataclass(frozen=True)
class Transaction:
    """A signed, canonical-serialized event.

    tx_id is the digest of the canonical (body, kind, signer, timestamp)
    record; the signature is over the tx_id bytes. The signer's public key
    travels with the transaction so any block is verifiable without replay
    state: the key is bound to the signer field by address derivation.
    """

    tx_id: str
    kind: str
    body: dict
    signer: str
    public_key: str
    signature: str
    timestamp: int

    def to_dict(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "kind": self.kind,
            "body": self.body,
            "signer": self.signer,
            "public_key": self.public_key,
            "signature": self.signature,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Transaction":
        return cls(
            tx_id=raw["tx_id"],
            kind=raw["kind"],
            body=raw["body"],
            signer=raw["signer"],
            public_key=raw["public_key"],
            signature=raw["signature"],
            timestamp=raw["timestamp"],
        )


def transaction_digest(kind: str, body: dict, signer: str, timestamp: int) -> str:
    return digest_of(
        {"body": body, "kind": kind, "signer": signer, "timestamp": timestamp}
    )


def build_signed_tx(
    kind: str | TxKind, body: dict, keypair: KeyPair, timestamp: int
) -> Transaction:
    """Construct a transaction signed by keypair; used by clients and tests."""
    kind_value = kind.value if isinstance(kind, TxKind) else kind
    signer = keypair.address
    tx_id = transaction_digest(kind_value, body, signer, timestamp)
    signature = identity.sign(keypair.private_key, bytes.fromhex(tx_id))
    return Transaction(
        tx_id=tx_id,
        kind=kind_value,
        body=body,
        signer=signer,
        public_key=keypair.public_key.hex(),
        signature=signature.hex(),
        timestamp=timestamp,
    )


def tx_to_envelope(tx: Transaction) -> dict:
    """The wire form a client submits: everything but the derived tx_id."""
    payload = tx.to_dict()
    del payload["tx_id"]
    return payload


def verify_transaction(tx: Transaction) -> bool:
    """Check id derivation, key/address binding, and the signature."""
    try:
        if transaction_digest(tx.kind, tx.body, tx.signer, tx.timestamp) != tx.tx_id:
            return False
        public_key = bytes.fromhex(tx.public_key)
        if identity.derive_address(public_key) != tx.signer:
            return False
        return identity.verify(
            public_key, bytes.fromhex(tx.tx_id), bytes.fromhex(tx.signature)
        )
    except Exception:
        return False


def compute_tx_root(tx_ids: Iterable[str]) -> str:
    """SHA-256 over the concatenation of tx id bytes in block order."""
    joined = b"".join(bytes.fromhex(tx_id) for tx_id in tx_ids)
    return sha256_hex(joined)


@dataclass(frozen=True)
class BlockHeader:
    height: int
    prev_hash: str
    tx_root: str
    timestamp: int

    def to_dict(self) -> dict:
        return {
            "height": self.height,
            "prev_hash": self.prev_hash,
            "tx_root": self.tx_root,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "BlockHeader":
        return cls(
            height=raw["height"],
            prev_hash=raw["prev_hash"],
            tx_root=raw["tx_root"],
            timestamp=raw["timestamp"],
        )


def header_digest(header: BlockHeader) -> str:
    return digest_of(header.to_dict())


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    transactions: tuple[Transaction, ...]
    block_hash: str

    def to_dict(self) -> dict:
        return {
            "header": self.header.to_dict(),
            "transactions": [tx.to_dict() for tx in self.transactions],
            "block_hash": self.block_hash,
        }

    def to_log_line(self) -> str:
        return canonical_json_bytes(self.to_dict()).decode("utf-8")

    @classmethod
    def from_dict(cls, raw: dict) -> "Block":
        # Parse exactly as given; validation is validate_chain's job.
        return cls(
            header=BlockHeader.from_dict(raw["header"]),
            transactions=tuple(
                Transaction.from_dict(t) for t in raw["transactions"]
            ),
            block_hash=raw["block_hash"],
        )


def seal_block(
    height: int, prev_hash: str, txs: Iterable[Transaction], timestamp: int
) -> Block:
    txs = tuple(txs)
    header = BlockHeader(
        height=height,
        prev_hash=prev_hash,
        tx_root=compute_tx_root(tx.tx_id for tx in txs),
        timestamp=timestamp,
    )
    return Block(header=header, transactions=txs, block_hash=header_digest(header))


@dataclass
class ValidationReport:
    ok: bool
    height: int | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        return {"ok": self.ok, "height": self.height, "reason": self.reason}


class Chain:
    """Ordered block list plus a tx_id index for O(1) lookup."""

    def __init__(self, blocks: Iterable[Block] = ()):
        self.blocks: list[Block] = list(blocks)
        self._tx_index: dict[str, tuple[int, Transaction]] = {}
        for block in self.blocks:
            for tx in block.transactions:
                self._tx_index[tx.tx_id] = (block.header.height, tx)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def tip(self) -> Block:
        return self.blocks[-1]

    @property
    def tip_hash(self) -> str:
        return self.tip.block_hash

    def has_transaction(self, tx_id: str) -> bool:
        return tx_id in self._tx_index

    def iter_transactions(self) -> Iterator[tuple[int, int, Transaction]]:
        """Yield (height, block timestamp, tx) in chain order."""
        for block in self.blocks:
            for tx in block.transactions:
                yield block.header.height, block.header.timestamp, tx

    def append_block(
        self, txs: Iterable[Transaction], timestamp: int | None = None
    ) -> Block:
        """Seal and append a new block; the chain stays valid by construction."""
        txs = tuple(txs)
        seen_in_batch: set[str] = set()
        for tx in txs:
            if not verify_transaction(tx):
                raise InvalidSignature(f"transaction {tx.tx_id[:12]} fails verification")
            if tx.tx_id in self._tx_index or tx.tx_id in seen_in_batch:
                raise DuplicateTransaction(f"transaction {tx.tx_id[:12]} already recorded")
            seen_in_batch.add(tx.tx_id)
        if timestamp is None:
            timestamp = now_ms()
        block = seal_block(len(self.blocks), self.tip.block_hash, txs, timestamp)
        self.blocks.append(block)
        for tx in txs:
            self._tx_index[tx.tx_id] = (block.header.height, tx)
        return block

    def find_transaction(self, tx_id: str) -> tuple[int, Transaction] | None:
        return self._tx_index.get(tx_id)

    def to_log_lines(self) -> list[str]:
        return [block.to_log_line() for block in self.blocks]


def now_ms() -> int:
    return int(time.time() * 1000)


def genesis() -> Chain:
    """A chain of exactly one empty block at height 0; fully deterministic."""
    block = seal_block(0, ZERO_HASH, (), GENESIS_TIMESTAMP)
    return Chain([block])


def append_block(
    chain: Chain, txs: Iterable[Transaction], timestamp: int | None = None
) -> Block:
    return chain.append_block(txs, timestamp)


def find_transaction(chain: Chain, tx_id: str) -> tuple[int, Transaction] | None:
    return chain.find_transaction(tx_id)


def validate_chain(chain: Chain | Iterable[Block]) -> ValidationReport:
    """Revalidate every link, hash, root, and signature from genesis.

    Reports the first failing height. Failures are report values, never
    exceptions: this runs against possibly hostile data.
    """
    blocks = chain.blocks if isinstance(chain, Chain) else list(chain)
    for idx, block in enumerate(blocks):
        header = block.header
        if block.block_hash != header_digest(header):
            return ValidationReport(False, idx, BAD_BLOCK_HASH)
        if header.height != idx:
            return ValidationReport(False, idx, BAD_HEIGHT)
        if idx == 0:
            if header.prev_hash != ZERO_HASH:
                return ValidationReport(False, idx, BAD_LINK)
        elif header.prev_hash != blocks[idx - 1].block_hash:
            return ValidationReport(False, idx, BAD_LINK)
        recomputed_ids = [
            transaction_digest(tx.kind, tx.body, tx.signer, tx.timestamp)
            for tx in block.transactions
        ]
        if compute_tx_root(recomputed_ids) != header.tx_root:
            return ValidationReport(False, idx, BAD_TX_ROOT)
        for tx, recomputed in zip(block.transactions, recomputed_ids):
            if tx.tx_id != recomputed:
                return ValidationReport(False, idx, BAD_TX_ID)
            if not verify_transaction(tx):
                return ValidationReport(False, idx, BAD_TX_SIGNATURE)
    return ValidationReport(True)


# --- block log persistence ---

def parse_log_lines(lines: Iterable[str], verify: bool = True) -> Chain:
    blocks: list[Block] = []
    import json as _json

    for lineno, line in enumerate(lines):
        line = line.strip()
        if not line:
            continue
        try:
            raw = _json.loads(line)
            block = Block.from_dict(raw)
        except Exception as exc:
            raise CorruptLog(f"unparsable block log line {lineno}: {exc}") from exc
        blocks.append(block)
    if not blocks:
        return genesis()
    if verify:
        report = validate_chain(blocks)
        if not report.ok:
            raise CorruptLog(
                f"block log fails validation at height {report.height}: {report.reason}"
            )
        tx_ids = [tx.tx_id for b in blocks for tx in b.transactions]
        if len(tx_ids) != len(set(tx_ids)):
            raise CorruptLog("block log contains duplicate transaction ids")
    return Chain(blocks)


def load_chain(path: str | os.PathLike, verify: bool = True) -> Chain:
    """Replay a block log file; must reproduce identical block hashes."""
    if not os.path.exists(path):
        return genesis()
    with open(path, "r", encoding="utf-8") as fh:
        return parse_log_lines(fh, verify=verify)


def write_chain(path: str | os.PathLike, chain: Chain) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in chain.to_log_lines():
            fh.write(line)
            fh.write("\n")


def append_log_line(path: str | os.PathLike, block: Block) -> None:
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        fh.write(block.to_log_line())
        fh.write("\n")
        fh.flush()
        os.fsync(fh.fileno())
