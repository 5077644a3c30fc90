"""M-of-N and multi-level multisignature accounts.

An account lists N cosignatories and a threshold M. A cosignatory is
either a leaf address (a plain key holder) or another multisig account,
so thresholds compose: M=N behaves as AND over cosignatories, M=1 as OR,
and nesting expresses arbitrary combinations up to three levels deep.

Approval is evaluated structurally: a leaf cosignatory is satisfied when
its valid signature has been collected; a multisig cosignatory is
satisfied when, recursively, at least its own threshold of cosignatories
is satisfied. A leaf reachable through two branches counts independently
in each branch. Only leaf addresses ever appear in the collected set.

Outgoing actions need approval; recording something *to* an account never
consults approval state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Collection, Iterable

from . import identity, ledger
from .canonical import digest_of
from .errors import (
    AlreadySigned,
    BadThreshold,
    CycleDetected,
    DepthExceeded,
    DuplicateCosignatory,
    InvalidSignature,
    NotACosignatory,
    NotApproved,
    NotMultisig,
    NotOpen,
    UnknownAccount,
    UnknownCosignatory,
)
from .identity import ADDRESS_PREFIX, KeyPair

MAX_DEPTH = 3
DEFAULT_PENDING_EXPIRY_MS = 7 * 24 * 60 * 60 * 1000


class PendingStatus(str, Enum):
    OPEN = "open"
    APPROVED = "approved"
    EXECUTED = "executed"
    REJECTED = "rejected"
    EXPIRED = "expired"


@dataclass(frozen=True)
class MultisigConfig:
    account: str
    min_approvals: int
    cosignatories: tuple[str, ...]
    depth: int

    def to_dict(self) -> dict:
        return {
            "account": self.account,
            "min_approvals": self.min_approvals,
            "cosignatories": list(self.cosignatories),
            "depth": self.depth,
        }


class MultisigRegistry:
    """Known multisig configs plus the public keys of leaf addresses."""

    def __init__(self) -> None:
        self.accounts: dict[str, MultisigConfig] = {}
        self.public_keys: dict[str, str] = {}

    def is_multisig(self, address: str) -> bool:
        return address in self.accounts

    def is_known(self, address: str) -> bool:
        return address in self.accounts or address in self.public_keys

    def config(self, account: str) -> MultisigConfig:
        try:
            return self.accounts[account]
        except KeyError:
            raise UnknownAccount(f"no multisig account {account}") from None

    def add_public_key(self, address: str, public_key_hex: str) -> None:
        self.public_keys[address] = public_key_hex

    def add_config(self, config: MultisigConfig) -> None:
        self.accounts[config.account] = config


def derive_multisig_address(
    min_approvals: int, cosignatories: Iterable[str], nonce: str = ""
) -> str:
    """Deterministic account address; the nonce separates identical configs."""
    payload = digest_of(
        {
            "cosignatories": list(cosignatories),
            "min_approvals": min_approvals,
            "nonce": nonce,
        }
    )
    return ADDRESS_PREFIX + payload[:40]


def _subtree_depth(address: str, registry: MultisigRegistry, path: frozenset) -> int:
    """Levels of multisig nesting at and below address; a leaf is 0."""
    if not registry.is_multisig(address):
        return 0
    if address in path:
        raise CycleDetected(f"cosignatory cycle through {address}")
    config = registry.accounts[address]
    path = path | {address}
    return 1 + max(_subtree_depth(c, registry, path) for c in config.cosignatories)


def validate_config(
    min_approvals: int,
    cosignatories: Collection[str],
    registry: MultisigRegistry,
    account: str | None = None,
) -> int:
    """Check all config invariants; returns the config's depth."""
    n = len(cosignatories)
    if n < 1:
        raise BadThreshold("a multisig account needs at least one cosignatory")
    if not isinstance(min_approvals, int) or min_approvals < 1 or min_approvals > n:
        raise BadThreshold(f"min_approvals must be within 1..{n}, got {min_approvals}")
    if len(set(cosignatories)) != n:
        raise DuplicateCosignatory("cosignatories must be pairwise distinct")
    for cosig in cosignatories:
        if not registry.is_known(cosig):
            raise UnknownCosignatory(f"cosignatory {cosig} is not registered")
    path = frozenset({account}) if account else frozenset()
    depth = 1 + max(_subtree_depth(c, registry, path) for c in cosignatories)
    if depth > MAX_DEPTH:
        raise DepthExceeded(f"multisig depth {depth} exceeds the cap of {MAX_DEPTH}")
    return depth


def create_config(
    min_approvals: int,
    cosignatories: Iterable[str],
    registry: MultisigRegistry,
    nonce: str = "",
) -> MultisigConfig:
    """Validate and register a new account; returns its config."""
    cosignatories = tuple(cosignatories)
    account = derive_multisig_address(min_approvals, cosignatories, nonce)
    depth = validate_config(min_approvals, cosignatories, registry, account=account)
    config = MultisigConfig(
        account=account,
        min_approvals=min_approvals,
        cosignatories=cosignatories,
        depth=depth,
    )
    registry.add_config(config)
    return config


def reachable_leaves(account: str, registry: MultisigRegistry) -> set[str]:
    """All leaf addresses that can contribute signatures to the account."""
    leaves: set[str] = set()
    seen: set[str] = set()

    def walk(address: str) -> None:
        if registry.is_multisig(address):
            if address in seen:
                return
            seen.add(address)
            for cosig in registry.accounts[address].cosignatories:
                walk(cosig)
        else:
            leaves.add(address)

    walk(account)
    return leaves


def evaluate_approval(
    account: str, collected: Collection[str], registry: MultisigRegistry
) -> bool:
    """Pure recursive threshold evaluation over the collected leaf set."""
    config = registry.config(account)
    collected_set = set(collected)

    def satisfied(address: str, path: frozenset) -> bool:
        if registry.is_multisig(address):
            if address in path:
                raise CycleDetected(f"cosignatory cycle through {address}")
            sub = registry.accounts[address]
            hits = sum(
                1 for c in sub.cosignatories if satisfied(c, path | {address})
            )
            return hits >= sub.min_approvals
        return address in collected_set

    root_path = frozenset({account})
    hits = sum(1 for c in config.cosignatories if satisfied(c, root_path))
    return hits >= config.min_approvals


@dataclass
class PendingTransaction:
    """A transaction awaiting co-signatures before it may execute."""

    pending_id: str
    account: str
    initiator: str | None
    inner_kind: str
    inner_body: dict
    created_at: int
    collected: dict[str, str] = field(default_factory=dict)
    status: PendingStatus = PendingStatus.OPEN

    def signing_digest(self) -> str:
        """The digest every cosignatory signs: the inner action in context."""
        return digest_of(
            {
                "account": self.account,
                "created_at": self.created_at,
                "inner_body": self.inner_body,
                "inner_kind": self.inner_kind,
            }
        )

    def is_expired(self, now: int, expiry_ms: int = DEFAULT_PENDING_EXPIRY_MS) -> bool:
        return self.status == PendingStatus.OPEN and now - self.created_at > expiry_ms

    def effective_status(
        self, now: int, expiry_ms: int = DEFAULT_PENDING_EXPIRY_MS
    ) -> PendingStatus:
        if self.is_expired(now, expiry_ms):
            return PendingStatus.EXPIRED
        return self.status

    def to_dict(self) -> dict:
        return {
            "pending_id": self.pending_id,
            "account": self.account,
            "initiator": self.initiator,
            "inner_kind": self.inner_kind,
            "inner_body": self.inner_body,
            "created_at": self.created_at,
            "collected": dict(self.collected),
            "status": self.status.value,
        }


def open_pending(
    account: str,
    inner_kind: str,
    inner_body: dict,
    created_at: int,
    registry: MultisigRegistry,
    pending_id: str | None = None,
    initiator: str | None = None,
    signature: str | None = None,
) -> PendingTransaction:
    """Open a pending transaction on a multisig account.

    With an initiator, their signature over the signing digest is verified
    and collected immediately; without one the pending opens empty (the
    contract-award path, where both parties sign later).
    """
    if not registry.is_multisig(account):
        raise NotMultisig(f"{account} is not a multisig account")
    if pending_id is None:
        pending_id = digest_of(
            {
                "account": account,
                "created_at": created_at,
                "initiator": initiator,
                "inner_body": inner_body,
                "inner_kind": inner_kind,
            }
        )
    pending = PendingTransaction(
        pending_id=pending_id,
        account=account,
        initiator=initiator,
        inner_kind=inner_kind,
        inner_body=inner_body,
        created_at=created_at,
    )
    if initiator is not None:
        if initiator not in reachable_leaves(account, registry):
            raise NotACosignatory(f"{initiator} cannot sign for {account}")
        if signature is None:
            raise InvalidSignature("initiator signature required")
        _verify_approval_signature(pending, initiator, signature, registry)
        pending.collected[initiator] = signature
        if evaluate_approval(account, pending.collected, registry):
            pending.status = PendingStatus.APPROVED
    return pending


def propose(
    account: str,
    inner_kind: str,
    inner_body: dict,
    initiator: str,
    signature: str,
    created_at: int,
    registry: MultisigRegistry,
    pending_id: str | None = None,
) -> PendingTransaction:
    return open_pending(
        account,
        inner_kind,
        inner_body,
        created_at,
        registry,
        pending_id=pending_id,
        initiator=initiator,
        signature=signature,
    )


def _verify_approval_signature(
    pending: PendingTransaction,
    signer: str,
    signature: str,
    registry: MultisigRegistry,
) -> None:
    public_key_hex = registry.public_keys.get(signer)
    if public_key_hex is None:
        raise NotACosignatory(f"no public key on record for {signer}")
    try:
        ok = identity.verify(
            bytes.fromhex(public_key_hex),
            bytes.fromhex(pending.signing_digest()),
            bytes.fromhex(signature),
        )
    except ValueError:
        ok = False
    if not ok:
        raise InvalidSignature(f"signature by {signer} does not verify")


def cosign(
    pending: PendingTransaction,
    signer: str,
    signature: str,
    registry: MultisigRegistry,
    now: int | None = None,
    expiry_ms: int = DEFAULT_PENDING_EXPIRY_MS,
) -> PendingTransaction:
    """Collect one more signature; flips Open to Approved at the threshold."""
    if now is not None and pending.is_expired(now, expiry_ms):
        pending.status = PendingStatus.EXPIRED
    if pending.status != PendingStatus.OPEN:
        raise NotOpen(f"pending {pending.pending_id[:12]} is {pending.status.value}")
    if signer not in reachable_leaves(pending.account, registry):
        raise NotACosignatory(f"{signer} cannot sign for {pending.account}")
    if signer in pending.collected:
        raise AlreadySigned(f"{signer} already signed")
    _verify_approval_signature(pending, signer, signature, registry)
    pending.collected[signer] = signature
    if evaluate_approval(pending.account, pending.collected, registry):
        pending.status = PendingStatus.APPROVED
    return pending


def is_approved(pending: PendingTransaction, registry: MultisigRegistry) -> bool:
    return evaluate_approval(pending.account, pending.collected, registry)


def build_completion_tx(
    pending: PendingTransaction, operator: KeyPair, timestamp: int
) -> ledger.Transaction:
    """The on-chain record of an executed pending: inner action plus approvals."""
    body = {
        "action": "execute",
        "pending_id": pending.pending_id,
        "account": pending.account,
        "inner_kind": pending.inner_kind,
        "inner_body": pending.inner_body,
        "approvals": dict(pending.collected),
    }
    return ledger.build_signed_tx(ledger.TxKind.COSIGN, body, operator, timestamp)


def execute(
    pending: PendingTransaction,
    chain: ledger.Chain,
    operator: KeyPair,
    timestamp: int | None = None,
) -> ledger.Transaction:
    """Record an approved pending on the ledger and mark it executed."""
    if pending.status != PendingStatus.APPROVED:
        raise NotApproved(
            f"pending {pending.pending_id[:12]} is {pending.status.value}"
        )
    if timestamp is None:
        timestamp = ledger.now_ms()
    tx = build_completion_tx(pending, operator, timestamp)
    chain.append_block([tx], timestamp)
    pending.status = PendingStatus.EXECUTED
    return tx
