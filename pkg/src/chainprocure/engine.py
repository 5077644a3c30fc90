"""The procurement workflow state machine.

All state lives on the chain: registration, KYC decisions, purchase
requests, bids, closes, awards, contract co-signatures, and notarizations
are each recorded as transactions, and the in-memory state is nothing but
a fold over them. Rebuilding an engine from the block log therefore
reproduces byte-identical state, which is what the crash-restart and
replay guarantees rest on.

User actions arrive as client-signed transactions (the service never
holds private keys). Time-triggered and derived events (closing a bidding
window, awarding, recording collected co-signatures, receipt
notarizations) are signed by the service's operator key. Every
state-changing call takes an explicit `now`; the clock lives with the
caller.

Bidding windows are half-open: a bid at close_at - 1ms is in, a bid at
close_at is out. Bids rank by ascending price, ties broken by earlier
submission then lexicographic bid id. The winning contract is gated by a
2-of-2 multisig account of buyer and supplier and becomes effective only
when both have signed, at which point the contract fingerprint is
notarized.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

from . import ledger, multisig, notary
from .canonical import canonical_json_bytes, digest_of, require_hex_digest
from .errors import (
    AlreadyDecided,
    AlreadySigned,
    BadWindow,
    DuplicateAddress,
    DuplicateBid,
    InvalidInput,
    InvalidSignature,
    KycRequired,
    NoBids,
    NotAParty,
    NotAuthorized,
    NotClosed,
    NotMultisig,
    NotACosignatory,
    NotOpen,
    SelfBid,
    UnknownContract,
    UnknownPending,
    UnknownRequest,
    UnknownUser,
    WindowClosed,
    WindowNotOpen,
    WindowStillOpen,
)
from .identity import KeyPair, generate_keypair
from .ledger import Block, Chain, Transaction, TxKind, build_signed_tx
from .multisig import (
    MultisigConfig,
    MultisigRegistry,
    PendingStatus,
    PendingTransaction,
)
from .notary import AuditResult, NotarizationRecord


class KycStatus(str, Enum):
    UNVERIFIED = "unverified"
    VERIFIED = "verified"
    REJECTED = "rejected"


class RequestStatus(str, Enum):
    OPEN = "open"
    CLOSED = "closed"
    AWARDED = "awarded"
    CONTRACTED = "contracted"
    CANCELLED = "cancelled"


class ContractStatus(str, Enum):
    AWAITING_SIGNATURES = "awaiting_signatures"
    EFFECTIVE = "effective"


LABEL_RFQ_SPEC = "rfq-spec"
LABEL_BID_RECEIPT = "bid-receipt"
LABEL_CONTRACT = "contract"


@dataclass
class UserRecord:
    address: str
    public_key: str
    display_name: str
    kyc_status: KycStatus
    kyc_identity_hash: str
    verifier: str | None = None

    def to_dict(self) -> dict:
        return {
            "address": self.address,
            "public_key": self.public_key,
            "display_name": self.display_name,
            "kyc_status": self.kyc_status.value,
            "kyc_identity_hash": self.kyc_identity_hash,
            "verifier": self.verifier,
        }


@dataclass
class PurchaseRequest:
    request_id: str
    buyer: str
    title: str
    spec_fingerprint: str
    open_at: int
    close_at: int
    status: RequestStatus

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "buyer": self.buyer,
            "title": self.title,
            "spec_fingerprint": self.spec_fingerprint,
            "open_at": self.open_at,
            "close_at": self.close_at,
            "status": self.status.value,
        }


@dataclass
class Bid:
    bid_id: str
    request_id: str
    supplier: str
    price: int
    doc_fingerprint: str
    submitted_at: int
    receipt_tx: str = ""

    def to_dict(self) -> dict:
        return {
            "bid_id": self.bid_id,
            "request_id": self.request_id,
            "supplier": self.supplier,
            "price": self.price,
            "doc_fingerprint": self.doc_fingerprint,
            "submitted_at": self.submitted_at,
            "receipt_tx": self.receipt_tx,
        }


@dataclass
class Contract:
    contract_id: str
    request_id: str
    winning_bid: str
    parties_account: str
    contract_fingerprint: str
    status: ContractStatus

    def to_dict(self) -> dict:
        return {
            "contract_id": self.contract_id,
            "request_id": self.request_id,
            "winning_bid": self.winning_bid,
            "parties_account": self.parties_account,
            "contract_fingerprint": self.contract_fingerprint,
            "status": self.status.value,
        }


def canonical_bid_record(bid: Bid) -> bytes:
    """The exact bytes whose fingerprint is notarized as the bid receipt."""
    return canonical_json_bytes(
        {
            "bid_id": bid.bid_id,
            "request_id": bid.request_id,
            "supplier": bid.supplier,
            "price": bid.price,
            "doc_fingerprint": bid.doc_fingerprint,
            "submitted_at": bid.submitted_at,
        }
    )


def _require_int(value: object, what: str) -> int:
    if type(value) is not int:
        raise InvalidInput(f"{what} must be an integer")
    return value


class ProcurementEngine:
    """Single-writer engine over a hash-chained ledger.

    Mutations go through _commit, which seals one block per action and
    folds the new transactions into state; reads never touch the chain
    writer. Constructing an engine over an existing chain replays it.
    """

    def __init__(
        self,
        chain: Chain | None = None,
        operator: KeyPair | None = None,
        verifiers: Iterable[str] = (),
        pending_expiry_ms: int = multisig.DEFAULT_PENDING_EXPIRY_MS,
        on_block: Callable[[Block], None] | None = None,
    ):
        self.chain = chain if chain is not None else ledger.genesis()
        self.operator = operator if operator is not None else generate_keypair()
        self.verifiers = set(verifiers)
        self.pending_expiry_ms = pending_expiry_ms
        self.on_block = on_block

        self.users: dict[str, UserRecord] = {}
        self.requests: dict[str, PurchaseRequest] = {}
        self.bids_by_request: dict[str, dict[str, Bid]] = {}
        self.bid_index: dict[str, Bid] = {}
        self.contracts: dict[str, Contract] = {}
        self.registry = MultisigRegistry()
        self.pendings: dict[str, PendingTransaction] = {}
        self.last_block: Block | None = None

        for height, block_ts, tx in self.chain.iter_transactions():
            self._apply(tx, height, block_ts)

    # ------------------------------------------------------------------
    # commit and replay fold

    def _commit(self, txs: list[Transaction], now: int) -> Block:
        block = self.chain.append_block(txs, timestamp=now)
        for tx in txs:
            self._apply(tx, block.header.height, block.header.timestamp)
        self.last_block = block
        if self.on_block is not None:
            self.on_block(block)
        return block

    def _operator_tx(self, kind: TxKind, body: dict, now: int) -> Transaction:
        return build_signed_tx(kind, body, self.operator, now)

    def _apply(self, tx: Transaction, height: int, block_ts: int) -> None:
        kind = tx.kind
        body = tx.body
        if kind == TxKind.REGISTER.value:
            record = UserRecord(
                address=tx.signer,
                public_key=body["public_key"],
                display_name=body["display_name"],
                kyc_status=KycStatus.UNVERIFIED,
                kyc_identity_hash=body["identity_fingerprint"],
            )
            self.users[tx.signer] = record
            self.registry.add_public_key(tx.signer, body["public_key"])
        elif kind == TxKind.KYC_VERIFY.value:
            user = self.users[body["subject"]]
            user.kyc_status = KycStatus(body["decision"])
            user.verifier = tx.signer
        elif kind == TxKind.CREATE_MULTISIG.value:
            multisig.create_config(
                body["min_approvals"],
                body["cosignatories"],
                self.registry,
                nonce=body.get("nonce", ""),
            )
        elif kind == TxKind.POST_REQUEST.value:
            self.requests[tx.tx_id] = PurchaseRequest(
                request_id=tx.tx_id,
                buyer=tx.signer,
                title=body["title"],
                spec_fingerprint=body["spec_fingerprint"],
                open_at=body["open_at"],
                close_at=body["close_at"],
                status=RequestStatus.OPEN,
            )
        elif kind == TxKind.SUBMIT_BID.value:
            bid = Bid(
                bid_id=tx.tx_id,
                request_id=body["request_id"],
                supplier=tx.signer,
                price=body["price"],
                doc_fingerprint=body["doc_fingerprint"],
                submitted_at=block_ts,
            )
            self.bids_by_request.setdefault(bid.request_id, {})[bid.supplier] = bid
            self.bid_index[bid.bid_id] = bid
        elif kind == TxKind.CLOSE_REQUEST.value:
            self.requests[body["request_id"]].status = RequestStatus.CLOSED
        elif kind == TxKind.ISSUE_CONTRACT.value:
            request = self.requests[body["request_id"]]
            request.status = RequestStatus.AWARDED
            self.contracts[tx.tx_id] = Contract(
                contract_id=tx.tx_id,
                request_id=body["request_id"],
                winning_bid=body["winning_bid"],
                parties_account=body["parties_account"],
                contract_fingerprint=body["contract_fingerprint"],
                status=ContractStatus.AWAITING_SIGNATURES,
            )
            self.pendings[tx.tx_id] = PendingTransaction(
                pending_id=tx.tx_id,
                account=body["parties_account"],
                initiator=None,
                inner_kind=TxKind.ISSUE_CONTRACT.value,
                inner_body=dict(body),
                created_at=block_ts,
            )
        elif kind == TxKind.COSIGN.value:
            self._apply_cosign(tx, block_ts)
        elif kind == TxKind.NOTARIZE.value:
            ref = body.get("ref")
            if ref in self.bid_index:
                self.bid_index[ref].receipt_tx = tx.tx_id

    def _apply_cosign(self, tx: Transaction, block_ts: int) -> None:
        body = tx.body
        action = body["action"]
        if action == "propose":
            pending = PendingTransaction(
                pending_id=tx.tx_id,
                account=body["account"],
                initiator=body["initiator"],
                inner_kind=body["inner_kind"],
                inner_body=body["inner_body"],
                created_at=body["created_at"],
                collected={body["initiator"]: body["approval_signature"]},
            )
            if multisig.evaluate_approval(
                pending.account, pending.collected, self.registry
            ):
                pending.status = PendingStatus.APPROVED
            self.pendings[pending.pending_id] = pending
        elif action == "sign":
            pending = self.pendings[body["pending_id"]]
            pending.collected[body["cosigner"]] = body["approval_signature"]
            if pending.status == PendingStatus.OPEN and multisig.evaluate_approval(
                pending.account, pending.collected, self.registry
            ):
                pending.status = PendingStatus.APPROVED
        elif action == "execute":
            pending = self.pendings[body["pending_id"]]
            pending.status = PendingStatus.EXECUTED
            contract = self.contracts.get(body["pending_id"])
            if contract is not None:
                contract.status = ContractStatus.EFFECTIVE
                self.requests[contract.request_id].status = RequestStatus.CONTRACTED

    # ------------------------------------------------------------------
    # user actions (client-signed transactions)

    def _checked(self, tx: Transaction, kind: TxKind) -> Transaction:
        if tx.kind != kind.value:
            raise InvalidInput(f"expected a {kind.value} transaction, got {tx.kind}")
        if not ledger.verify_transaction(tx):
            raise InvalidSignature("transaction signature does not verify")
        return tx

    def _require_verified(self, address: str) -> UserRecord:
        user = self.users.get(address)
        if user is None or user.kyc_status != KycStatus.VERIFIED:
            raise KycRequired(f"{address} has no verified KYC record")
        return user

    def register_user(self, tx: Transaction, now: int) -> UserRecord:
        self._checked(tx, TxKind.REGISTER)
        body = tx.body
        if body.get("public_key") != tx.public_key:
            raise InvalidInput("registration public_key must match the signing key")
        if not isinstance(body.get("display_name"), str):
            raise InvalidInput("display_name must be a string")
        require_hex_digest(body.get("identity_fingerprint"), "identity_fingerprint")
        if tx.signer in self.users:
            raise DuplicateAddress(f"{tx.signer} is already registered")
        self._commit([tx], now)
        return self.users[tx.signer]

    def verify_kyc(self, tx: Transaction, now: int) -> UserRecord:
        self._checked(tx, TxKind.KYC_VERIFY)
        if tx.signer not in self.verifiers:
            raise NotAuthorized(f"{tx.signer} does not hold the verifier role")
        subject = tx.body.get("subject")
        user = self.users.get(subject)
        if user is None:
            raise UnknownUser(f"no user {subject}")
        decision = tx.body.get("decision")
        if decision not in (KycStatus.VERIFIED.value, KycStatus.REJECTED.value):
            raise InvalidInput("decision must be 'verified' or 'rejected'")
        if user.kyc_status != KycStatus.UNVERIFIED:
            raise AlreadyDecided(f"{subject} is already {user.kyc_status.value}")
        self._commit([tx], now)
        return user

    def post_request(self, tx: Transaction, now: int) -> PurchaseRequest:
        self._checked(tx, TxKind.POST_REQUEST)
        body = tx.body
        self._require_verified(tx.signer)
        open_at = _require_int(body.get("open_at"), "open_at")
        close_at = _require_int(body.get("close_at"), "close_at")
        if open_at >= close_at:
            raise BadWindow(f"open_at {open_at} must precede close_at {close_at}")
        if not isinstance(body.get("title"), str):
            raise InvalidInput("title must be a string")
        require_hex_digest(body.get("spec_fingerprint"), "spec_fingerprint")
        receipt = self._operator_tx(
            TxKind.NOTARIZE,
            notary.make_notarize_body(
                body["spec_fingerprint"], tx.signer, LABEL_RFQ_SPEC, ref=tx.tx_id
            ),
            now,
        )
        self._commit([tx, receipt], now)
        return self.requests[tx.tx_id]

    def submit_bid(self, tx: Transaction, now: int) -> Bid:
        self._checked(tx, TxKind.SUBMIT_BID)
        body = tx.body
        request = self.requests.get(body.get("request_id"))
        if request is None:
            raise UnknownRequest(f"no purchase request {body.get('request_id')}")
        if request.status != RequestStatus.OPEN or now >= request.close_at:
            raise WindowClosed(f"bidding on {request.request_id[:12]} has closed")
        if now < request.open_at:
            raise WindowNotOpen(f"bidding opens at {request.open_at}")
        self._require_verified(tx.signer)
        if tx.signer == request.buyer:
            raise SelfBid("a buyer cannot bid on its own request")
        if tx.signer in self.bids_by_request.get(request.request_id, {}):
            raise DuplicateBid(f"{tx.signer} already bid on this request")
        price = _require_int(body.get("price"), "price")
        if price < 0:
            raise InvalidInput("price must be non-negative")
        require_hex_digest(body.get("doc_fingerprint"), "doc_fingerprint")

        bid_record = Bid(
            bid_id=tx.tx_id,
            request_id=request.request_id,
            supplier=tx.signer,
            price=price,
            doc_fingerprint=body["doc_fingerprint"],
            submitted_at=now,
        )
        receipt_fp = notary.fingerprint(canonical_bid_record(bid_record))
        receipt = self._operator_tx(
            TxKind.NOTARIZE,
            notary.make_notarize_body(
                receipt_fp, tx.signer, LABEL_BID_RECEIPT, ref=tx.tx_id
            ),
            now,
        )
        self._commit([tx, receipt], now)
        return self.bid_index[tx.tx_id]

    def notarize(self, tx: Transaction, now: int) -> NotarizationRecord:
        self._checked(tx, TxKind.NOTARIZE)
        body = tx.body
        self._require_verified(tx.signer)
        if body.get("owner") != tx.signer:
            raise InvalidInput("owner must match the signing address")
        notary.make_notarize_body(
            body.get("fingerprint"), body.get("owner"), body.get("label", ""),
            ref=body.get("ref"),
        )
        block = self._commit([tx], now)
        return notary.record_from_tx(block.header.height, block.header.timestamp, tx)

    def create_multisig(self, tx: Transaction, now: int) -> MultisigConfig:
        self._checked(tx, TxKind.CREATE_MULTISIG)
        body = tx.body
        min_approvals = _require_int(body.get("min_approvals"), "min_approvals")
        cosignatories = body.get("cosignatories")
        if not isinstance(cosignatories, list) or not all(
            isinstance(c, str) for c in cosignatories
        ):
            raise InvalidInput("cosignatories must be a list of addresses")
        nonce = body.get("nonce", "")
        if not isinstance(nonce, str):
            raise InvalidInput("nonce must be a string")
        account = multisig.derive_multisig_address(min_approvals, cosignatories, nonce)
        if account in self.registry.accounts:
            raise DuplicateAddress(f"multisig account {account} already exists")
        multisig.validate_config(
            min_approvals, cosignatories, self.registry, account=account
        )
        self._commit([tx], now)
        return self.registry.accounts[account]

    # ------------------------------------------------------------------
    # triggered and co-signing actions

    def close_request(self, request_id: str, now: int) -> PurchaseRequest:
        request = self.requests.get(request_id)
        if request is None:
            raise UnknownRequest(f"no purchase request {request_id}")
        if request.status != RequestStatus.OPEN:
            raise NotOpen(f"request is {request.status.value}")
        if now < request.close_at:
            raise WindowStillOpen(f"window open until {request.close_at}")
        tx = self._operator_tx(TxKind.CLOSE_REQUEST, {"request_id": request_id}, now)
        self._commit([tx], now)
        return request

    def rank_bids(self, request_id: str) -> list[Bid]:
        """Bids by ascending price; ties by submission time, then bid id."""
        if request_id not in self.requests:
            raise UnknownRequest(f"no purchase request {request_id}")
        bids = list(self.bids_by_request.get(request_id, {}).values())
        return sorted(bids, key=lambda b: (b.price, b.submitted_at, b.bid_id))

    def award_and_issue_contract(
        self, request_id: str, contract_fingerprint: str, now: int
    ) -> Contract:
        request = self.requests.get(request_id)
        if request is None:
            raise UnknownRequest(f"no purchase request {request_id}")
        if request.status != RequestStatus.CLOSED:
            raise NotClosed(f"request is {request.status.value}")
        require_hex_digest(contract_fingerprint, "contract_fingerprint")
        ranking = self.rank_bids(request_id)
        if not ranking:
            raise NoBids("cannot award a request with no bids")
        winner = ranking[0]
        cosignatories = [request.buyer, winner.supplier]
        account = multisig.derive_multisig_address(2, cosignatories, nonce=request_id)
        create_tx = self._operator_tx(
            TxKind.CREATE_MULTISIG,
            {"min_approvals": 2, "cosignatories": cosignatories, "nonce": request_id},
            now,
        )
        issue_tx = self._operator_tx(
            TxKind.ISSUE_CONTRACT,
            {
                "request_id": request_id,
                "winning_bid": winner.bid_id,
                "contract_fingerprint": contract_fingerprint,
                "parties_account": account,
            },
            now,
        )
        self._commit([create_tx, issue_tx], now)
        return self.contracts[issue_tx.tx_id]

    def countersign_contract(
        self, contract_id: str, signer: str, signature: str, now: int
    ) -> Contract:
        contract = self.contracts.get(contract_id)
        if contract is None:
            raise UnknownContract(f"no contract {contract_id}")
        if contract.status != ContractStatus.AWAITING_SIGNATURES:
            raise AlreadySigned("contract is already effective")
        pending = self.pendings[contract_id]
        extra = [
            self._operator_tx(
                TxKind.NOTARIZE,
                notary.make_notarize_body(
                    contract.contract_fingerprint,
                    contract.parties_account,
                    LABEL_CONTRACT,
                    ref=contract_id,
                ),
                now,
            )
        ]
        try:
            self._cosign_and_commit(pending, signer, signature, now, extra_on_execute=extra)
        except NotACosignatory:
            raise NotAParty(f"{signer} is not a party to this contract") from None
        return contract

    def cosign_pending(
        self, pending_id: str, signer: str, signature: str, now: int
    ) -> PendingTransaction:
        pending = self.pendings.get(pending_id)
        if pending is None:
            raise UnknownPending(f"no pending transaction {pending_id}")
        self._cosign_and_commit(pending, signer, signature, now)
        return pending

    def _cosign_and_commit(
        self,
        pending: PendingTransaction,
        signer: str,
        signature: str,
        now: int,
        extra_on_execute: list[Transaction] | None = None,
    ) -> None:
        """Validate one co-signature, record it, and execute on approval."""
        if pending.effective_status(now, self.pending_expiry_ms) != PendingStatus.OPEN:
            raise NotOpen(
                f"pending is {pending.effective_status(now, self.pending_expiry_ms).value}"
            )
        if signer not in multisig.reachable_leaves(pending.account, self.registry):
            raise NotACosignatory(f"{signer} cannot sign for {pending.account}")
        if signer in pending.collected:
            raise AlreadySigned(f"{signer} already signed")
        multisig._verify_approval_signature(pending, signer, signature, self.registry)

        txs = [
            self._operator_tx(
                TxKind.COSIGN,
                {
                    "action": "sign",
                    "pending_id": pending.pending_id,
                    "cosigner": signer,
                    "approval_signature": signature,
                },
                now,
            )
        ]
        would_collect = dict(pending.collected)
        would_collect[signer] = signature
        if multisig.evaluate_approval(pending.account, would_collect, self.registry):
            txs.append(
                self._operator_tx(
                    TxKind.COSIGN,
                    {
                        "action": "execute",
                        "pending_id": pending.pending_id,
                        "account": pending.account,
                        "inner_kind": pending.inner_kind,
                        "inner_body": pending.inner_body,
                        "approvals": would_collect,
                    },
                    now,
                )
            )
            txs.extend(extra_on_execute or [])
        self._commit(txs, now)

    def propose_pending(
        self,
        account: str,
        inner_kind: str,
        inner_body: dict,
        initiator: str,
        signature: str,
        created_at: int,
        now: int,
    ) -> PendingTransaction:
        """Open a pending on a multisig account with the initiator's signature."""
        if not self.registry.is_multisig(account):
            raise NotMultisig(f"{account} is not a multisig account")
        if initiator not in multisig.reachable_leaves(account, self.registry):
            raise NotACosignatory(f"{initiator} cannot sign for {account}")
        probe = PendingTransaction(
            pending_id="",
            account=account,
            initiator=initiator,
            inner_kind=inner_kind,
            inner_body=inner_body,
            created_at=created_at,
        )
        multisig._verify_approval_signature(probe, initiator, signature, self.registry)
        txs = [
            self._operator_tx(
                TxKind.COSIGN,
                {
                    "action": "propose",
                    "account": account,
                    "inner_kind": inner_kind,
                    "inner_body": inner_body,
                    "created_at": created_at,
                    "initiator": initiator,
                    "approval_signature": signature,
                },
                now,
            )
        ]
        if multisig.evaluate_approval(account, {initiator: signature}, self.registry):
            txs.append(
                self._operator_tx(
                    TxKind.COSIGN,
                    {
                        "action": "execute",
                        "pending_id": txs[0].tx_id,
                        "account": account,
                        "inner_kind": inner_kind,
                        "inner_body": inner_body,
                        "approvals": {initiator: signature},
                    },
                    now,
                )
            )
        self._commit(txs, now)
        return self.pendings[txs[0].tx_id]

    # ------------------------------------------------------------------
    # reads

    def get_request(self, request_id: str) -> PurchaseRequest:
        request = self.requests.get(request_id)
        if request is None:
            raise UnknownRequest(f"no purchase request {request_id}")
        return request

    def bids_for_request(self, request_id: str) -> list[Bid]:
        self.get_request(request_id)
        return list(self.bids_by_request.get(request_id, {}).values())

    def get_contract(self, contract_id: str) -> Contract:
        contract = self.contracts.get(contract_id)
        if contract is None:
            raise UnknownContract(f"no contract {contract_id}")
        return contract

    def get_pending(self, pending_id: str) -> PendingTransaction:
        pending = self.pendings.get(pending_id)
        if pending is None:
            raise UnknownPending(f"no pending transaction {pending_id}")
        return pending

    def audit(self, fingerprint_hex: str) -> AuditResult:
        return notary.audit(self.chain, fingerprint_hex)

    def state_digest(self) -> str:
        """Digest of the full derived state; equal iff replays agree."""
        return digest_of(
            {
                "users": {a: u.to_dict() for a, u in self.users.items()},
                "requests": {r: q.to_dict() for r, q in self.requests.items()},
                "bids": {b: bid.to_dict() for b, bid in self.bid_index.items()},
                "contracts": {c: k.to_dict() for c, k in self.contracts.items()},
                "accounts": {
                    a: cfg.to_dict() for a, cfg in self.registry.accounts.items()
                },
                "pendings": {p: pd.to_dict() for p, pd in self.pendings.items()},
                "tip": self.chain.tip_hash,
            }
        )
