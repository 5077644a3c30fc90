"""HTTP service over the procurement engine.

Signing happens client-side: every state-changing user endpoint accepts a
pre-signed envelope (body, signer, public_key, timestamp, signature) and
the server never sees a private key. The block log is the only durable
state; startup replays it and refuses to serve if any recorded hash fails
to reproduce. All mutations funnel through one writer lock, reads run
against the derived in-memory state.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import ledger, notary
from .canonical import require_hex_digest
from .engine import ProcurementEngine
from .errors import ChainProcureError, InvalidInput, WriterBusy
from .identity import KeyPair, generate_keypair, load_keypair, save_keypair
from .ledger import Transaction, TxKind, transaction_digest
from .multisig import DEFAULT_PENDING_EXPIRY_MS

ENV_PREFIX = "CHAINPROCURE_"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8460
    block_log: str = "chainprocure.blocklog"
    verifiers: list[str] = field(default_factory=list)
    pending_expiry_ms: int = DEFAULT_PENDING_EXPIRY_MS
    fixed_clock: int | None = None
    operator_key_file: str | None = None
    operator_seed: str | None = None
    writer_wait_ms: int = 2000

    def validate(self) -> None:
        if not self.verifiers:
            raise InvalidInput("at least one KYC verifier address must be configured")
        log_dir = os.path.dirname(os.path.abspath(self.block_log))
        if not os.path.isdir(log_dir) or not os.access(log_dir, os.W_OK):
            raise InvalidInput(f"block log directory {log_dir} is not writable")


_CONFIG_KEYS = {
    "host": str,
    "port": int,
    "block_log": str,
    "verifiers": list,
    "pending_expiry_ms": int,
    "fixed_clock": int,
    "operator_key_file": str,
    "operator_seed": str,
    "writer_wait_ms": int,
}


def load_config(
    path: str | None = None,
    env: dict | None = None,
    overrides: dict | None = None,
) -> ServiceConfig:
    """Merge config sources: defaults < file < CHAINPROCURE_* env < overrides."""
    merged: dict = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            file_values = json.load(fh)
        for key, value in file_values.items():
            if key not in _CONFIG_KEYS:
                raise InvalidInput(f"unknown config key {key!r}")
            merged[key] = value
    env = os.environ if env is None else env
    for key, typ in _CONFIG_KEYS.items():
        raw = env.get(ENV_PREFIX + key.upper())
        if raw is None:
            continue
        if typ is int:
            merged[key] = int(raw)
        elif typ is list:
            merged[key] = [item for item in raw.split(",") if item]
        else:
            merged[key] = raw
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    return ServiceConfig(**merged)


class RealClock:
    def now_ms(self) -> int:
        return int(time.time() * 1000)


class FixedClock:
    """Test clock: frozen until advanced or set explicitly."""

    def __init__(self, start_ms: int):
        self._now = start_ms

    def now_ms(self) -> int:
        return self._now

    def advance(self, delta_ms: int) -> int:
        self._now += delta_ms
        return self._now

    def set(self, now_ms: int) -> int:
        self._now = now_ms
        return self._now


def load_operator(config: ServiceConfig) -> KeyPair:
    """Load or create the operator key that signs system-generated events."""
    if config.operator_seed:
        return generate_keypair(bytes.fromhex(config.operator_seed))
    key_file = config.operator_key_file or config.block_log + ".operator.json"
    if os.path.exists(key_file):
        return load_keypair(key_file)
    keypair = generate_keypair()
    save_keypair(key_file, keypair)
    return keypair


def build_engine(config: ServiceConfig) -> ProcurementEngine:
    """Recover state from the block log; refuse to start on any mismatch."""
    fresh = not os.path.exists(config.block_log)
    chain = ledger.load_chain(config.block_log, verify=True)
    if fresh:
        ledger.write_chain(config.block_log, chain)
    operator = load_operator(config)
    return ProcurementEngine(
        chain=chain,
        operator=operator,
        verifiers=config.verifiers,
        pending_expiry_ms=config.pending_expiry_ms,
        on_block=lambda block: ledger.append_log_line(config.block_log, block),
    )


def tx_from_envelope(payload: object, kind: TxKind) -> Transaction:
    """Rebuild a transaction from a client envelope; tx_id is derived."""
    if not isinstance(payload, dict):
        raise InvalidInput("request body must be a JSON object")
    for key in ("body", "signer", "public_key", "timestamp", "signature"):
        if key not in payload:
            raise InvalidInput(f"envelope is missing {key!r}")
    if "kind" in payload and payload["kind"] != kind.value:
        raise InvalidInput(f"envelope kind {payload['kind']!r} does not match route")
    body = payload["body"]
    if not isinstance(body, dict):
        raise InvalidInput("envelope body must be a JSON object")
    if type(payload["timestamp"]) is not int:
        raise InvalidInput("timestamp must be integer milliseconds")
    tx_id = transaction_digest(
        kind.value, body, payload["signer"], payload["timestamp"]
    )
    return Transaction(
        tx_id=tx_id,
        kind=kind.value,
        body=body,
        signer=payload["signer"],
        public_key=payload["public_key"],
        signature=payload["signature"],
        timestamp=payload["timestamp"],
    )


def create_app(config: ServiceConfig) -> FastAPI:
    config.validate()
    engine = build_engine(config)
    clock = FixedClock(config.fixed_clock) if config.fixed_clock is not None else RealClock()
    write_lock = threading.Lock()

    app = FastAPI(title="chainprocure", docs_url=None, redoc_url=None)
    app.state.engine = engine
    app.state.clock = clock
    app.state.config = config
    app.state.write_lock = write_lock

    @app.exception_handler(ChainProcureError)
    async def domain_error(_request: Request, exc: ChainProcureError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": exc.code, "message": exc.message},
        )

    @app.exception_handler(StarletteHTTPException)
    async def http_error(_request: Request, exc: StarletteHTTPException):
        code = "NOT_FOUND" if exc.status_code == 404 else "HTTP_ERROR"
        return JSONResponse(
            status_code=exc.status_code,
            content={"error": code, "message": str(exc.detail)},
        )

    class _writer:
        """Serialize mutations; report BUSY instead of queueing forever."""

        def __enter__(self):
            if not write_lock.acquire(timeout=config.writer_wait_ms / 1000):
                raise WriterBusy("ledger writer is saturated")
            return self

        def __exit__(self, *exc_info):
            write_lock.release()
            return False

    def committed(record: dict) -> JSONResponse:
        block = engine.last_block
        return JSONResponse(
            status_code=201,
            content={
                "record": record,
                "tx_id": block.transactions[0].tx_id,
                "block_height": block.header.height,
            },
        )

    # --- users and KYC ---

    @app.post("/users")
    async def register_user(request: Request):
        tx = tx_from_envelope(await request.json(), TxKind.REGISTER)
        with _writer():
            record = engine.register_user(tx, clock.now_ms())
            return committed(record.to_dict())

    @app.post("/kyc/decisions")
    async def kyc_decision(request: Request):
        tx = tx_from_envelope(await request.json(), TxKind.KYC_VERIFY)
        with _writer():
            record = engine.verify_kyc(tx, clock.now_ms())
            return committed(record.to_dict())

    # --- purchase requests and bids ---

    @app.post("/rfqs")
    async def post_rfq(request: Request):
        tx = tx_from_envelope(await request.json(), TxKind.POST_REQUEST)
        with _writer():
            record = engine.post_request(tx, clock.now_ms())
            return committed(record.to_dict())

    @app.get("/rfqs")
    async def list_rfqs():
        return {
            "requests": [
                dict(
                    r.to_dict(),
                    bid_count=len(engine.bids_by_request.get(r.request_id, {})),
                )
                for r in engine.requests.values()
            ]
        }

    @app.get("/rfqs/{request_id}")
    async def get_rfq(request_id: str):
        record = engine.get_request(request_id)
        return {
            "request": record.to_dict(),
            "bids": [b.to_dict() for b in engine.bids_for_request(request_id)],
        }

    @app.post("/rfqs/{request_id}/bids")
    async def submit_bid(request_id: str, request: Request):
        tx = tx_from_envelope(await request.json(), TxKind.SUBMIT_BID)
        if tx.body.get("request_id") != request_id:
            raise InvalidInput("bid request_id does not match the route")
        with _writer():
            record = engine.submit_bid(tx, clock.now_ms())
            return committed(record.to_dict())

    @app.get("/rfqs/{request_id}/ranking")
    async def ranking(request_id: str):
        return {
            "request_id": request_id,
            "ranking": [b.to_dict() for b in engine.rank_bids(request_id)],
        }

    @app.post("/rfqs/{request_id}/close")
    async def close_rfq(request_id: str):
        with _writer():
            record = engine.close_request(request_id, clock.now_ms())
            return committed(record.to_dict())

    @app.post("/rfqs/{request_id}/award")
    async def award(request_id: str, request: Request):
        payload = await request.json()
        if not isinstance(payload, dict):
            raise InvalidInput("request body must be a JSON object")
        fingerprint_hex = payload.get("contract_fingerprint")
        require_hex_digest(fingerprint_hex, "contract_fingerprint")
        with _writer():
            record = engine.award_and_issue_contract(
                request_id, fingerprint_hex, clock.now_ms()
            )
            return committed(record.to_dict())

    # --- contracts ---

    @app.post("/contracts/{contract_id}/cosign")
    async def cosign_contract(contract_id: str, request: Request):
        payload = await request.json()
        signer, signature = _signer_and_signature(payload)
        with _writer():
            record = engine.countersign_contract(
                contract_id, signer, signature, clock.now_ms()
            )
            return committed(record.to_dict())

    @app.get("/contracts/{contract_id}")
    async def get_contract(contract_id: str):
        record = engine.get_contract(contract_id)
        pending = engine.pendings[contract_id]
        shown = pending.to_dict()
        shown["status"] = pending.effective_status(
            clock.now_ms(), config.pending_expiry_ms
        ).value
        return {
            "contract": record.to_dict(),
            "pending": shown,
            "signing_digest": pending.signing_digest(),
        }

    # --- multisig ---

    @app.post("/multisig/accounts")
    async def create_multisig(request: Request):
        tx = tx_from_envelope(await request.json(), TxKind.CREATE_MULTISIG)
        with _writer():
            record = engine.create_multisig(tx, clock.now_ms())
            return committed(record.to_dict())

    @app.post("/multisig/pending/{pending_id}/cosign")
    async def cosign_pending(pending_id: str, request: Request):
        payload = await request.json()
        signer, signature = _signer_and_signature(payload)
        with _writer():
            record = engine.cosign_pending(
                pending_id, signer, signature, clock.now_ms()
            )
            shown = record.to_dict()
            shown["status"] = record.effective_status(
                clock.now_ms(), config.pending_expiry_ms
            ).value
            return committed(shown)

    @app.get("/multisig/pending/{pending_id}")
    async def get_pending(pending_id: str):
        record = engine.get_pending(pending_id)
        shown = record.to_dict()
        shown["status"] = record.effective_status(
            clock.now_ms(), config.pending_expiry_ms
        ).value
        return {"pending": shown, "signing_digest": record.signing_digest()}

    # --- notarization and audit ---

    @app.post("/notarize")
    async def notarize(request: Request):
        tx = tx_from_envelope(await request.json(), TxKind.NOTARIZE)
        with _writer():
            record = engine.notarize(tx, clock.now_ms())
            return committed(record.to_dict())

    @app.get("/audit/{fingerprint_hex}")
    async def audit(fingerprint_hex: str):
        require_hex_digest(fingerprint_hex, "fingerprint")
        return engine.audit(fingerprint_hex).to_dict()

    # --- chain ---

    @app.get("/chain")
    async def get_chain():
        return {
            "height": len(engine.chain) - 1,
            "tip_hash": engine.chain.tip_hash,
            "blocks": [b.to_dict() for b in engine.chain.blocks],
        }

    @app.get("/chain/validate")
    async def validate():
        return ledger.validate_chain(engine.chain).to_dict()

    @app.get("/healthz")
    async def healthz():
        return {
            "status": "ok",
            "height": len(engine.chain) - 1,
            "tip_hash": engine.chain.tip_hash,
        }

    return app


def _signer_and_signature(payload: object) -> tuple[str, str]:
    if not isinstance(payload, dict):
        raise InvalidInput("request body must be a JSON object")
    signer = payload.get("signer")
    signature = payload.get("signature")
    if not isinstance(signer, str) or not isinstance(signature, str):
        raise InvalidInput("signer and signature are required")
    return signer, signature
