from __future__ import annotations

import pytest

from chainprocure import ledger, notary
from chainprocure.engine import ProcurementEngine
from chainprocure.identity import KeyPair, generate_keypair
from chainprocure.ledger import TxKind, build_signed_tx

T0 = 1_700_000_000_000  # fixed epoch for deterministic tests


def seeded_keypair(n: int) -> KeyPair:
    return generate_keypair(bytes([n]) * 32)


@pytest.fixture
def operator() -> KeyPair:
    return seeded_keypair(200)


@pytest.fixture
def verifier() -> KeyPair:
    return seeded_keypair(201)


@pytest.fixture
def engine(operator, verifier) -> ProcurementEngine:
    return ProcurementEngine(operator=operator, verifiers=[verifier.address])


class Driver:
    """Thin helper around engine actions for tests: builds and signs txs."""

    def __init__(self, engine: ProcurementEngine, verifier: KeyPair):
        self.engine = engine
        self.verifier = verifier

    def register(self, kp: KeyPair, name: str, now: int = T0):
        body = {
            "public_key": kp.public_key.hex(),
            "display_name": name,
            "identity_fingerprint": notary.fingerprint(name.encode()),
        }
        tx = build_signed_tx(TxKind.REGISTER, body, kp, now)
        return self.engine.register_user(tx, now)

    def approve_kyc(self, kp: KeyPair, now: int = T0, decision: str = "verified"):
        tx = build_signed_tx(
            TxKind.KYC_VERIFY,
            {"subject": kp.address, "decision": decision},
            self.verifier,
            now,
        )
        return self.engine.verify_kyc(tx, now)

    def onboard(self, kp: KeyPair, name: str, now: int = T0):
        self.register(kp, name, now)
        self.approve_kyc(kp, now)
        return self.engine.users[kp.address]

    def post_rfq(self, kp: KeyPair, open_at: int, close_at: int, now: int,
                 title: str = "rfq", spec: bytes = b"spec document"):
        body = {
            "title": title,
            "spec_fingerprint": notary.fingerprint(spec),
            "open_at": open_at,
            "close_at": close_at,
        }
        tx = build_signed_tx(TxKind.POST_REQUEST, body, kp, now)
        return self.engine.post_request(tx, now)

    def bid(self, kp: KeyPair, request_id: str, price: int, now: int,
            doc: bytes | None = None):
        body = {
            "request_id": request_id,
            "price": price,
            "doc_fingerprint": notary.fingerprint(doc or f"bid:{kp.address}:{price}".encode()),
        }
        tx = build_signed_tx(TxKind.SUBMIT_BID, body, kp, now)
        return self.engine.submit_bid(tx, now)

    def notarize(self, kp: KeyPair, data: bytes, label: str = "", now: int = T0):
        body = notary.make_notarize_body(
            notary.fingerprint(data), kp.address, label
        )
        tx = build_signed_tx(TxKind.NOTARIZE, body, kp, now)
        return self.engine.notarize(tx, now)


@pytest.fixture
def driver(engine, verifier) -> Driver:
    return Driver(engine, verifier)
