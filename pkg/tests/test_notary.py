import pytest
from hypothesis import given, settings, strategies as st

from chainprocure import ledger, notary
from chainprocure.errors import InvalidInput, KycRequired
from chainprocure.ledger import TxKind, build_signed_tx
from conftest import T0, seeded_keypair

# printf '' | sha256sum : the well-known empty-input digest
SHA256_EMPTY = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


def test_empty_stream_fingerprint_is_known_constant():
    assert notary.fingerprint(b"") == SHA256_EMPTY


def test_fingerprint_is_stable():
    assert notary.fingerprint(b"contract v1") == notary.fingerprint(b"contract v1")


def test_one_flipped_bit_changes_fingerprint():
    data = bytearray(b"the original contract body")
    twin = bytearray(data)
    twin[5] ^= 0x01
    assert notary.fingerprint(bytes(data)) != notary.fingerprint(bytes(twin))


def test_fingerprint_file_matches_bytes(tmp_path):
    path = tmp_path / "doc.bin"
    path.write_bytes(b"\x00\x01\x02" * 1000)
    assert notary.fingerprint_file(path) == notary.fingerprint(path.read_bytes())


def test_label_length_capped():
    fp = notary.fingerprint(b"x")
    notary.make_notarize_body(fp, "bp1" + "0" * 40, "x" * 256)
    with pytest.raises(InvalidInput):
        notary.make_notarize_body(fp, "bp1" + "0" * 40, "x" * 257)


def test_bad_fingerprint_rejected():
    with pytest.raises(InvalidInput):
        notary.make_notarize_body("not-hex", "bp1" + "0" * 40, "")


def test_audit_on_empty_chain():
    result = notary.audit(ledger.genesis(), notary.fingerprint(b"whatever"))
    assert result.found is False
    assert result.records == []


def test_notarize_then_audit_round_trip(driver):
    user = seeded_keypair(10)
    driver.onboard(user, "owner")
    record = driver.notarize(user, b"contract pdf bytes", label="contract")
    result = driver.engine.audit(notary.fingerprint(b"contract pdf bytes"))
    assert result.found
    assert len(result.records) == 1
    assert result.records[0].owner == user.address
    assert result.records[0].label == "contract"
    # the record's tx resolves on-chain to a notarize tx with this fingerprint
    height, tx = driver.engine.chain.find_transaction(record.tx_id)
    assert height == record.block_height
    assert tx.kind == "notarize"
    assert tx.body["fingerprint"] == record.fingerprint


def test_unverified_owner_rejected(driver):
    user = seeded_keypair(11)
    driver.register(user, "unverified")
    tx = build_signed_tx(
        TxKind.NOTARIZE,
        notary.make_notarize_body(notary.fingerprint(b"doc"), user.address, ""),
        user,
        T0,
    )
    with pytest.raises(KycRequired):
        driver.engine.notarize(tx, T0)


def test_renotarization_returns_both_records(driver):
    user = seeded_keypair(12)
    driver.onboard(user, "owner")
    driver.notarize(user, b"same doc", now=T0 + 1)
    driver.notarize(user, b"same doc", now=T0 + 2)
    result = driver.engine.audit(notary.fingerprint(b"same doc"))
    assert result.found
    assert len(result.records) == 2
    heights = [r.block_height for r in result.records]
    assert heights == sorted(heights)


def test_tampered_file_not_found(driver):
    user = seeded_keypair(13)
    driver.onboard(user, "owner")
    driver.notarize(user, b"original bytes")
    assert driver.engine.audit(notary.fingerprint(b"original byteZ")).found is False


def test_audit_is_read_only(driver):
    user = seeded_keypair(14)
    driver.onboard(user, "owner")
    driver.notarize(user, b"doc")
    tip_before = driver.engine.chain.tip_hash
    for _ in range(25):
        driver.engine.audit(notary.fingerprint(b"doc"))
        driver.engine.audit(notary.fingerprint(b"never seen"))
    assert driver.engine.chain.tip_hash == tip_before


@settings(max_examples=30, deadline=None)
@given(blob=st.binary(min_size=0, max_size=512))
def test_roundtrip_property(blob):
    # engine-free property: fingerprint is a pure function of the bytes
    assert notary.fingerprint(blob) == notary.fingerprint(bytes(blob))
    mutated = blob + b"\x00"
    assert notary.fingerprint(mutated) != notary.fingerprint(blob)
