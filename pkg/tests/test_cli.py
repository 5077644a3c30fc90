import json

from chainprocure import identity, ledger, notary
from chainprocure.cli import main
from conftest import seeded_keypair


def test_keygen_deterministic_with_seed(tmp_path, capsys):
    out = tmp_path / "key.json"
    seed = (b"\x77" * 32).hex()
    assert main(["keygen", "--out", str(out), "--seed", seed]) == 0
    printed = capsys.readouterr().out.strip()
    keypair = identity.load_keypair(out)
    assert printed == keypair.address
    assert keypair == identity.generate_keypair(b"\x77" * 32)


def test_address_command(tmp_path, capsys):
    out = tmp_path / "key.json"
    main(["keygen", "--out", str(out), "--seed", (b"\x78" * 32).hex()])
    capsys.readouterr()
    assert main(["address", "--key", str(out)]) == 0
    assert capsys.readouterr().out.strip().startswith("bp1")


def test_fingerprint_command(tmp_path, capsys):
    doc = tmp_path / "doc.bin"
    doc.write_bytes(b"hello procurement")
    assert main(["fingerprint", str(doc)]) == 0
    assert capsys.readouterr().out.strip() == notary.fingerprint(b"hello procurement")


def test_validate_log_ok_and_tampered(tmp_path, capsys):
    kp = seeded_keypair(150)
    chain = ledger.genesis()
    body = notary.make_notarize_body(notary.fingerprint(b"x"), kp.address, "doc")
    tx = ledger.build_signed_tx(ledger.TxKind.NOTARIZE, body, kp, 1)
    chain.append_block([tx], timestamp=2)
    log = tmp_path / "blocks.log"
    ledger.write_chain(log, chain)

    assert main(["validate-log", "--block-log", str(log)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ok"] is True

    lines = log.read_text().splitlines()
    lines[1] = lines[1].replace('"doc"', '"doC"', 1)
    log.write_text("\n".join(lines) + "\n")
    assert main(["validate-log", "--block-log", str(log)]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report == {"ok": False, "height": 1, "reason": "bad tx root"}
