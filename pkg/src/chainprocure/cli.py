"""Command-line entry points.

`chainprocure serve` runs the HTTP service. The remaining subcommands form
the companion client: key management, local fingerprinting, registration,
notarization, and audits against a running service. Signing always happens
here, with a key file the service never sees.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import identity, ledger, notary
from .errors import ChainProcureError
from .ledger import TxKind, build_signed_tx, tx_to_envelope
from .service import create_app, load_config


def _post(url: str, payload: dict) -> dict:
    import requests

    response = requests.post(url, json=payload, timeout=30)
    try:
        body = response.json()
    except ValueError:
        response.raise_for_status()
        raise
    if response.status_code >= 400:
        raise SystemExit(f"{body.get('error', response.status_code)}: {body.get('message', '')}")
    return body


def _get(url: str) -> dict:
    import requests

    response = requests.get(url, timeout=30)
    response.raise_for_status()
    return response.json()


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    overrides = {
        "host": args.host,
        "port": args.port,
        "block_log": args.block_log,
        "fixed_clock": args.fixed_clock,
        "operator_key_file": args.operator_key_file,
        "operator_seed": args.operator_seed,
    }
    if args.verifier:
        overrides["verifiers"] = args.verifier
    config = load_config(args.config, overrides=overrides)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def cmd_keygen(args: argparse.Namespace) -> int:
    seed = bytes.fromhex(args.seed) if args.seed else None
    keypair = identity.generate_keypair(seed)
    identity.save_keypair(args.out, keypair)
    print(keypair.address)
    return 0


def cmd_address(args: argparse.Namespace) -> int:
    print(identity.load_keypair(args.key).address)
    return 0


def cmd_fingerprint(args: argparse.Namespace) -> int:
    print(notary.fingerprint_file(args.file))
    return 0


def cmd_register(args: argparse.Namespace) -> int:
    keypair = identity.load_keypair(args.key)
    if args.identity_file:
        identity_fp = notary.fingerprint_file(args.identity_file)
    else:
        identity_fp = args.identity_fingerprint or notary.fingerprint(b"")
    body = {
        "public_key": keypair.public_key.hex(),
        "display_name": args.name,
        "identity_fingerprint": identity_fp,
    }
    tx = build_signed_tx(TxKind.REGISTER, body, keypair, ledger.now_ms())
    result = _post(args.url.rstrip("/") + "/users", tx_to_envelope(tx))
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def cmd_notarize(args: argparse.Namespace) -> int:
    keypair = identity.load_keypair(args.key)
    fingerprint_hex = notary.fingerprint_file(args.file)
    body = notary.make_notarize_body(fingerprint_hex, keypair.address, args.label)
    tx = build_signed_tx(TxKind.NOTARIZE, body, keypair, ledger.now_ms())
    result = _post(args.url.rstrip("/") + "/notarize", tx_to_envelope(tx))
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def cmd_audit(args: argparse.Namespace) -> int:
    fingerprint_hex = args.fingerprint or notary.fingerprint_file(args.file)
    result = _get(args.url.rstrip("/") + "/audit/" + fingerprint_hex)
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0 if result.get("found") else 1


def cmd_validate_log(args: argparse.Namespace) -> int:
    chain = ledger.load_chain(args.block_log, verify=False)
    report = ledger.validate_chain(chain)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chainprocure")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", help="JSON config file")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.add_argument("--block-log", dest="block_log")
    serve.add_argument(
        "--fixed-clock", dest="fixed_clock", type=int,
        help="freeze the service clock at this UTC ms value (test mode)",
    )
    serve.add_argument(
        "--verifier", action="append", default=None,
        help="KYC verifier address; repeatable",
    )
    serve.add_argument("--operator-key-file", dest="operator_key_file")
    serve.add_argument("--operator-seed", dest="operator_seed")
    serve.set_defaults(func=cmd_serve)

    keygen = sub.add_parser("keygen", help="generate a key file")
    keygen.add_argument("--out", required=True)
    keygen.add_argument("--seed", help="32-byte hex seed for deterministic keys")
    keygen.set_defaults(func=cmd_keygen)

    address = sub.add_parser("address", help="print the address of a key file")
    address.add_argument("--key", required=True)
    address.set_defaults(func=cmd_address)

    fingerprint = sub.add_parser("fingerprint", help="fingerprint a local file")
    fingerprint.add_argument("file")
    fingerprint.set_defaults(func=cmd_fingerprint)

    register = sub.add_parser("register", help="register a user on the service")
    register.add_argument("--key", required=True)
    register.add_argument("--name", required=True)
    register.add_argument("--identity-file", dest="identity_file")
    register.add_argument("--identity-fingerprint", dest="identity_fingerprint")
    register.add_argument("--url", default="http://127.0.0.1:8460")
    register.set_defaults(func=cmd_register)

    notarize = sub.add_parser("notarize", help="notarize a local file's fingerprint")
    notarize.add_argument("--key", required=True)
    notarize.add_argument("file")
    notarize.add_argument("--label", default="")
    notarize.add_argument("--url", default="http://127.0.0.1:8460")
    notarize.set_defaults(func=cmd_notarize)

    audit = sub.add_parser("audit", help="audit a file or fingerprint on-chain")
    group = audit.add_mutually_exclusive_group(required=True)
    group.add_argument("--file")
    group.add_argument("--fingerprint")
    audit.add_argument("--url", default="http://127.0.0.1:8460")
    audit.set_defaults(func=cmd_audit)

    validate_log = sub.add_parser("validate-log", help="validate a block log file")
    validate_log.add_argument("--block-log", dest="block_log", required=True)
    validate_log.set_defaults(func=cmd_validate_log)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ChainProcureError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
