"""Generate the shared canonical-JSON / fingerprint corpus.

The web console must produce byte-identical canonical JSON and SHA-256
digests to the server. This writes 50 vectors, each carrying a JSON value
with its canonical form and digest, plus a binary blob (hex) with its
fingerprint. Both the Python suite and the console's tests assert every
vector.

Usage: python3 tools/gen_digest_corpus.py
"""

from __future__ import annotations

import json
import os
import random
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from chainprocure import notary  # noqa: E402
from chainprocure.canonical import canonical_json_bytes, digest_of  # noqa: E402

OUT = os.path.join(os.path.dirname(__file__), "..", "frontend", "shared",
                   "digest-corpus.json")


def handcrafted() -> list:
    return [
        {},
        [],
        None,
        True,
        False,
        0,
        -1,
        9007199254740991,  # 2^53 - 1, the JS safe-integer ceiling
        "",
        "plain ascii",
        "unicode: é ü 漢字 🛰",
        {"b": 1, "a": 2, "C": 3},  # uppercase sorts before lowercase
        {"nested": {"z": [1, 2, 3], "a": {"deep": None}}},
        {"é": "accented key", "z": "plain"},
        {"quotes\"and\\slashes": "\n\t\r control "},
        ["mixed", 1, None, True, {"k": []}],
        {"kind": "register", "body": {"public_key": "ab" * 32,
                                      "display_name": "Alice",
                                      "identity_fingerprint": "cd" * 32},
         "signer": "bp1" + "12" * 20, "timestamp": 1700000000000},
        {"kind": "submit_bid", "body": {"request_id": "ef" * 32, "price": 125000,
                                        "doc_fingerprint": "01" * 32},
         "signer": "bp1" + "34" * 20, "timestamp": 1700000000001},
        {"fingerprint": "aa" * 32, "owner": "bp1" + "56" * 20,
         "label": "bid-receipt", "ref": None},
        {"height": 7, "prev_hash": "00" * 32, "tx_root": "ff" * 32,
         "timestamp": 1699999999999},
    ]


def random_value(rng: random.Random, depth: int = 0):
    roll = rng.random()
    if depth >= 3 or roll < 0.35:
        return rng.choice([
            rng.randrange(-10**12, 10**12),
            rng.choice([True, False, None]),
            "".join(rng.choice("abcdefghij XYZ-_é€") for _ in range(rng.randrange(0, 18))),
            bytes(rng.randbytes(8)).hex(),
        ])
    if roll < 0.6:
        return [random_value(rng, depth + 1) for _ in range(rng.randrange(0, 5))]
    keys = {("k" + str(rng.randrange(100)) + rng.choice(["", "_x", "é"]))
            for _ in range(rng.randrange(1, 6))}
    return {k: random_value(rng, depth + 1) for k in keys}


def main() -> None:
    rng = random.Random(0xD16E57)
    values = handcrafted()
    while len(values) < 50:
        values.append(random_value(rng))

    vectors = []
    for i, value in enumerate(values):
        blob = rng.randbytes(rng.randrange(0, 200))
        vectors.append({
            "value": value,
            "canonical": canonical_json_bytes(value).decode("utf-8"),
            "value_sha256": digest_of(value),
            "blob_hex": blob.hex(),
            "blob_sha256": notary.fingerprint(blob),
        })

    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as fh:
        json.dump({"vectors": vectors}, fh, ensure_ascii=False, indent=1)
        fh.write("\n")
    print(f"wrote {len(vectors)} vectors to {os.path.normpath(OUT)}")


if __name__ == "__main__":
    main()
