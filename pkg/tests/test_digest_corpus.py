"""Server side of the shared digest corpus used by the web console."""

import json
import os

import pytest

from chainprocure import notary
from chainprocure.canonical import canonical_json_bytes, digest_of

CORPUS = os.path.join(
    os.path.dirname(__file__), "..", "frontend", "shared", "digest-corpus.json"
)


@pytest.mark.skipif(not os.path.exists(CORPUS), reason="frontend corpus not present")
def test_every_corpus_vector_reproduces():
    with open(CORPUS, "r", encoding="utf-8") as fh:
        vectors = json.load(fh)["vectors"]
    assert len(vectors) == 50
    for vector in vectors:
        assert canonical_json_bytes(vector["value"]).decode("utf-8") == vector["canonical"]
        assert digest_of(vector["value"]) == vector["value_sha256"]
        assert notary.fingerprint(bytes.fromhex(vector["blob_hex"])) == vector["blob_sha256"]
