"""Independent oracles the test suite checks the implementation against.

Nothing here reuses the implementation's logic: hashing is redone from raw
hashlib/json, multisig approval is evaluated by combination expansion
instead of threshold counting, and ranking is a hand-rolled insertion sort.
"""

from __future__ import annotations

import hashlib
import json
from itertools import combinations

from cryptography.exceptions import InvalidSignature as _BadSig
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PublicKey

ZERO = "0" * 64


def _canon(value) -> bytes:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def rehash_chain(block_dicts: list[dict], check_signatures: bool = False) -> None:
    """Recompute every hash in a serialized chain from first principles.

    Raises AssertionError on the first discrepancy.
    """
    prev = ZERO
    for i, blk in enumerate(block_dicts):
        header = blk["header"]
        assert header["height"] == i, f"height mismatch at {i}"
        assert header["prev_hash"] == prev, f"prev link mismatch at {i}"
        tx_ids = []
        for tx in blk["transactions"]:
            recomputed = _sha(
                _canon(
                    {
                        "body": tx["body"],
                        "kind": tx["kind"],
                        "signer": tx["signer"],
                        "timestamp": tx["timestamp"],
                    }
                )
            )
            assert recomputed == tx["tx_id"], f"tx id mismatch at {i}"
            tx_ids.append(recomputed)
            if check_signatures:
                key = Ed25519PublicKey.from_public_bytes(bytes.fromhex(tx["public_key"]))
                try:
                    key.verify(bytes.fromhex(tx["signature"]), bytes.fromhex(tx["tx_id"]))
                except _BadSig as exc:
                    raise AssertionError(f"signature mismatch at {i}") from exc
        root = _sha(b"".join(bytes.fromhex(t) for t in tx_ids))
        assert root == header["tx_root"], f"tx root mismatch at {i}"
        block_hash = _sha(
            _canon(
                {
                    "height": header["height"],
                    "prev_hash": header["prev_hash"],
                    "tx_root": header["tx_root"],
                    "timestamp": header["timestamp"],
                }
            )
        )
        assert block_hash == blk["block_hash"], f"block hash mismatch at {i}"
        prev = block_hash


# --- multisig trees -------------------------------------------------------
#
# A tree is either a leaf address (str) or a node ("N", m, (children...)).
# Approval by combination expansion: an m-of-n node is satisfied iff some
# m-sized combination of its children is fully satisfied.

def tree_satisfied(tree, present: frozenset) -> bool:
    if isinstance(tree, str):
        return tree in present
    _, m, children = tree
    return any(
        all(tree_satisfied(child, present) for child in combo)
        for combo in combinations(children, m)
    )


def tree_leaves(tree) -> list[str]:
    if isinstance(tree, str):
        return [tree]
    out = []
    for child in tree[2]:
        out.extend(tree_leaves(child))
    return out


def enumerate_tree_shapes(max_leaves: int, max_depth: int):
    """All structurally distinct m-of-n shapes (sibling order ignored).

    Shapes use "L" for a leaf; instantiate with concrete addresses before
    evaluating. Sibling multisets are enumerated in a canonical order so
    permutations of the same multiset appear once.
    """
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def shapes(leaf_budget: int, depth_budget: int):
        out = []
        if leaf_budget == 1:
            out.append("L")
        if depth_budget >= 1:

            def gen_children(budget: int, min_key: str):
                if budget == 0:
                    yield ()
                    return
                for n in range(1, budget + 1):
                    for sub in shapes(n, depth_budget - 1):
                        key = repr(sub)
                        if key < min_key:
                            continue
                        for rest in gen_children(budget - n, key):
                            yield (sub,) + rest

            for children in gen_children(leaf_budget, ""):
                if not children:
                    continue
                for m in range(1, len(children) + 1):
                    out.append(("N", m, children))
        return out

    for leaves in range(1, max_leaves + 1):
        for shape in shapes(leaves, max_depth):
            if shape != "L":
                yield shape


def instantiate_shape(shape, prefix: str = "leaf"):
    """Replace "L" placeholders with distinct synthetic leaf addresses."""
    counter = [0]

    def walk(node):
        if node == "L":
            name = f"{prefix}{counter[0]}"
            counter[0] += 1
            return name
        _, m, children = node
        return ("N", m, tuple(walk(c) for c in children))

    return walk(shape)


# --- ranking --------------------------------------------------------------

def insertion_rank(bids):
    """Stable insertion sort by (price, submitted_at, bid_id)."""

    def key(bid):
        return (bid.price, bid.submitted_at, bid.bid_id)

    ordered = []
    for bid in bids:
        pos = 0
        while pos < len(ordered) and key(ordered[pos]) <= key(bid):
            pos += 1
        ordered.insert(pos, bid)
    return ordered
