"""Single-field mutation machinery for tamper-evidence tests.

Mutations operate on serialized block dicts so nothing in the ledger
implementation can silently normalize them away. Each mutation changes
exactly one leaf field to a different value of the same shape.
"""

from __future__ import annotations

import random

HEX_CHARS = "0123456789abcdef"


def field_paths(block_dict: dict) -> list[tuple]:
    """Every mutable leaf-field path within one block."""
    paths = [
        ("header", "height"),
        ("header", "prev_hash"),
        ("header", "tx_root"),
        ("header", "timestamp"),
        ("block_hash",),
    ]
    for i, tx in enumerate(block_dict["transactions"]):
        for key in ("tx_id", "kind", "signer", "public_key", "signature", "timestamp"):
            paths.append(("transactions", i, key))
        paths.extend(_body_paths(("transactions", i, "body"), tx["body"]))
    return paths


def _body_paths(prefix: tuple, value) -> list[tuple]:
    if isinstance(value, dict):
        out = []
        for key, item in value.items():
            out.extend(_body_paths(prefix + (key,), item))
        return out
    if isinstance(value, list):
        out = []
        for i, item in enumerate(value):
            out.extend(_body_paths(prefix + (i,), item))
        return out
    return [prefix]


def mutate_value(value, rng: random.Random):
    """A different value of the same general shape."""
    if isinstance(value, bool):
        return not value
    if isinstance(value, int):
        return value ^ (1 << rng.randrange(0, 40))
    if value is None:
        return "tampered"
    if isinstance(value, str):
        if value and all(c in HEX_CHARS for c in value):
            pos = rng.randrange(len(value))
            replacement = rng.choice([c for c in HEX_CHARS if c != value[pos]])
            return value[:pos] + replacement + value[pos + 1:]
        if not value:
            return "x"
        pos = rng.randrange(len(value))
        replacement = chr((ord(value[pos]) - 32 + rng.randrange(1, 90)) % 95 + 32)
        return value[:pos] + replacement + value[pos + 1:]
    raise TypeError(f"no mutation rule for {type(value)!r}")


def apply_mutation(block_dict: dict, path: tuple, rng: random.Random) -> dict:
    """Deep-copied block with the field at path changed."""
    import copy

    mutated = copy.deepcopy(block_dict)
    target = mutated
    for step in path[:-1]:
        target = target[step]
    original = target[path[-1]]
    replacement = mutate_value(original, rng)
    assert replacement != original
    target[path[-1]] = replacement
    return mutated
