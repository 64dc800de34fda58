"""Deterministic seed derivation.

All randomness in a run flows from one root seed; child seeds are derived
by hashing the root together with a purpose tag and an index, so restarts,
targets and benchmark rows get independent, reproducible streams in any
execution order.
"""

import hashlib


def child_seed(root: int, *path) -> int:
    """64-bit child seed for (root, path...), stable across platforms."""
    text = "/".join([str(root), *map(str, path)])
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")
