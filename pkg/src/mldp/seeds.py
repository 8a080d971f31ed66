"""Deterministic seed derivation for reproducible runs.

Hash-based so child seeds are stable across processes and Python
versions, unlike the built-in salted hash().
"""

from __future__ import annotations

import hashlib

__all__ = ["derive_seed"]


def derive_seed(base: int, *parts) -> int:
    """Stable 63-bit child seed from a base seed and a label path.

    derive_seed(7, "laplace", 3, 0) always returns the same value, and
    distinct label paths give independent-looking seeds.
    """
    digest = hashlib.sha256()
    digest.update(str(int(base)).encode())
    for part in parts:
        digest.update(b"|")
        digest.update(str(part).encode())
    return int.from_bytes(digest.digest()[:8], "big") >> 1
