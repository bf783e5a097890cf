"""Canonical byte encoding shared by the chain, prover and registry.

Fields are concatenated in declared order, each prefixed by its 4-byte
big-endian length; integers are fixed-width big-endian.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

Hash256 = bytes
ZERO_HASH: Hash256 = bytes(32)


def sha256(*parts: bytes) -> Hash256:
    h = hashlib.sha256()
    for part in parts:
        h.update(part)
    return h.digest()


def encode_fields(*fields: bytes) -> bytes:
    return b"".join(len(f).to_bytes(4, "big") + f for f in fields)


def u32(n: int) -> bytes:
    return n.to_bytes(4, "big")


def u64(n: int) -> bytes:
    return n.to_bytes(8, "big")


def encode_values(values: Sequence[int]) -> bytes:
    """Length-prefixed list of non-negative integers (minimal big-endian)."""
    return encode_fields(
        u32(len(values)), *(v.to_bytes(max(1, (v.bit_length() + 7) // 8), "big") for v in values)
    )


def check_hash(name: str, value: bytes) -> None:
    if len(value) != 32:
        raise ValueError(f"{name} must be 32 bytes, got {len(value)}")
