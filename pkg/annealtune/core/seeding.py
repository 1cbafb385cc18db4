"""Deterministic seed derivation.

Every random stream in annealtune is keyed by a tuple of labels hashed with
SHA-256, so results never depend on evaluation order or thread count.
"""

import hashlib
from typing import Any

import numpy as np


def _as_bytes(part: Any) -> bytes:
    if isinstance(part, (bytes, bytearray)):
        return bytes(part)
    if isinstance(part, np.ndarray):
        return np.ascontiguousarray(part, dtype=np.float64).tobytes()
    return repr(part).encode("utf-8")


def derive_seed(*parts: Any) -> int:
    """Derive a 63-bit seed from arbitrary labels.

    Arrays are hashed by their float64 bytes, everything else by ``repr``.
    """
    digest = hashlib.sha256()
    for part in parts:
        data = _as_bytes(part)
        digest.update(len(data).to_bytes(8, "little"))
        digest.update(data)
    return int.from_bytes(digest.digest()[:8], "little") & ((1 << 63) - 1)
