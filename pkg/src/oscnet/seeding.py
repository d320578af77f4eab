"""Deterministic derivation of named random sub-streams from one seed.

Every stochastic component (weight init, shuffling, wave generation, ...)
draws from its own named stream so that adding randomness to one component
never perturbs another.
"""

from __future__ import annotations

import hashlib

__all__ = ["substream"]


def substream(seed: int, name: str) -> int:
    """A stable 63-bit seed for the sub-stream ``name`` of ``seed``."""
    digest = hashlib.sha256(f"{int(seed)}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1
