"""Deterministic child-seed derivation.

Everything stochastic in this package is keyed off one user-supplied seed;
sub-tasks (per-design simulations, GA arms, study games) get independent
streams derived from stable string tokens, so results never depend on
execution order or parallelism.
"""

from __future__ import annotations

import hashlib


def child_seed(seed: int, *tokens: object) -> int:
    """Derive a 63-bit seed from a master seed and a token path."""
    digest = hashlib.sha256(repr((int(seed),) + tokens).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
