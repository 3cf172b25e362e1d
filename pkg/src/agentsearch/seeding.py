"""Stable seed derivation so every random draw is reproducible from the run seed."""

from __future__ import annotations

import hashlib


def stable_seed(*parts) -> int:
    """Map an arbitrary tuple of parts to a 63-bit integer seed.

    Uses sha256 over the '|'-joined string forms, so the result does not
    depend on interpreter hash randomization or platform word size.
    """
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
