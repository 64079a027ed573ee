"""Keyed derivation of 64-bit sub-seeds from a single master seed.

Every random decision in the pipeline flows from one master seed through
named sub-streams, so any single sample / augmentation / evaluation run is
reproducible in isolation without replaying the whole pipeline.
"""

from __future__ import annotations

import hashlib


def derive_seed(master: int, *parts: object) -> int:
    """Derive a 64-bit seed from a master seed and a label path.

    The label path is hashed, not summed, so distinct paths never collide by
    arithmetic accident and insertion order matters.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master)).encode("ascii"))
    for part in parts:
        h.update(b"/")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest(), "big")
