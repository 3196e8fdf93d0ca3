"""Stable derivation of child seeds from a master seed.

Child seeds come from hashing the master seed together with a label path,
so independent jobs (per blend weight, per run, per purpose) get decorrelated
streams that are reproducible across platforms and Python versions.
"""

from __future__ import annotations

import hashlib


def derive_seed(master_seed: int, *labels: object) -> int:
    text = ":".join([str(master_seed)] + [str(part) for part in labels])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
