"""Seed derivation so that every unit of work can be re-run in isolation."""
from __future__ import annotations

import hashlib
import json


def derive_seed(master: int, *parts) -> int:
    """Stable 63-bit seed from a master seed and any JSON-serialisable identifiers."""
    blob = json.dumps([master, *parts], sort_keys=True, separators=(",", ":")).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") >> 1


def content_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
