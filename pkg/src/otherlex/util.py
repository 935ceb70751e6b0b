"""Seed derivation, config hashing, stable JSON."""

from __future__ import annotations

import hashlib
import json


def derive_seed(root_seed: int, component: str) -> int:
    """Derive a per-component seed from one root seed, stably across platforms.

    Every random consumer in a run (fold shuffling, embedding init, negative
    sampling, classifier init, synthetic generation) gets its own stream so
    that adding or removing one consumer never shifts the others.
    """
    digest = hashlib.sha256(f"{root_seed}/{component}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def config_hash(config: dict) -> str:
    """Short stable hash of a flat config mapping, for report provenance."""
    lines = [f"{k}={config[k]}" for k in sorted(config)]
    digest = hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()
    return digest[:16]


def stable_json(obj) -> str:
    """Serialize for byte-identical reports: sorted keys, fixed separators, LF."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
