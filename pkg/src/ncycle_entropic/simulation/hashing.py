"""Stable fingerprints of run configurations."""

from __future__ import annotations

import hashlib
from typing import TYPE_CHECKING

import msgspec

if TYPE_CHECKING:
    from ncycle_entropic.simulation.config import RunConfig


def canonical_bytes(config: RunConfig) -> bytes:
    """Canonical JSON (sorted keys, no whitespace) of the effective configuration."""
    return msgspec.json.encode(msgspec.structs.asdict(config), order="sorted")


def compute_fingerprint(config: RunConfig) -> str:
    """SHA-256 of the canonical encoding; equal configurations share it."""
    return hashlib.sha256(canonical_bytes(config)).hexdigest()


def short_fingerprint(config: RunConfig, length: int = 12) -> str:
    return compute_fingerprint(config)[:length]
