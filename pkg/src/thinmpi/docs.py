"""Canonical document serialization helpers.

All structured outputs go through :func:`canonical_json` so that identical
in-memory values always serialize to byte-identical text, which the CLI
determinism contract relies on.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_json(obj: Any) -> str:
    """Serialize ``obj`` to deterministic, human-readable JSON text."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def fingerprint(text: str) -> str:
    """Content hash of a serialized document (sha256, hex)."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
