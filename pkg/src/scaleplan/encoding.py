"""Canonical JSON encoding and content digests.

Canonical form: UTF-8, sorted keys, no whitespace, floats as their shortest
round-tripping decimal (Python repr), NaN/Infinity rejected. Two semantically
equal values always encode to identical bytes, which makes byte equality a
valid determinism check and digests stable.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

__all__ = ["canonical_json", "digest"]


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def digest(obj: Any) -> str:
    """Short stable content digest of a JSON-encodable value."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()[:12]
