"""Canonical JSON and timestamp formatting shared by the journal, API, and CLI."""

from __future__ import annotations

import json
from datetime import date, datetime, timezone
from typing import Any


def dumps_canonical(obj: Any) -> str:
    """Compact JSON; the single serializer behind journal lines and API bodies."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def format_instant(dt: datetime) -> str:
    """RFC3339 UTC instant; fractional seconds only when present."""
    utc = dt.astimezone(timezone.utc)
    if utc.microsecond:
        return utc.strftime("%Y-%m-%dT%H:%M:%S.%fZ")
    return utc.strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_instant(text: str) -> datetime:
    if not text.endswith("Z"):
        raise ValueError(f"instant must be UTC ('Z' suffix): {text!r}")
    parsed = datetime.fromisoformat(text[:-1])
    if parsed.tzinfo is not None:
        raise ValueError(f"instant must not carry an offset besides 'Z': {text!r}")
    return parsed.replace(tzinfo=timezone.utc)


def parse_iso_date(text: str) -> date:
    return date.fromisoformat(text)
