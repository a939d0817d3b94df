"""Best-effort result cache location (override with POSETMC_CACHE)."""

from __future__ import annotations

import os
from pathlib import Path


def cache_dir(*subdirs: str) -> Path:
    root = os.environ.get("POSETMC_CACHE")
    base = Path(root) if root else Path.home() / ".cache" / "posetmc"
    for sub in subdirs:
        base = base / sub
    return base
