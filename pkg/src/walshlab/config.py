"""Global resolution cap.

Grids store 2^N float64 samples, so N = 26 is 512 MB.  The cap exists to
reject accidental 2^a allocations coming out of witness experiments; it can
be raised per process (``set_resolution_cap``) or per environment
(``WALSHLAB_MAX_RESOLUTION``).
"""
from __future__ import annotations

import os

DEFAULT_RESOLUTION_CAP = 26
CAP_ENV_VAR = "WALSHLAB_MAX_RESOLUTION"

_override: int | None = None


def resolution_cap() -> int:
    """Current cap on grid resolution N (process override wins over env)."""
    if _override is not None:
        return _override
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is not None:
        try:
            return int(raw)
        except ValueError as exc:
            raise ValueError(
                f"{CAP_ENV_VAR} must be an integer, got {raw!r}"
            ) from exc
    return DEFAULT_RESOLUTION_CAP


def set_resolution_cap(value: int | None) -> None:
    """Set (or with None, clear) the process-wide cap override."""
    global _override
    if value is not None and value < 0:
        raise ValueError("resolution cap must be nonnegative")
    _override = value


def check_resolution(resolution: int) -> int:
    """Validate a grid resolution against the cap; returns it unchanged."""
    if resolution < 0:
        raise ValueError(f"resolution must be >= 0, got {resolution}")
    cap = resolution_cap()
    if resolution > cap:
        raise ResolutionCapError(
            f"resolution {resolution} exceeds cap {cap} "
            f"(2^{resolution} samples); raise {CAP_ENV_VAR} or "
            f"set_resolution_cap() if this allocation is intentional"
        )
    return resolution


class ResolutionCapError(ValueError):
    """Requested grid would exceed the configured resolution cap."""
