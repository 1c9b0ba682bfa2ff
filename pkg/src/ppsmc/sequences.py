"""Ordered event-time sequences and interval bookkeeping.

Sequences are plain tuples of numbers, ascending in time.  Generated event
sequences additionally satisfy: strictly increasing, every element positive,
and (after truncation) no element beyond the sampling horizon.  Times may be
floats (continuous processes) or ints (discrete unrolled domains); all
operations here are agnostic.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence


def restrict(seq: Iterable[float], lo: float, hi: float,
             include_lo: bool = True, include_hi: bool = True) -> tuple:
    """Order-preserving subsequence of ``seq`` falling inside [lo, hi].

    Interval endpoints are included by default; pass ``include_lo=False`` for
    the half-open intervals used by :func:`partition`.
    """
    above = (lambda t: t >= lo) if include_lo else (lambda t: t > lo)
    below = (lambda t: t <= hi) if include_hi else (lambda t: t < hi)
    return tuple(t for t in seq if above(t) and below(t))


def partition(seq: Sequence[float], zs: Sequence[float]) -> list[tuple]:
    """Split an ascending sequence into the pieces ``(z_{i-1}, z_i]``.

    With R cut points this yields R+1 pieces; the first piece is everything
    up to and including z_1, the last everything strictly after z_R.  Exact
    inverse of :func:`concat` on ascending input.
    """
    if list(zs) != sorted(set(zs)):
        raise ValueError("cut points must be strictly increasing")
    if any(seq[i] > seq[i + 1] for i in range(len(seq) - 1)):
        raise ValueError("sequence must be ascending")
    bounds = [-math.inf, *zs, math.inf]
    return [restrict(seq, bounds[i], bounds[i + 1], include_lo=False)
            for i in range(len(bounds) - 1)]


def concat(pieces: Iterable[Sequence[float]]) -> tuple:
    """Concatenate partition pieces back into one sequence."""
    out = []
    for piece in pieces:
        out.extend(piece)
    return tuple(out)


def validate_times(seq: Sequence[float], horizon: float | None = None) -> None:
    """Reject sequences that violate the event-sequence contract.

    Raises ValueError on non-finite, non-positive, duplicated or descending
    times, or (when ``horizon`` is given) times past the horizon.
    """
    prev = 0.0
    for i, t in enumerate(seq):
        if isinstance(t, float) and not math.isfinite(t):
            raise ValueError(f"time at index {i} is not finite: {t!r}")
        if t <= prev:
            if i == 0:
                raise ValueError(f"times must be positive, got {t!r} at index 0")
            raise ValueError(f"times must be strictly increasing, got {t!r} after {prev!r}")
        prev = t
    if horizon is not None and seq and seq[-1] > horizon:
        raise ValueError(f"time {seq[-1]!r} lies beyond the horizon {horizon!r}")
