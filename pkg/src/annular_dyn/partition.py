"""The partition into annuli between consecutive iterated maximum moduli,
cell lookup, and annular itineraries of orbits."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import List, Optional

from .errors import IndexBeyondDepth, InvalidR, RangeExceeded, RelabelViolation
from .functions import EntireFunction, evaluate
from .moduli import DEFAULT_TOL, mu
from .numbers import ExtLogReal, as_point, ext

DEFAULT_DEPTH = 12

REASONS = ("complete-to-depth", "range-exceeded", "left-partition-never")


@dataclass(frozen=True)
class Partition:
    logR: ExtLogReal
    levels: tuple          # levels[n] = mu^n(logR), finite values only
    depth: int
    saturated_at: Optional[int] = None
    tol: float = DEFAULT_TOL
    fn_key: str = ""

    @property
    def top_open(self) -> bool:
        """True when the level after the last stored one overflowed.

        The last cell [levels[-1], +inf) is then a genuine cell: every
        representable modulus lies below the overflowed boundary.
        """
        return self.saturated_at is not None and self.saturated_at == len(self.levels)

    def values(self):
        return [lv.value for lv in self.levels]


def build_partition(f: EntireFunction, logR, depth: Optional[int] = None, tol: float = DEFAULT_TOL) -> Partition:
    """levels[n] = mu^n(logR) for n < depth, stopping early at saturation."""
    lr = ext(logR)
    if lr.saturated:
        raise InvalidR("logR is saturated")
    first = mu(f, lr, tol)
    if not first > lr:
        raise InvalidR(f"mu(logR) = {first.to_str()} does not exceed logR = {lr.to_str()}")
    cap = DEFAULT_DEPTH if depth is None else int(depth)
    if cap < 1:
        raise ValueError("depth must be >= 1")
    levels = [lr]
    sat = None
    cur = lr
    while len(levels) < cap:
        try:
            nxt = first if len(levels) == 1 else mu(f, cur, tol)
        except RangeExceeded:
            sat = len(levels)
            break
        if nxt.saturated:
            sat = len(levels)
            break
        levels.append(nxt)
        cur = nxt
    return Partition(logR=lr, levels=tuple(levels), depth=len(levels), saturated_at=sat, tol=tol, fn_key=f.key)


def annulus_index(p: Partition, logmod) -> int:
    """0 below levels[0]; otherwise n with levels[n-1] <= logmod < levels[n]."""
    lm = ext(logmod)
    if lm.saturated and lm.value < 0:
        return 0
    vals = p.values()
    if lm.value < vals[0]:
        return 0
    n = bisect.bisect_right(vals, lm.value)
    if n < len(vals):
        return n
    if p.top_open and not lm.saturated:
        return len(vals)
    raise IndexBeyondDepth(len(vals) - 1)


def is_ambiguous(p: Partition, logmod, tol: Optional[float] = None) -> bool:
    """True when logmod lies within tolerance of a partition boundary."""
    tol = p.tol if tol is None else tol
    lm = ext(logmod)
    if lm.saturated:
        return False
    v = lm.value
    for lv in p.values():
        if abs(v - lv) <= tol * max(1, abs(lv)) * 10:
            return True
    return False


@dataclass
class Itinerary:
    symbols: List[int]
    truncated: bool
    reason: str
    logmods: list = field(default_factory=list)
    ambiguous: List[bool] = field(default_factory=list)

    def __post_init__(self):
        if self.reason not in REASONS:
            raise ValueError(f"unknown reason {self.reason!r}")

    @property
    def any_ambiguous(self) -> bool:
        return any(self.ambiguous)

    def transition_rule_holds(self) -> bool:
        s = self.symbols
        return all(b <= a + 1 for a, b in zip(s, s[1:]))


def compute_itinerary(f: EntireFunction, z, p: Partition, max_steps: int) -> Itinerary:
    """Symbols of z, f(z), ..., up to max_steps points or truncation."""
    point = as_point(z)
    symbols, logmods, amb = [], [], []
    reason, truncated = "complete-to-depth", False
    for n in range(max_steps):
        lm = point.log_abs()
        try:
            idx = annulus_index(p, lm)
        except IndexBeyondDepth:
            truncated, reason = True, "range-exceeded"
            break
        symbols.append(idx)
        logmods.append(ext(lm) if lm != float("-inf") else ExtLogReal.saturated_below())
        amb.append(is_ambiguous(p, lm) if lm != float("-inf") else False)
        if n == max_steps - 1:
            break
        try:
            point = evaluate(f, point)
        except RangeExceeded:
            truncated, reason = True, "range-exceeded"
            break
    return Itinerary(symbols=symbols, truncated=truncated, reason=reason, logmods=logmods, ambiguous=amb)


def relabel_offset(it1: Itinerary, it2: Itinerary) -> int:
    """Offset p with s'_n - s_n in {p, p+1} on the common prefix."""
    n = min(len(it1.symbols), len(it2.symbols))
    if n < 1:
        raise ValueError("itineraries share no prefix")
    diffs = [b - a for a, b in zip(it1.symbols[:n], it2.symbols[:n])]
    p = min(diffs)
    bad = [d for d in diffs if d not in (p, p + 1)]
    if bad:
        raise RelabelViolation(f"differences {sorted(set(diffs))} span more than two values")
    return p


def classify_fast_escaping(it: Itinerary, tail_window: int) -> bool:
    """True iff the last tail_window symbols climb by exactly one each step."""
    s = it.symbols
    if tail_window < 1 or len(s) < tail_window:
        raise ValueError("itinerary shorter than the tail window")
    tail = s[len(s) - tail_window:]
    return all(b == a + 1 for a, b in zip(tail, tail[1:]))
