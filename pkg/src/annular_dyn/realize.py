"""Backward construction of points with a prescribed annulus sequence.

Given chain annuli E_n = B_(seq[n]) with f(E_n) ⊇ E_(n+1), a target point on
the last annulus is pulled back one step at a time, then the orbit of the
resulting z_0 is recomputed forwards and checked against the partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .covering import Annulus, newton_multistart
from .errors import (
    NoPreimageFound,
    PreconditionError,
    RangeExceeded,
    RealizationFailed,
)
from .functions import EntireFunction, evaluate
from .moduli import mu
from .numbers import ComplexPoint, ExtLogReal, as_point, ctx, ext, wrap_arg
from .partition import annulus_index, build_partition
from .synthesis import Plan, RateSpec, TransitionSystem, admissible_check, plan_upper_bound

DEFAULT_TOL = 1e-8
EXTRA_BITS = 300
MAX_REALIZE_BITS = 1 << 15
MAX_RETRIES = 6
RELAX = 1e-12


@dataclass
class RealizationResult:
    point: Optional[ComplexPoint]
    requested: List[int]
    verified_len: int
    residuals: List[float]
    newton_stats: dict = field(default_factory=dict)
    orbit_logmods: List[ExtLogReal] = field(default_factory=list)
    symbols: List[int] = field(default_factory=list)
    precision: int = 0
    reason: str = ""
    orbit: List[ComplexPoint] = field(default_factory=list, repr=False)

    @property
    def complete(self) -> bool:
        return self.verified_len == len(self.requested)


def _residual(lm, region: Annulus) -> float:
    """Distance of log|z| to the closed log-interval, relative to its scale."""
    lm = ext(lm)
    if lm.saturated:
        return math.inf
    lo, hi = region.t_in, region.t_out
    scale = lo if lo > 1 else (-lo if -lo > 1 else ext(1))
    if lm < lo:
        return float(((lo - lm) / scale).value)
    if lm > hi:
        return float(((lm - hi) / scale).value)
    return 0.0


def _sub_annulus(region: Annulus, frac) -> Optional[Annulus]:
    """The middle ``frac`` of the region in log scale, or None when it is below resolution."""
    mid = region.mid()
    half = (region.t_out - region.t_in) * (ctx.mpf(frac) / 2)
    lo, hi = mid - half, mid + half
    if not lo < hi:
        return None
    return Annulus(lo, hi)


def _in_region(z: ComplexPoint, region: Annulus, tol: float) -> bool:
    return _residual(z.log_abs(), region) <= tol


def _point_distance(a: ComplexPoint, b: ComplexPoint) -> float:
    if a.is_plain and b.is_plain:
        return float(abs(a.z - b.z))
    d = abs(float((ext(a.log_abs()) - ext(b.log_abs())).value))
    aa, ab = a.argument(), b.argument()
    if aa is not None and ab is not None:
        d += abs(float(wrap_arg(aa - ab + ctx.pi) - ctx.pi))
    return d


def solve_preimage(f: EntireFunction, w, region: Annulus, seeds: int = 8, tol: float = 1e-10,
                   frac=0.5, stats: Optional[dict] = None, anchor: Optional[ComplexPoint] = None) -> ComplexPoint:
    """z with f(z) = w and log|z| in the region.

    Explicit branches are tried on the middle part of the region first, then
    on the whole region, then with the inner edge relaxed by a relative 1e-12
    (annuli whose width is below resolution).  Newton multistart is the last
    resort.  Among several branches the one nearest the anchor, or else the
    one nearest the log-midpoint, is returned.  Raises NoPreimageFound.
    """
    w = as_point(w)
    stats = stats if stats is not None else {}
    tries = []
    sub = _sub_annulus(region, frac)
    if sub is not None:
        tries.append(sub)
    tries.append(region)
    relaxed = region.t_in - abs(region.t_in) * RELAX
    if relaxed < region.t_in:
        tries.append(Annulus(relaxed, region.t_out))
    mid = region.mid()
    for a in tries:
        if f.branches is None:
            break
        try:
            cands = f.branches(w, a.t_in.value, a.t_out.value, 8)
        except (RangeExceeded, ValueError, OverflowError):
            cands = []
        stats["branch_calls"] = stats.get("branch_calls", 0) + 1
        good = [z for z in cands if _in_region(z, region, tol)]
        if good:
            if anchor is not None:
                good.sort(key=lambda z: _point_distance(z, anchor))
            else:
                good.sort(key=lambda z: abs(float((ext(z.log_abs()) - mid).value)))
            return good[0]
    for a in tries:
        stats["newton_runs"] = stats.get("newton_runs", 0) + 1
        try:
            z = newton_multistart(f, w, a.t_in.value, a.t_out.value, seeds=seeds)
        except (RangeExceeded, OverflowError, ValueError):
            z = None
        if z is not None and _in_region(z, region, tol):
            return z
    raise NoPreimageFound(f"no preimage of w in the annulus (log {region.t_in.to_str(8)}, {region.t_out.to_str(8)})")


def _mag_bits(x: ExtLogReal) -> int:
    return int(ctx.mag(x.value)) if x.value else 0


def orbit_cost(body: Sequence, heads: Sequence, tol: float = DEFAULT_TOL) -> Optional[float]:
    """Nats of precision lost recomputing an orbit, or None when beyond the cap.

    body[i] ~ log|z_i| for i < d and heads[i] ~ log|z_i| for 0 < i <= d.  The
    forward error of z_j is about |z_0| prod_(i<j) |f'(z_i)| 2^-P; taking
    |f'| ~ |f| (exponential type) and asking that log|f(z_j)| keeps relative
    accuracy tol gives max_j sum_(i<=j) log|z_i| - log log|z_(j+1)| + log(1/tol).
    """
    body = [ext(x) for x in body]
    heads = [ext(x) for x in heads]
    if any(v.saturated for v in body + heads):
        return None
    # a head only enters through its log, whose size is its binary exponent
    top = max([_mag_bits(v) for v in body] + [_mag_bits(v).bit_length() for v in heads] + [0])
    if top + 64 > MAX_REALIZE_BITS:
        return None
    with ctx.workprec(max(ctx.prec, top + 64)):
        acc = ext(0)
        worst = ext(0)
        for lm, nxt in zip(body, heads):
            acc = acc + lm
            c = acc - (nxt.log() if nxt > 1 else ext(0))
            if c > worst:
                worst = c
        if worst > MAX_REALIZE_BITS:
            return None
        return float(worst.value) + math.log(1 / tol)


def needed_bits(regions: Sequence[Annulus], tol: float = DEFAULT_TOL) -> int:
    """Lower bound on the precision for an orbit through the regions, from
    the annulus edges (inner radii in the sum, outer radii in the logs)."""
    body = [a.t_in for a in regions[:-1]]
    heads = [a.t_out for a in regions[1:]]
    cost = orbit_cost(body, heads, tol)
    if cost is None:
        return MAX_REALIZE_BITS + 1
    return max(ctx.prec, int(cost / math.log(2)) + EXTRA_BITS)


def _orbit_bits(points: Sequence[ComplexPoint], tol: float) -> int:
    lms = [ext(z.log_abs()) for z in points]
    cost = orbit_cost(lms[:-1], lms[1:], tol)
    if cost is None:
        return MAX_REALIZE_BITS + 1
    return max(ctx.prec, int(cost / math.log(2)) + EXTRA_BITS)


def _backward(f, regions: List[Annulus], frac, seeds, tol, stats, anchors=None):
    """Backward orbit [z_0, ..., z_d] from the log-midpoint of the last region."""
    last = regions[-1]
    z = ComplexPoint.from_polar(last.mid().value, 0)
    orbit = [z]
    for n in range(len(regions) - 2, -1, -1):
        anchor = anchors[n] if anchors is not None and n < len(anchors) else None
        z = solve_preimage(f, z, regions[n], seeds=seeds, tol=tol, frac=frac, stats=stats, anchor=anchor)
        orbit.append(z)
    return orbit[::-1]


def _forward(f, z0, regions, seq, partition, tol):
    """(verified_len, residuals, logmods, symbols, reason)."""
    z = z0
    res, lms, syms = [], [], []
    for n, region in enumerate(regions):
        lm = ext(z.log_abs())
        r = _residual(lm, region)
        try:
            sym = annulus_index(partition, lm)
        except Exception:
            sym = -1
        res.append(r)
        lms.append(lm)
        syms.append(sym)
        if r > tol or sym != seq[n]:
            return n, res, lms, syms, f"step {n}: residual {r:.3g}, symbol {sym} vs {seq[n]}"
        if n == len(regions) - 1:
            break
        try:
            z = evaluate(f, z)
        except RangeExceeded as exc:
            return n + 1, res, lms, syms, f"range exceeded after step {n}: {exc}"
    return len(regions), res, lms, syms, ""


def realize_itinerary(f: EntireFunction, chain, logR, seq: Sequence[int], depth: Optional[int] = None,
                      seeds: int = 8, tol: float = DEFAULT_TOL, strict: bool = True,
                      check_admissible: bool = True,
                      anchors: Optional[Sequence[ComplexPoint]] = None) -> RealizationResult:
    """A point whose orbit visits B_(seq[0]), ..., B_(seq[depth]).

    verified_len counts the verified symbols, so a complete result has
    verified_len = depth + 1.  When the orbit cannot be recomputed that far
    the attempt stops at the last representable index and the reason says so.
    """
    seq = [int(s) for s in seq]
    if not seq:
        raise ValueError("empty sequence")
    depth = len(seq) - 1 if depth is None else min(int(depth), len(seq) - 1)
    if depth < 0:
        raise ValueError("depth must be >= 0")
    seq = seq[: depth + 1]
    if max(seq) >= len(chain.entries):
        raise PreconditionError("sequence uses an index beyond the chain")
    if check_admissible and not admissible_check(seq, TransitionSystem.from_chain(chain, horizon=len(seq))):
        raise PreconditionError("sequence is not admissible for the chain")
    all_regions = [chain.entries[s].annulus() for s in seq]
    # forward representability caps the depth actually attempted
    cut = len(all_regions)
    while cut > 1 and needed_bits(all_regions[:cut]) > MAX_REALIZE_BITS:
        cut -= 1
    capped = "" if cut == len(all_regions) else f"range-exceeded: orbit representable to depth {cut - 1} only"
    regions = all_regions[:cut]
    partition = build_partition(f, logR, depth=max(seq) + 2)
    stats = {"retries": 0, "escalations": 0}
    bits = needed_bits(regions)
    best = None
    frac = ctx.mpf(0.5)
    escalated = False
    attempt = 0
    while attempt <= MAX_RETRIES:
        z0, orbit, out = None, [], (0, [], [], [], "")
        try:
            with ctx.workprec(bits):
                orbit = _backward(f, regions, frac, seeds, tol, stats, anchors)
            # the pulled-back orbit fixes the precision the forward check needs
            want = _orbit_bits(orbit, tol)
            if want > bits and want <= MAX_REALIZE_BITS:
                bits = want
                stats["precision_raises"] = stats.get("precision_raises", 0) + 1
                with ctx.workprec(bits):
                    orbit = _backward(f, regions, frac, seeds, tol, stats, anchors)
            z0 = orbit[0]
            with ctx.workprec(bits):
                out = _forward(f, z0, regions, seq, partition, tol)
        except NoPreimageFound as exc:
            out = (0, [], [], [], str(exc))
        vlen, res, lms, syms, reason = out
        if vlen == len(regions) and capped:
            reason = capped
        cand = RealizationResult(z0, list(seq), vlen, res, dict(stats), lms, syms, bits, reason, orbit)
        if best is None or cand.verified_len > best.verified_len:
            best = cand
        if vlen == len(regions):
            break
        if not escalated and res and any(r > tol for r in res):
            bits, escalated = min(2 * bits, MAX_REALIZE_BITS), True
            stats["escalations"] += 1
            continue
        attempt += 1
        stats["retries"] = attempt
        frac = frac / 2
    best.newton_stats = dict(stats)
    if strict and not best.complete:
        raise RealizationFailed(best.verified_len, partial=best)
    return best


def stabilization(f: EntireFunction, chain, logR, seq: Sequence[int], depths: Sequence[int]) -> List[float]:
    """log10 of the move of z_0 between successive depths (an observation,
    not a check).  Plain points use |z' - z|; points kept in log-polar form
    use the relative distance |dlog|z|| + |darg|.

    Each deeper pullback is anchored on the previous orbit so that the same
    inverse branches are followed.
    """
    pts, anchors = [], None
    for d in depths:
        r = realize_itinerary(f, chain, logR, seq, d, strict=False, anchors=anchors)
        pts.append((r.point, r.precision))
        anchors = r.orbit or None
    moves = []
    for (a, pa), (b, pb) in zip(pts, pts[1:]):
        if a is None or b is None:
            moves.append(math.nan)
            continue
        with ctx.workprec(max(pa, pb)):
            if a.is_plain and b.is_plain:
                d = abs(a.z - b.z)
            else:
                d = abs(ctx.mpf(a.log_abs()) - ctx.mpf(b.log_abs()))
                d += abs(wrap_arg(a.argument() - b.argument() + ctx.pi) - ctx.pi)
            moves.append(-math.inf if d == 0 else float(ctx.log10(d)))
    return moves


# ---------------------------------------------------------------------------
# prescribed rates


@dataclass
class PrescribedResult:
    realization: RealizationResult
    lower_margins: List[float]
    upper_checks: List[dict]
    bound_kind: str

    @property
    def lower_ok(self) -> bool:
        return all(m >= -DEFAULT_TOL for m in self.lower_margins)

    @property
    def upper_ok(self) -> bool:
        return all(c["ok"] for c in self.upper_checks)


def _fmt_margin(x: ExtLogReal) -> float:
    if x.saturated:
        return math.inf if x.value > 0 else -math.inf
    return float(x.value)


def realize_prescribed(f: EntireFunction, chain, logR, plan: Plan, rate: RateSpec, depth: int,
                       seeds: int = 8, tol: float = DEFAULT_TOL) -> PrescribedResult:
    """Realize the plan's annulus indices and report log|f^n| - log a_n and the
    upper bound at each rule-1 index within depth."""
    seq = plan.targets[: depth + 1]
    r = realize_itinerary(f, chain, logR, seq, depth, seeds=seeds, tol=tol, strict=False,
                          check_admissible=False)
    lower = []
    for n in range(r.verified_len):
        lm = r.orbit_logmods[n]
        la = ext(rate.log_a[n])
        scale = la if la > 1 else (-la if -la > 1 else ext(1))
        lower.append(_fmt_margin((lm - rate.log_a[n]) / scale))
    upper = []
    mu_fn = lambda t: mu(f, t)
    for n in plan.n_j_out:
        if n >= r.verified_len:
            continue
        bound = plan_upper_bound(plan, rate.log_a[n], mu_fn)
        lm = r.orbit_logmods[n]
        upper.append({"n": n, "logmod": lm, "bound": bound, "ok": bool(lm <= bound)})
    return PrescribedResult(r, lower, upper, plan.bound_kind)
