"""Symbol-level combinatorics: admissible itineraries, generators for the
periodic / bounded / oscillating / slow-escape classes, prescribed-rate plans
and binary branching witnesses."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Union

from .errors import (
    ChainTooShort,
    DepthExceeded,
    InsufficientBranching,
    PreconditionError,
    RangeExceeded,
    RateViolation,
    Unrealizable,
)
from .numbers import ExtLogReal, ext

INDEX_MODES = ("time", "state")
BOUND_KINDS = ("M2", "power1+eps")


@dataclass
class TransitionSystem:
    """Backjump rules: s_(n+1) = s_n + 1, or a jump to {0..s_n} minus I_j.

    With ``index_by="time"`` a jump is allowed at step n when n = n_j; with
    ``"state"`` it is allowed when the current symbol s_n equals n_j (the
    reading used for chains, where B_(n_j) covers the earlier annuli).
    """

    n_j: List[int]
    I_j: List[set] = field(default_factory=list)
    horizon: int = 64
    index_by: str = "time"

    def __post_init__(self):
        self.n_j = [int(x) for x in self.n_j]
        if any(b <= a for a, b in zip(self.n_j, self.n_j[1:])):
            raise ValueError("n_j must be strictly increasing")
        I = [set(int(v) for v in s) for s in self.I_j]
        if len(I) > len(self.n_j):
            raise ValueError("more exception sets than backjump indices")
        I += [set() for _ in range(len(self.n_j) - len(I))]
        if any(len(s) > 1 for s in I):
            raise ValueError("each exception set has at most one element")
        self.I_j = I
        if self.index_by not in INDEX_MODES:
            raise ValueError(f"index_by must be one of {INDEX_MODES}")
        self._pos = {v: j for j, v in enumerate(self.n_j)}

    @classmethod
    def from_chain(cls, chain, horizon: Optional[int] = None, index_by: str = "state") -> "TransitionSystem":
        return cls(list(chain.n_j), [set(s) for s in chain.I_j],
                   horizon if horizon is not None else 64, index_by)

    def jump_index(self, n: int, s: int) -> Optional[int]:
        key = n if self.index_by == "time" else s
        return self._pos.get(key)

    def successors(self, n: int, s: int, cap: Optional[int] = None) -> List[int]:
        """Allowed s_(n+1), ascending."""
        out = {s + 1}
        j = self.jump_index(n, s)
        if j is not None:
            out.update(x for x in range(s + 1) if x not in self.I_j[j])
        if cap is not None:
            out = {x for x in out if x <= cap}
        return sorted(out)

    def allows(self, n: int, s: int, nxt: int) -> bool:
        if nxt == s + 1:
            return True
        j = self.jump_index(n, s)
        return j is not None and 0 <= nxt <= s and nxt not in self.I_j[j]


def admissible_check(seq: Sequence[int], ts: TransitionSystem) -> bool:
    seq = list(seq)
    if any(int(s) < 0 for s in seq):
        return False
    return all(ts.allows(n, a, b) for n, (a, b) in enumerate(zip(seq, seq[1:])))


def count_admissible(ts: TransitionSystem, length: int, s0: int, level_cap: int) -> int:
    """Number of admissible prefixes of ``length`` symbols starting at s0,
    all symbols <= level_cap."""
    if length < 1 or s0 < 0 or s0 > level_cap:
        return 0
    counts = {s0: 1}
    for n in range(length - 1):
        nxt = {}
        for s, c in counts.items():
            for x in ts.successors(n, s, level_cap):
                nxt[x] = nxt.get(x, 0) + c
        counts = nxt
    return sum(counts.values())


def enumerate_admissible(ts: TransitionSystem, length: int, s0: int, level_cap: int) -> List[List[int]]:
    """All admissible prefixes by exhaustive product enumeration (oracle)."""
    if length < 1 or s0 < 0 or s0 > level_cap:
        return []
    out = []
    for tail in itertools.product(range(level_cap + 1), repeat=length - 1):
        seq = [s0, *tail]
        if admissible_check(seq, ts):
            out.append(seq)
    return out


# ---------------------------------------------------------------------------
# generators


def _length(ts: TransitionSystem, length: Optional[int]) -> int:
    n = ts.horizon if length is None else int(length)
    if n < 1:
        raise ValueError("length must be >= 1")
    return n


def gen_periodic(ts: TransitionSystem, period: int, s_min: int, length: Optional[int] = None) -> List[int]:
    """s_min, s_min+1, ..., s_min+period-1, then back to s_min, repeated."""
    if period < 1:
        raise ValueError("period must be >= 1")
    L = _length(ts, length)
    seq = [s_min]
    for n in range(L - 1):
        s = seq[-1]
        if (n + 1) % period:
            seq.append(s + 1)
            continue
        j = ts.jump_index(n, s)
        if j is None:
            raise Unrealizable(f"no backjump allowed at step {n} from symbol {s}",
                               witness={"n": n, "symbol": s, "reason": "no-backjump"})
        if s_min in ts.I_j[j]:
            raise Unrealizable(f"target {s_min} excluded at backjump {j}",
                               witness={"n": n, "j": j, "I_j": sorted(ts.I_j[j])})
        seq.append(s_min)
    return seq


def _feasible_table(ts: TransitionSystem, L: int, lo: int, hi: int):
    """can[n][s]: some admissible continuation in [lo, hi] from (n, s) to length L."""
    can = [dict() for _ in range(L)]
    for s in range(lo, hi + 1):
        can[L - 1][s] = True
    for n in range(L - 2, -1, -1):
        for s in range(lo, hi + 1):
            can[n][s] = any(lo <= x and can[n + 1].get(x, False) for x in ts.successors(n, s, hi))
    return can


def gen_bounded(ts: TransitionSystem, s_min: int, s_max: int, count: int,
                length: Optional[int] = None) -> List[List[int]]:
    """The ``count`` lexicographically least admissible prefixes in [s_min, s_max]."""
    if count < 1:
        return []
    if count > 1 and s_max < s_min + 2:
        raise PreconditionError("need s_max >= s_min + 2 for more than one sequence")
    L = _length(ts, length)
    can = _feasible_table(ts, L, s_min, s_max)
    out: List[List[int]] = []

    def walk(prefix):
        if len(out) >= count:
            return
        n = len(prefix) - 1
        if n == L - 1:
            out.append(list(prefix))
            return
        for x in ts.successors(n, prefix[-1], s_max):
            if x >= s_min and can[n + 1].get(x, False):
                prefix.append(x)
                walk(prefix)
                prefix.pop()
                if len(out) >= count:
                    return

    for s0 in range(s_min, s_max + 1):
        if can[0].get(s0, False):
            walk([s0])
        if len(out) >= count:
            break
    if len(out) < count:
        raise Unrealizable(f"only {len(out)} bounded sequences exist", witness={"found": len(out)})
    return out


@dataclass
class Oscillation:
    seq: List[int]
    peaks: List[int]
    returns: int

    @property
    def peaks_grow(self) -> bool:
        return len(self.peaks) >= 2 and all(b >= a for a, b in zip(self.peaks, self.peaks[1:])) \
            and self.peaks[-1] > self.peaks[0]


def gen_oscillating(ts: TransitionSystem, s_min: int, peak_schedule: Union[Sequence[int], Callable[[int], int]],
                    length: Optional[int] = None) -> Oscillation:
    """Climb to the j-th scheduled peak (or the first allowed backjump past it),
    then return to s_min; repeat."""
    L = _length(ts, length)
    sched = peak_schedule if callable(peak_schedule) else (lambda j, p=list(peak_schedule): p[min(j, len(p) - 1)])
    seq, peaks, j = [s_min], [], 0
    for n in range(L - 1):
        s = seq[-1]
        jj = ts.jump_index(n, s)
        if s >= max(sched(j), s_min + 1) and jj is not None and s_min not in ts.I_j[jj]:
            peaks.append(s)
            seq.append(s_min)
            j += 1
        else:
            seq.append(s + 1)
    return Oscillation(seq, peaks, len(peaks))


@dataclass
class RateSpec:
    log_a: List[ExtLogReal]
    R0: Optional[ExtLogReal] = None
    formula: Optional[str] = None

    def __post_init__(self):
        self.log_a = [ext(v) for v in self.log_a]
        if self.R0 is not None:
            self.R0 = ext(self.R0)

    def __len__(self):
        return len(self.log_a)


def rate_from_formula(formula: str, length: int, R0=None, **params) -> RateSpec:
    """Named rate families (log scale): linear c0 + c1 n, power c0 (n + 1)^p,
    exp-linear c0 e^(c1 n)."""
    c0 = float(params.get("c0", 2.0))
    c1 = float(params.get("c1", 0.5))
    if formula == "linear":
        vals = [c0 + c1 * n for n in range(length)]
    elif formula == "power":
        p = float(params.get("p", 2.0))
        vals = [c0 * (n + 1) ** p for n in range(length)]
    elif formula == "exp-linear":
        vals = [ext(c0) * ext(c1 * n).exp() for n in range(length)]
    else:
        raise ValueError(f"unknown rate formula {formula!r}")
    return RateSpec(vals, R0, f"{formula}:{','.join(f'{k}={v}' for k, v in sorted(params.items()))}")


def load_rate_file(path, R0=None) -> RateSpec:
    """Lines ``n log_a_n``; '#' starts a comment.  Indices must run 0, 1, 2, ..."""
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            n, v = line.split()[:2]
            pairs.append((int(n), v))
    pairs.sort()
    if [n for n, _ in pairs] != list(range(len(pairs))):
        raise ValueError("rate file indices must be 0..N-1")
    return RateSpec([ext(v) for _, v in pairs], R0, f"file:{path}")


def check_rate(rate: RateSpec, mu_fn: Callable, tol: float = 1e-9) -> None:
    """a_n >= R0 and log a_(n+1) <= mu(log a_n); RateViolation at the first bad n."""
    a = rate.log_a
    for n, v in enumerate(a):
        if rate.R0 is not None and v < rate.R0:
            raise RateViolation(n, f"log a_{n} below log R0")
    for n in range(len(a) - 1):
        bound = mu_fn(a[n])
        if a[n + 1] > bound + tol * max(1.0, abs(float(bound))):
            raise RateViolation(n, f"log a_{n + 1} exceeds mu(log a_{n})")


# ---------------------------------------------------------------------------
# slow escape


@dataclass
class SlowEscape:
    seq: List[int]
    loiter_lengths: List[int]
    first_loiter_end: int      # first n with levels[s_n] <= log a_n
    truncated: bool = False


def _level(levels, s, top_open):
    if s < len(levels):
        return ext(levels[s])
    if top_open and s == len(levels):
        return ExtLogReal.saturated_above()
    return None


def gen_slow_escape(ts: TransitionSystem, rate: RateSpec, partition, length: Optional[int] = None) -> SlowEscape:
    """Climb whenever levels[s + 1] <= log a_(n+1), otherwise loiter via a backjump
    to the highest allowed symbol whose level stays below the rate."""
    L = min(_length(ts, length), len(rate))
    levels = list(partition.levels)
    top_open = partition.top_open
    seq = [0]
    for n in range(L - 1):
        s = seq[-1]
        target = rate.log_a[n + 1]
        opts = ts.successors(n, s)
        ok, unknown = [], False
        for x in opts:
            lv = _level(levels, x, top_open)
            if lv is None:
                unknown = True
                continue
            if lv <= target:
                ok.append(x)
        if unknown and not ok:
            raise DepthExceeded(f"partition has no level {s + 1}", partial=seq)
        if ok:
            seq.append(max(ok))
        elif s in opts:
            seq.append(s)
        else:
            seq.append(min(opts))
    runs, cur = [], 0
    for a, b in zip(seq, seq[1:]):
        if b == a:
            cur += 1
        elif cur:
            runs.append(cur)
            cur = 0
    if cur:
        runs.append(cur)
    # from here on levels[s_n] <= log a_n holds pointwise
    first_end = len(seq)
    for n, s in enumerate(seq):
        lv = _level(levels, s, top_open)
        if lv is not None and lv <= rate.log_a[n]:
            first_end = n
            break
    return SlowEscape(seq, runs, first_end)


# ---------------------------------------------------------------------------
# prescribed rates


@dataclass
class Plan:
    targets: List[int]
    n_j_out: List[int]
    bound_kind: str
    mode: str
    eps: float
    firings: List[dict] = field(default_factory=list)
    lower_ok: List[bool] = field(default_factory=list)
    upper_ok: List[bool] = field(default_factory=list)
    least_ok: List[bool] = field(default_factory=list)
    note: str = ""

    @property
    def valid(self) -> bool:
        return all(self.lower_ok) and all(self.upper_ok) and all(self.least_ok)


def _chain_t(chain, p):
    ents = chain.entries
    return ents[p].t if p < len(ents) else ExtLogReal.saturated_above()


def _least_p(chain, log_a, limit):
    for p in range(limit + 1):
        if _chain_t(chain, p) >= log_a:
            return p
    return None


def plan_step(chain, m: int, log_a_next, choose_up: bool = False):
    """One application of the two rules from E_n = B_m.

    Returns (next index, fired, least p or None, excluded-target flag).
    """
    jump = chain.n_j.index(m) if m in chain.n_j else None
    if jump is None:
        return m + 1, False, None, False
    p = _least_p(chain, log_a_next, m + 1)
    if p is None:
        raise ChainTooShort(f"no chain radius reaches log a = {ext(log_a_next).to_str(8)}")
    excl = chain.I_j[jump] if jump < len(chain.I_j) else set()
    bumped = False
    if p in excl:
        p, bumped = p + 1, True
    if choose_up and p <= m:
        return m + 1, True, p, bumped
    return p, True, p, bumped


def prescribed_rate_plan(rate: RateSpec, chain, mode: str, mu_fn: Optional[Callable] = None,
                         eps: float = 0.5, length: Optional[int] = None, choices: Optional[dict] = None) -> Plan:
    """Chain indices E_n following the two selection rules, with plan-level checks.

    ``choices`` maps step n to True to take p = m + 1 instead of the least p
    at a rule-1 step with p <= m (branching).
    """
    if mode not in ("MC", "noMC"):
        raise ValueError("mode must be MC or noMC")
    if mu_fn is not None:
        check_rate(rate, mu_fn)
    L = len(rate) if length is None else min(int(length), len(rate))
    if L < 1:
        raise ValueError("empty rate")
    p0 = _least_p(chain, rate.log_a[0], len(chain.entries))
    if p0 is None or p0 >= len(chain.entries):
        raise ChainTooShort("no chain radius reaches log a_0")
    targets = [p0]
    plan = Plan(targets, [], "M2" if mode == "MC" else "power1+eps", mode, eps)
    choices = choices or {}
    for n in range(L - 1):
        m = targets[-1]
        nxt, fired, p, bumped = plan_step(chain, m, rate.log_a[n + 1], bool(choices.get(n)))
        if nxt >= len(chain.entries) and not choices.get(n):
            raise ChainTooShort(f"plan needs chain index {nxt}")
        targets.append(nxt)
        if fired:
            plan.n_j_out.append(n + 1)
            plan.firings.append({"n": n, "m": m, "p": p, "chosen": nxt, "bumped": bumped})
    for n, m in enumerate(targets):
        plan.lower_ok.append(bool(_chain_t(chain, m) >= rate.log_a[n]))
    for fr in plan.firings:
        p, n1 = fr["p"], fr["n"] + 1
        if fr["chosen"] != p or fr["bumped"]:
            continue
        la = rate.log_a[n1]
        prev_ok = p == 0 or _chain_t(chain, p - 1) < la
        plan.least_ok.append(bool(prev_ok and la <= _chain_t(chain, p)))
    # upper bounds at rule-1 indices
    fallback = False
    for fr in plan.firings:
        n1, idx = fr["n"] + 1, fr["chosen"]
        if idx >= len(chain.entries):
            continue
        outer = chain.entries[idx].t_outer
        la = rate.log_a[n1]
        if plan.bound_kind == "power1+eps" and not fallback:
            if not outer <= (1 + eps) * la:
                fallback = True
        if mu_fn is not None:
            try:
                m2 = mu_fn(mu_fn(la))
            except RangeExceeded:
                m2 = ExtLogReal.saturated_above()
            plan.upper_ok.append(bool(outer <= m2))
    if fallback:
        plan.bound_kind = "M2"
        plan.note = "power bound not met on this fixed chain; reporting the M^2 bound"
    return plan


def plan_upper_bound(plan: Plan, log_a, mu_fn: Callable):
    """Log-scale upper bound at a rule-1 index."""
    la = ext(log_a)
    if plan.bound_kind == "power1+eps":
        return (1 + plan.eps) * la
    try:
        return mu_fn(mu_fn(la))
    except RangeExceeded:
        return ExtLogReal.saturated_above()


# ---------------------------------------------------------------------------
# branching


def slowness_check(rate: RateSpec, levels: Sequence, max_ell: Optional[int] = None) -> dict:
    """For each ell, whether some n has log a_(n+ell) < levels[n] within the prefix."""
    a = rate.log_a
    top = len(a) - 1 if max_ell is None else max_ell
    out = {}
    for ell in range(1, top + 1):
        out[ell] = any(a[n + ell] < ext(levels[n]) for n in range(min(len(levels), len(a) - ell)))
    return out


def branching_witness(source, depth: int, chain=None, mode: str = "noMC", levels: Optional[Sequence] = None,
                      length: Optional[int] = None) -> List[List[int]]:
    """2^depth distinct admissible prefixes from binary choices.

    ``source`` is a RateSpec (with ``chain``): at each rule-1 step with p <= m
    choose the least p or m + 1.  Or a TransitionSystem: at each backjump
    opportunity choose +1 or the lowest allowed jump target.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if isinstance(source, TransitionSystem):
        return _branch_ts(source, depth, length)
    if chain is None:
        raise ValueError("a rate needs a chain")
    rate = source
    L = len(rate) if length is None else min(length, len(rate))
    check = slowness_check(rate, levels) if levels is not None else None
    out = []

    def grow(targets, used):
        n = len(targets) - 1
        if used == depth:
            out.append(list(targets))
            return
        if n >= L - 1:
            raise InsufficientBranching(f"only {used} branch points within {L} steps", slowness_check=check)
        m = targets[-1]
        if m >= len(chain.entries):
            raise InsufficientBranching("branch left the chain before depth was reached", slowness_check=check)
        nxt, fired, p, _ = plan_step(chain, m, rate.log_a[n + 1])
        if fired and p <= m:
            grow(targets + [nxt], used + 1)
            grow(targets + [m + 1], used + 1)
        else:
            grow(targets + [nxt], used)

    p0 = _least_p(chain, rate.log_a[0], len(chain.entries))
    if p0 is None:
        raise ChainTooShort("no chain radius reaches log a_0")
    grow([p0], 0)
    # pad to a common length with the default rule, as far as the chain reaches
    width = max(len(t) for t in out)
    res = []
    for t in out:
        t = list(t)
        while len(t) < width:
            m = t[-1]
            if m >= len(chain.entries):
                break
            t.append(plan_step(chain, m, rate.log_a[len(t)])[0])
        res.append(t)
    return res


def _branch_ts(ts: TransitionSystem, depth: int, length: Optional[int]) -> List[List[int]]:
    L = _length(ts, length)
    out = []

    def grow(seq, used):
        n = len(seq) - 1
        if used == depth:
            out.append(list(seq))
            return
        if n >= L - 1:
            raise InsufficientBranching(f"only {used} branch points within {L} steps")
        s = seq[-1]
        succ = ts.successors(n, s)
        jumps = [x for x in succ if x != s + 1]
        if jumps:
            grow(seq + [jumps[0]], used + 1)
            grow(seq + [s + 1], used + 1)
        else:
            grow(seq + [s + 1], used)

    grow([0], 0)
    width = max(len(t) for t in out)
    return [t + [t[-1] + 1 + i for i in range(width - len(t))] for t in out]
