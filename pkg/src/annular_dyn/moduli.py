"""Maximum and minimum modulus on circles, the map mu(t) = log M(e^t),
the slack quantities delta, lambda, eps, and growth diagnostics."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, RangeExceeded
from .functions import NP_LOG_LIMIT, EntireFunction
from .numbers import LOG2E, ExtLogReal, ctx, ext, mpf

DEFAULT_TOL = 1e-12
BASE_SAMPLES = 1024
MAX_NP_SAMPLES = 1 << 18
# above this t the sampler stops raising precision with the radius
MP_RAISE_LIMIT = 4000
# number of local extrema refined per circle
N_BRACKETS = 8

INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class RadialModuli:
    t: ExtLogReal
    logM: ExtLogReal
    logm: ExtLogReal
    tol: float
    n_samples: int
    zero_on_circle: bool = False
    theta_max: Optional[float] = None
    theta_min: Optional[float] = None


# ---------------------------------------------------------------------------
# circle sampling


def _zero_gap():
    # a refined minimum this far below the surrounding grid is a zero
    return (ctx.prec / 4) * math.log(2)


def _is_zero(v, grid_vals) -> bool:
    if v == -ctx.inf:
        return True
    if v > -_zero_gap():
        return False
    around = [float(x) for x in grid_vals if x is not None and x != -math.inf]
    if not around:
        return True
    return float(v) < min(around) - _zero_gap()


def _np_ok(f: EntireFunction, t) -> bool:
    return f.log_abs_np is not None and t <= NP_LOG_LIMIT


def _n_for(t, base: int) -> int:
    """Grid size: at least ``base``, more for large radii (oscillating |f|)."""
    if t > NP_LOG_LIMIT:
        return base
    r = math.exp(float(t))
    want = 1 << max(0, math.ceil(math.log2(max(1.0, 8 * r))))
    return int(max(base, min(MAX_NP_SAMPLES, want)))


def _logabs_mp(f: EntireFunction, t, theta):
    """High-precision log|f(e^{t + i theta})|; None when unresolved."""
    t = mpf(t)
    extra = int(float(t) * LOG2E) if 0 < t < MP_RAISE_LIMIT else 0
    with ctx.workprec(ctx.prec + max(0, extra) + 40):
        th = ctx.mpf(theta)
        try:
            if f.log_eval is not None:
                lm, _ = f.log_eval(t, th)
            else:
                w = f.eval(ctx.exp(ctx.mpc(t, th)))
                lm = ctx.log(abs(w)) if w != 0 else -ctx.inf
        except (RangeExceeded, OverflowError, ValueError):
            return None
        return +lm


def _grid_values(f: EntireFunction, t, n: int):
    """log|f| on the uniform grid; returns (thetas, values as float or mpf list)."""
    thetas = np.arange(n) * (2 * math.pi / n)
    if _np_ok(f, t):
        z = math.exp(float(t)) * np.exp(1j * thetas)
        with np.errstate(all="ignore"):
            v = np.asarray(f.log_abs_np(z), dtype=float)
        if np.all(np.isfinite(v) | (v == -np.inf)):
            return thetas, v
    vals = [_logabs_mp(f, t, th) for th in thetas]
    return thetas, vals


def _local_extrema(vals, sign: int, k: int):
    if isinstance(vals, np.ndarray):
        s = sign * vals
        with np.errstate(invalid="ignore"):
            peak = (s >= np.roll(s, 1)) & (s >= np.roll(s, -1))
        idx = np.flatnonzero(peak)
        # stable sort keeps ties in index order
        order = np.argsort(-s[idx], kind="stable")
        return [int(i) for i in idx[order][:k]]
    n = len(vals)
    idx = []
    for i in range(n):
        a, b, c = vals[i - 1], vals[i], vals[(i + 1) % n]
        if b is None:
            continue
        a = b if a is None else a
        c = b if c is None else c
        if sign * b >= sign * a and sign * b >= sign * c:
            idx.append(i)
    idx.sort(key=lambda i: (-sign * vals[i], i))
    return idx[:k]


def _golden(fn, lo, hi, sign: int, tol_theta):
    """Maximise sign*fn on [lo, hi] by golden-section search (mpf)."""
    a, b = ctx.mpf(lo), ctx.mpf(hi)
    c = b - (b - a) * INV_PHI
    d = a + (b - a) * INV_PHI
    fc, fd = fn(c), fn(d)
    for _ in range(200):
        if b - a < tol_theta:
            break
        if fc is None or fd is None:
            break
        if sign * fc >= sign * fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * INV_PHI
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * INV_PHI
            fd = fn(d)
    cands = [(x, y) for x, y in ((c, fc), (d, fd)) if y is not None]
    if not cands:
        return None, None
    return max(cands, key=lambda p: sign * p[1])


def _extremum(f: EntireFunction, t, tol: float, sign: int, n_base: int):
    n = _n_for(t, n_base)
    thetas, vals = _grid_values(f, t, n)
    vlist = vals if isinstance(vals, np.ndarray) else list(vals)
    if not isinstance(vals, np.ndarray) and all(v is None for v in vlist):
        raise RangeExceeded(f"{f.id}: no evaluable point on the circle at t={t}")
    h = 2 * math.pi / n
    best_th, best_v, best_zero = None, None, False
    for i in _local_extrema(vlist, sign, N_BRACKETS):
        vi = vlist[i]
        nbrs = (vlist[i - 2], vlist[i - 1], vlist[(i + 1) % n], vlist[(i + 2) % n])
        if sign < 0 and vi is not None and _is_zero(vi, nbrs):
            # grid already sits on (numerically) a zero
            v_mp = _logabs_mp(f, t, thetas[i])
            cand_th, cand_v = thetas[i], v_mp if v_mp is not None else vi
        else:
            nb = [x for x in (vlist[i - 1], vlist[(i + 1) % n]) if x is not None]
            slope = max([abs(float(vi) - float(x)) for x in nb] or [1.0]) / h
            scale = max(1.0, abs(float(vi)))
            tol_theta = min(h, max(1e-30, tol * scale / (slope + 1.0)))
            cand_th, cand_v = _golden(lambda th: _logabs_mp(f, t, th), thetas[i] - h, thetas[i] + h, sign, tol_theta)
            if cand_v is None:
                continue
            # the grid value may beat the refined one (flat or float noise)
            grid_mp = _logabs_mp(f, t, thetas[i])
            if grid_mp is not None and sign * grid_mp > sign * cand_v:
                cand_th, cand_v = thetas[i], grid_mp
        if best_v is None or sign * cand_v > sign * best_v:
            best_th, best_v = cand_th, cand_v
            best_zero = sign < 0 and _is_zero(cand_v, nbrs)
    if best_v is None:
        raise RangeExceeded(f"{f.id}: refinement failed at t={t}")
    return best_th, best_v, n, best_zero


def circle_moduli(f: EntireFunction, t, tol: float = DEFAULT_TOL, n_samples: int = BASE_SAMPLES,
                  use_override: bool = True) -> RadialModuli:
    te = ext(t)
    if te.saturated:
        raise RangeExceeded("t is saturated")
    tv = te.value
    n_used = 0
    th_max = th_min = None
    if use_override and f.exact_log_max_modulus is not None:
        logM = ext(f.exact_log_max_modulus(te))
    else:
        th_max, vM, n_used, _ = _extremum(f, tv, tol, +1, n_samples)
        logM = ext(vM)
    zero = False
    if use_override and f.exact_log_min_modulus is not None:
        logm = ext(f.exact_log_min_modulus(te))
    else:
        th_min, vm, n2, zero = _extremum(f, tv, tol, -1, n_samples)
        n_used = max(n_used, n2)
        if zero:
            logm = ExtLogReal.saturated_below()
        else:
            logm = ext(vm)
    return RadialModuli(
        t=te, logM=logM, logm=logm, tol=tol, n_samples=n_used, zero_on_circle=zero,
        theta_max=None if th_max is None else float(th_max),
        theta_min=None if th_min is None else float(th_min),
    )


def log_max_modulus(f: EntireFunction, t, tol: float = DEFAULT_TOL, use_override: bool = True,
                    n_samples: int = BASE_SAMPLES) -> ExtLogReal:
    te = ext(t)
    if te.saturated:
        raise RangeExceeded("t is saturated")
    if use_override and f.exact_log_max_modulus is not None:
        return ext(f.exact_log_max_modulus(te))
    _, v, _, _ = _extremum(f, te.value, tol, +1, n_samples)
    return ext(v)


def log_min_modulus(f: EntireFunction, t, tol: float = DEFAULT_TOL, use_override: bool = True,
                    n_samples: int = BASE_SAMPLES) -> ExtLogReal:
    """log m(e^t); a zero on the circle gives the saturated-below value."""
    te = ext(t)
    if te.saturated:
        raise RangeExceeded("t is saturated")
    if use_override and f.exact_log_min_modulus is not None:
        return ext(f.exact_log_min_modulus(te))
    _, v, _, zero = _extremum(f, te.value, tol, -1, n_samples)
    if zero:
        return ExtLogReal.saturated_below()
    return ext(v)


# ---------------------------------------------------------------------------
# mu and its memo table

_memo: dict = {}
_memo_lock = threading.Lock()


def clear_memo() -> None:
    with _memo_lock:
        _memo.clear()


def mu(f: EntireFunction, t, tol: float = DEFAULT_TOL, use_override: bool = True) -> ExtLogReal:
    """mu(t) = log M(e^t).  Saturated input gives saturated output."""
    te = ext(t)
    if te.saturated:
        return ExtLogReal(te.value, True)
    key = (f.key, ctx.prec, str(te.value), tol, use_override and f.exact_log_max_modulus is not None)
    hit = _memo.get(key)
    if hit is not None:
        return hit
    val = log_max_modulus(f, te, tol, use_override)
    with _memo_lock:
        _memo.setdefault(key, val)
    return _memo[key]


def mu_iter(f: EntireFunction, t, n: int, tol: float = DEFAULT_TOL) -> ExtLogReal:
    x = ext(t)
    for _ in range(n):
        x = mu(f, x, tol)
    return x


# ---------------------------------------------------------------------------
# slack quantities


def delta(t) -> object:
    """1/sqrt(t) for t = log r > 1."""
    te = ext(t)
    if te.saturated:
        return ctx.mpf(0)
    if te.value <= 1:
        raise DomainError(f"delta needs t > 1, got {te.to_str()}")
    return 1 / ctx.sqrt(te.value)


@dataclass(frozen=True)
class LambdaEps:
    log_lambda: ExtLogReal
    eps: float


def log_lambda_from_gap(gap):
    """log((e^gap - 1)/2) computed without overflow."""
    g = mpf(gap)
    if g <= 0:
        raise DomainError("M(2r) <= M(r): lambda undefined")
    if g > 40:
        return g + ctx.log1p(-ctx.exp(-g)) - ctx.ln2
    return ctx.log(ctx.expm1(g) / 2)


def eps_from_log_lambda(log_lam, C0, C1) -> float:
    if C0 <= 1 or C1 <= 1:
        raise DomainError("C0 and C1 must exceed 1")
    ll = ext(log_lam)
    if ll.saturated:
        return 0.0 if ll.value > 0 else math.inf
    e = 2 * ctx.mpf(C1) * ctx.exp(-(ctx.log(C1) + ll.value) / ctx.mpf(C0))
    return float(max(e, 0))


def lambda_eps(f: EntireFunction, t, C0: float = 20.0, C1: float = 50.0, tol: float = DEFAULT_TOL) -> LambdaEps:
    te = ext(t)
    if te.saturated:
        raise RangeExceeded("t is saturated")
    gap = mu(f, te + ctx.ln2, tol) - mu(f, te, tol)
    if gap.saturated:
        raise RangeExceeded("M(2r)/M(r) beyond range")
    ll = ext(log_lambda_from_gap(gap.value))
    return LambdaEps(log_lambda=ll, eps=eps_from_log_lambda(ll, C0, C1))


# ---------------------------------------------------------------------------
# growth diagnostics


@dataclass
class HadamardReport:
    violations: list = field(default_factory=list)   # (t, k, violation or None)
    growth: list = field(default_factory=list)       # (t, mu(t+log 2) - mu(t) or None)
    second_differences: list = field(default_factory=list)
    empirical_R1: Optional[float] = None
    range_exceeded: list = field(default_factory=list)

    def max_violation_above_R1(self) -> float:
        if self.empirical_R1 is None:
            return math.inf
        vs = [v for t, k, v in self.violations if v is not None and t >= self.empirical_R1]
        return max(vs, default=0.0)


def hadamard_check(f: EntireFunction, t_grid, k_grid, tol: float = 1e-9) -> HadamardReport:
    if not t_grid or not k_grid:
        raise DomainError("grids must be nonempty")
    if any(k <= 1 for k in k_grid):
        raise DomainError("k must exceed 1")
    ts = sorted(float(t) for t in t_grid)
    rep = HadamardReport()
    mus = {}
    for t in ts:
        try:
            mus[t] = mu(f, t)
        except RangeExceeded:
            rep.range_exceeded.append(("mu", t))
    bad_t = []
    for t in ts:
        for k in k_grid:
            try:
                v = k * mus[t] - mu(f, k * t)
                viol = max(0.0, float(v.value)) if not v.saturated else (math.inf if v.value > 0 else 0.0)
                scale = max(1.0, abs(float(k * mus[t])))
                rep.violations.append((t, k, viol))
                if viol > tol * scale:
                    bad_t.append(t)
            except (RangeExceeded, KeyError):
                rep.violations.append((t, k, None))
                rep.range_exceeded.append(("violation", t, k))
        try:
            g = mu(f, t + math.log(2)) - mus[t]
            rep.growth.append((t, float(g)))
        except (RangeExceeded, KeyError):
            rep.growth.append((t, None))
    for a, b, c in zip(ts, ts[1:], ts[2:]):
        if a in mus and b in mus and c in mus:
            # second divided difference (convexity of mu)
            d1 = (mus[b] - mus[a]) / (b - a)
            d2 = (mus[c] - mus[b]) / (c - b)
            rep.second_differences.append((b, float(d2 - d1)))
    if bad_t:
        later = [t for t in ts if t > max(bad_t)]
        rep.empirical_R1 = later[0] if later else None
    else:
        rep.empirical_R1 = ts[0]
    return rep
