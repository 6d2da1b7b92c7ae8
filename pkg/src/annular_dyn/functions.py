"""Entire functions, their evaluation paths and the builtin catalog.

Every function carries three evaluation routes:

* ``eval``/``deriv`` on mpmath complex numbers (plain form),
* ``log_eval`` taking a log-polar input ``(log|z|, arg z)`` and returning
  ``(log|f(z)|, arg f(z))`` where the argument is ``None`` when it cannot be
  resolved at the working precision,
* ``log_abs_np``/``eval_np``: vectorised float64 versions used by the circle
  samplers while the radius is float-representable.

Inverse branches (``branches``) are optional; when present they return exact
preimages inside a prescribed log-annulus and drive the covering decisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import RangeExceeded
from .numbers import ComplexPoint, ExtLogReal, _mag, as_point, ctx, exp_guard, exp_wide, exp_would_saturate, ext, mpf, plain_log_limit, wrap_arg

MC_VALUES = ("has-MC", "no-MC", "unknown")

# guard bits: a plain evaluation needs |z| < 2**(prec - GUARD_BITS)
GUARD_BITS = 32
# float64 samplers are trusted while log|z| stays below this
NP_LOG_LIMIT = 700.0


@dataclass(frozen=True)
class EntireFunction:
    id: str
    mc_declared: str
    eval: Callable = field(compare=False, repr=False)
    deriv: Callable = field(compare=False, repr=False)
    log_eval: Optional[Callable] = field(default=None, compare=False, repr=False)
    exact_log_max_modulus: Optional[Callable] = field(default=None, compare=False, repr=False)
    exact_log_min_modulus: Optional[Callable] = field(default=None, compare=False, repr=False)
    eval_np: Optional[Callable] = field(default=None, compare=False, repr=False)
    deriv_np: Optional[Callable] = field(default=None, compare=False, repr=False)
    log_abs_np: Optional[Callable] = field(default=None, compare=False, repr=False)
    branches: Optional[Callable] = field(default=None, compare=False, repr=False)
    # log-slack lower bound: > 0 proves every w of that modulus has a preimage
    preimage_slack: Optional[Callable] = field(default=None, compare=False, repr=False)
    real_on_axis: bool = False
    params: tuple = ()

    def __post_init__(self):
        if self.mc_declared not in MC_VALUES:
            raise ValueError(f"mc_declared must be one of {MC_VALUES}")

    @property
    def key(self) -> str:
        if not self.params:
            return self.id
        return self.id + "(" + ",".join(f"{k}={v}" for k, v in self.params) + ")"

    def without_overrides(self) -> "EntireFunction":
        from dataclasses import replace

        return replace(self, exact_log_max_modulus=None, exact_log_min_modulus=None)


# ---------------------------------------------------------------------------
# evaluation entry points


def _plain_ok(f: EntireFunction, z) -> bool:
    if z == 0:
        return True
    if f.real_on_axis and ctx.im(z) == 0:
        return _mag(ctx.re(z)) < _mag(plain_log_limit())
    return _mag(abs(z)) < ctx.prec - GUARD_BITS


def _wrap_result(w) -> ComplexPoint:
    a = abs(w)
    if a == 0:
        return ComplexPoint(z=w)
    lm = ctx.log(a)
    if abs(lm) < plain_log_limit():
        return ComplexPoint(z=w)
    return ComplexPoint(logmod=lm, arg=wrap_arg(ctx.arg(w)))


def _from_log(lm, arg) -> ComplexPoint:
    if ctx.isinf(lm) or ctx.isnan(lm):
        raise RangeExceeded("log-modulus left the representable range")
    if arg is not None and abs(lm) < plain_log_limit():
        return ComplexPoint.from_polar(lm, arg)
    return ComplexPoint(logmod=lm, arg=None if arg is None else wrap_arg(arg))


def evaluate(f: EntireFunction, z) -> ComplexPoint:
    """Return f(z), switching to the log-polar route for large |z|."""
    p = as_point(z)
    if p.is_plain and _plain_ok(f, p.z):
        try:
            w = f.eval(p.z)
        except (OverflowError, ValueError) as exc:
            raise RangeExceeded(str(exc)) from exc
        return _wrap_result(w)
    if f.log_eval is None:
        raise RangeExceeded(f"{f.id}: input beyond plain range and no log_eval")
    th = p.argument()
    if th is None:
        raise RangeExceeded("argument of the input is unresolved")
    lm, arg = f.log_eval(p.log_abs(), th)
    return _from_log(lm, arg)


def derivative(f: EntireFunction, z) -> ComplexPoint:
    p = as_point(z)
    if not (p.is_plain and _plain_ok(f, p.z)):
        raise RangeExceeded("derivative requested beyond plain range")
    return _wrap_result(f.deriv(p.z))


# ---------------------------------------------------------------------------
# helpers shared by the builtins


def _resolvable(L) -> bool:
    """Can e^L * (something of size 1) be reduced mod 2pi at working precision?"""
    return L < (ctx.prec - GUARD_BITS) * ctx.ln2


def _xy(L, theta):
    if exp_would_saturate(L):
        raise RangeExceeded("log-modulus of the image leaves the exponent range")
    with ctx.extraprec(exp_guard(L)):
        R = exp_wide(L)
        return +(R * ctx.cos(theta)), +(R * ctx.sin(theta))


def _radius(t):
    """e^t as mpf, +inf when it would leave the exponent range."""
    t = mpf(t)
    if exp_would_saturate(t):
        return ctx.inf
    with ctx.extraprec(exp_guard(t)):
        return +exp_wide(t)


# exact lattice arithmetic is skipped above this many bits of radius
MAX_LATTICE_BITS = 1 << 17


def _log_abs_real(x):
    return ctx.log(abs(x)) if x != 0 else -ctx.inf


def _log_ymax(lu, t_out):
    """log sqrt(e^(2 t_out) - u^2) given lu = log|u| < t_out."""
    g = 2 * (mpf(t_out) - lu)
    if lu == -ctx.inf:
        return mpf(t_out)
    return lu + ctx.log(ctx.expm1(g)) / 2


def lattice_offsets(fixed, phase, t_in, t_out, limit: int = 4):
    """Values v = phase + 2*pi*k with log|fixed + i v| in (t_in, t_out).

    Returns up to ``limit`` values ordered by |v| (the smallest-|k| branch
    first).  All arithmetic is done at a precision that keeps ``phase``.
    """
    fixed = mpf(fixed)
    phase = mpf(phase)
    t_in, t_out = mpf(t_in), mpf(t_out)
    lu = _log_abs_real(fixed)
    if lu >= t_out:
        return []
    if lu > t_in and t_out > 60:
        # |fixed| alone clears the inner circle: small |v| only, no big radii needed
        lym = _log_ymax(lu, t_out)
        two_pi = 2 * ctx.pi
        k0 = ctx.nint(-phase / two_pi)
        cands = [phase + two_pi * (k0 + d) for d in range(-limit, limit + 1)]
        out = [v for v in cands if v == 0 or ctx.log(abs(v)) < lym]
        out.sort(key=lambda v: abs(v))
        return out[:limit]
    Rin, Rout = _radius(t_in), _radius(t_out)
    top = _mag(Rout) if Rout != ctx.inf else _mag(Rin)
    if top > MAX_LATTICE_BITS:
        raise RangeExceeded("branch offset needs more precision than allowed")
    bits = max(top, _mag(fixed), 0) + ctx.prec + 20
    out = []
    with ctx.workprec(bits):
        two_pi = 2 * ctx.pi
        if Rout == ctx.inf:
            ymax = ctx.inf
        else:
            ymax = ctx.sqrt(Rout * Rout - fixed * fixed)
        lo2 = Rin * Rin - fixed * fixed
        ylo = ctx.sqrt(lo2) if lo2 > 0 else ctx.mpf(0)

        def ok(v):
            if lo2 <= 0:
                return abs(v) < ymax
            return ylo < abs(v) < ymax

        if ylo == 0:
            k0 = ctx.nint(-phase / two_pi)
            cands = [phase + two_pi * (k0 + d) for d in range(-limit, limit + 1)]
        else:
            kp = ctx.ceil((ylo - phase) / two_pi)
            kn = ctx.floor((-ylo - phase) / two_pi)
            cands = [phase + two_pi * (kp + d) for d in range(limit)]
            cands += [phase + two_pi * (kn - d) for d in range(limit)]
        for v in cands:
            if ok(v):
                out.append(+v)
    out.sort(key=lambda v: abs(v))
    return out[:limit]


def lattice_room(fixed, t_in, t_out):
    """Lower bound for log(length of the admissible |v| range / 2pi).

    Positive means every phase has an offset v = phase + 2 pi k with
    log|fixed + i v| in (t_in, t_out).  -inf when the range is empty.
    """
    fixed = mpf(fixed)
    t_in, t_out = mpf(t_in), mpf(t_out)
    lu = _log_abs_real(fixed)
    if lu >= t_out:
        return -ctx.inf
    period = ctx.log(2 * ctx.pi)
    if lu > t_in:
        # single interval (-ymax, ymax)
        return ctx.ln2 + _log_ymax(lu, t_out) - period
    # ylo <= e^t_in and ymax >= sqrt(e^(2 t_out) - e^(2 t_in))
    s = ctx.sqrt(ctx.expm1(2 * (t_out - t_in)))
    bound = t_in + ctx.log(s - 1) - period if s > 1 else -ctx.inf
    if bound > 0 or t_out > 2000:
        return bound
    Rin, Rout = _radius(t_in), _radius(t_out)
    bits = max(_mag(Rout), _mag(fixed), 0) + ctx.prec + 20
    with ctx.workprec(bits):
        ymax = ctx.sqrt(Rout * Rout - fixed * fixed)
        lo2 = Rin * Rin - fixed * fixed
        ylo = ctx.sqrt(lo2) if lo2 > 0 else ctx.mpf(0)
        width = ymax - ylo if lo2 > 0 else 2 * ymax
        if width <= 0:
            return -ctx.inf
        return +(ctx.log(width) - period)


def lattice_has_room(fixed, t_in, t_out) -> bool:
    """True when the admissible |v| range is longer than one period."""
    return lattice_room(fixed, t_in, t_out) > ctx.log(1.001)


def _mpc_at(x, y):
    return ctx.mpc(x, y)


def _point_log_arg(w: ComplexPoint):
    return w.log_abs(), w.argument()


# ---------------------------------------------------------------------------
# exp


def _exp_log_eval(L, theta):
    x, y = _xy(L, theta)
    if y == 0:
        return x, ctx.mpf(0)
    if _resolvable(L):
        return x, wrap_arg(y)
    return x, None


def _exp_branches(w: ComplexPoint, t_in, t_out, limit=4):
    u, phi = _point_log_arg(w)
    if phi is None:
        return []
    return [ComplexPoint(z=ctx.mpc(u, v)) if _mag(v) < _mag(plain_log_limit()) else _big_point(u, v)
            for v in lattice_offsets(u, phi, t_in, t_out, limit)]


def _exp_slack(w: ComplexPoint, t_in, t_out):
    return lattice_room(w.log_abs(), t_in, t_out)


def _big_point(x, y) -> ComplexPoint:
    with ctx.workprec(ctx.prec + 20):
        lm = ctx.log(ctx.hypot(x, y))
        a = ctx.atan2(y, x)
    return ComplexPoint(logmod=lm, arg=wrap_arg(a))


def _np_exp_logabs(z):
    return np.real(z)


def make_exp() -> EntireFunction:
    return EntireFunction(
        id="exp",
        mc_declared="no-MC",
        eval=ctx.exp,
        deriv=ctx.exp,
        log_eval=_exp_log_eval,
        exact_log_max_modulus=lambda t: ext(t).exp(),
        exact_log_min_modulus=lambda t: -ext(t).exp(),
        eval_np=np.exp,
        deriv_np=np.exp,
        log_abs_np=_np_exp_logabs,
        branches=_exp_branches,
        preimage_slack=_exp_slack,
        real_on_axis=True,
    )


# ---------------------------------------------------------------------------
# a exp(z) + b


def make_affine_exp(a=1.0, b=0.0) -> EntireFunction:
    a_c, b_c = complex(a), complex(b)
    if a_c == 0:
        raise ValueError("a must be non-zero")
    A, B = ctx.mpc(a_c), ctx.mpc(b_c)

    def ev(z):
        return A * ctx.exp(z) + B

    def dv(z):
        return A * ctx.exp(z)

    def log_eval(L, theta):
        x, y = _xy(L, theta)
        log_a = ctx.log(abs(A))
        log_b = ctx.log(abs(B)) if B != 0 else -ctx.inf
        negligible = (ctx.prec + 10) * ctx.ln2
        if x + log_a - log_b > negligible:
            arg = wrap_arg(y + ctx.arg(A)) if (_resolvable(L) or y == 0) else None
            return x + log_a, arg
        if log_b - x - log_a > negligible:
            return log_b, wrap_arg(ctx.arg(B))
        if _resolvable(L) or y == 0:
            w = A * ctx.exp(ctx.mpc(x, y)) + B
            return ctx.log(abs(w)), wrap_arg(ctx.arg(w))
        raise RangeExceeded("a*exp(z)+b: argument of z unresolved where both terms matter")

    def log_abs_np(z):
        x = np.real(z)
        y = np.imag(z)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            pos = x + np.log(np.abs(a_c + b_c * np.exp(-x) * np.exp(-1j * y)))
            neg = np.log(np.abs(a_c * np.exp(x) * np.exp(1j * y) + b_c))
        return np.where(x > 0, pos, neg)

    def branches(w: ComplexPoint, t_in, t_out, limit=4):
        if w.is_plain and abs(w.z - B) > 0 and ctx.log(abs(w.z)) < 60:
            q = (w.z - B) / A
            u, phi = ctx.log(abs(q)), ctx.arg(q)
        else:
            lw, aw = _point_log_arg(w)
            if aw is None:
                return []
            u, phi = lw - ctx.log(abs(A)), aw - ctx.arg(A)
        return [ComplexPoint(z=ctx.mpc(u, v)) if _mag(v) < _mag(plain_log_limit()) else _big_point(u, v)
                for v in lattice_offsets(u, phi, t_in, t_out, limit)]

    def eval_np(z):
        return a_c * np.exp(z) + b_c

    return EntireFunction(
        id="aexp_b",
        mc_declared="no-MC",
        eval=ev,
        deriv=dv,
        log_eval=log_eval,
        eval_np=eval_np,
        deriv_np=lambda z: a_c * np.exp(z),
        log_abs_np=log_abs_np,
        branches=branches,
        real_on_axis=(a_c.imag == 0 and b_c.imag == 0),
        params=(("a", _fmt_c(a_c)), ("b", _fmt_c(b_c))),
    )


def _fmt_c(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return repr(c)


# ---------------------------------------------------------------------------
# sin and cosh share the "one dominant exponential" structure


def _np_sin_logabs(z):
    x = np.real(z)
    A = np.abs(np.imag(z))
    e = np.exp(-2 * A)
    with np.errstate(divide="ignore"):
        return A + 0.5 * np.log(np.sin(x) ** 2 * e + ((1 - e) / 2) ** 2)


def _np_cosh_logabs(z):
    A = np.abs(np.real(z))
    y = np.imag(z)
    e = np.exp(-2 * A)
    with np.errstate(divide="ignore"):
        return A + 0.5 * np.log(np.cos(y) ** 2 * e + ((1 - e) / 2) ** 2)


def _dominant_log_eval(L, theta, *, fn, growth_part, phase_part, osc):
    """log|f| for f of sin/cosh type on a log-polar input."""
    x, y = _xy(L, theta)
    if _resolvable(L):
        with ctx.extraprec(exp_guard(L)):
            w = fn(ctx.mpc(x, y))
            if w == 0:
                return -ctx.inf, ctx.mpf(0)
            return +ctx.log(abs(w)), wrap_arg(ctx.arg(w))
    A = abs(growth_part(x, y))
    if 2 * A > (ctx.prec + 10) * ctx.ln2:
        return A - ctx.ln2, None
    raise RangeExceeded(f"{osc}: oscillating factor unresolved at this radius")


def make_sin() -> EntireFunction:
    def log_eval(L, theta):
        return _dominant_log_eval(L, theta, fn=ctx.sin, growth_part=lambda x, y: y,
                                  phase_part=lambda x, y: x, osc="sin")

    def branches(w: ComplexPoint, t_in, t_out, limit=4):
        base = _asin_base(w)
        if base is None:
            return []
        x0, y0 = base
        out = []
        for xs, ys in ((x0, y0), (ctx.pi - x0, -y0)):
            for v in lattice_offsets(ys, xs, t_in, t_out, limit):
                out.append(ComplexPoint(z=ctx.mpc(v, ys)) if _mag(v) < _mag(plain_log_limit()) else _big_point(v, ys))
        out.sort(key=lambda p: abs(p.log_abs()))
        return out[:limit]

    return EntireFunction(
        id="sin",
        mc_declared="no-MC",
        eval=ctx.sin,
        deriv=ctx.cos,
        log_eval=log_eval,
        eval_np=np.sin,
        deriv_np=np.cos,
        log_abs_np=_np_sin_logabs,
        branches=branches,
        real_on_axis=True,
    )


def _asin_base(w: ComplexPoint):
    if w.is_plain and ctx.log(abs(w.z) + 1) < 60:
        s = ctx.asin(w.z)
        return ctx.re(s), ctx.im(s)
    u, phi = _point_log_arg(w)
    if phi is None:
        return None
    # asin(w) = -i log(i w + sqrt(1 - w^2)) ~ -i (log 2 + log w + i pi/2) for large |w|
    return phi + ctx.pi / 2, -(u + ctx.ln2)


def make_cosh() -> EntireFunction:
    def log_eval(L, theta):
        return _dominant_log_eval(L, theta, fn=ctx.cosh, growth_part=lambda x, y: x,
                                  phase_part=lambda x, y: y, osc="cosh")

    def branches(w: ComplexPoint, t_in, t_out, limit=4):
        if w.is_plain and ctx.log(abs(w.z) + 1) < 60:
            s = ctx.acosh(w.z)
            x0, y0 = ctx.re(s), ctx.im(s)
        else:
            u, phi = _point_log_arg(w)
            if phi is None:
                return []
            x0, y0 = u + ctx.ln2, phi
        out = []
        for xs, ys in ((x0, y0), (-x0, -y0)):
            for v in lattice_offsets(xs, ys, t_in, t_out, limit):
                out.append(ComplexPoint(z=ctx.mpc(xs, v)) if _mag(v) < _mag(plain_log_limit()) else _big_point(xs, v))
        out.sort(key=lambda p: abs(p.log_abs()))
        return out[:limit]

    return EntireFunction(
        id="cosh",
        mc_declared="no-MC",
        eval=ctx.cosh,
        deriv=ctx.sinh,
        log_eval=log_eval,
        eval_np=np.cosh,
        deriv_np=np.sinh,
        log_abs_np=_np_cosh_logabs,
        branches=branches,
        real_on_axis=True,
    )


# ---------------------------------------------------------------------------
# z exp(z)


def _zexp_log_eval(L, theta):
    x, y = _xy(L, theta)
    lm = L + x
    if y == 0:
        return lm, (ctx.mpf(0) if ctx.cos(theta) > 0 else ctx.pi)
    if _resolvable(L):
        return lm, wrap_arg(theta + y)
    return lm, None


def _zexp_branches(w: ComplexPoint, t_in, t_out, limit=4):
    u, phi = _point_log_arg(w)
    if phi is None:
        return []
    out = []
    # W_k(w) ~ l_k - log l_k with l_k = log w + 2 pi i k, and |W_k| ~ |l_k|
    for v in lattice_offsets(u, phi, t_in - 1, t_out + 1, limit + 2):
        lk = ctx.mpc(u, v)
        z = lk - ctx.log(lk) if abs(lk) > 1 else lk
        target = lk
        for _ in range(60):
            g = z + ctx.log(z) - target
            step = g / (1 + 1 / z)
            z = z - step
            if abs(step) < ctx.mpf(2) ** (-ctx.prec + 8) * (1 + abs(z)):
                break
        lz = ctx.log(abs(z))
        if t_in < lz < t_out:
            out.append(ComplexPoint(z=z))
    out.sort(key=lambda p: abs(p.z))
    return out[:limit]


def make_zexp() -> EntireFunction:
    return EntireFunction(
        id="zexp",
        mc_declared="no-MC",
        eval=lambda z: z * ctx.exp(z),
        deriv=lambda z: (1 + z) * ctx.exp(z),
        log_eval=_zexp_log_eval,
        exact_log_max_modulus=lambda t: ext(t) + ext(t).exp(),
        exact_log_min_modulus=lambda t: ext(t) - ext(t).exp(),
        eval_np=lambda z: z * np.exp(z),
        deriv_np=lambda z: (1 + z) * np.exp(z),
        log_abs_np=lambda z: np.log(np.abs(z)) + np.real(z),
        branches=_zexp_branches,
        real_on_axis=True,
    )


# ---------------------------------------------------------------------------
# polynomials: truncated power series and the monomial test harness


def make_series(coeffs, name: str = "series") -> EntireFunction:
    """Truncated power series sum a_n z^n; ``coeffs[n]`` is a_n."""
    cs = [complex(c) for c in coeffs]
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    if not cs:
        cs = [0j]
    deg = len(cs) - 1
    mcs = [ctx.mpc(c) for c in cs]
    dcs = [n * c for n, c in enumerate(mcs)][1:] or [ctx.mpc(0)]

    def horner(cl, z):
        acc = ctx.mpc(0)
        for c in reversed(cl):
            acc = acc * z + c
        return acc

    def log_eval(L, theta):
        if deg == 0:
            c = mcs[0]
            return (ctx.log(abs(c)) if c != 0 else -ctx.inf), wrap_arg(ctx.arg(c))
        # q = sum_n a_n w^(deg-n), w = 1/z
        wz = ctx.exp(ctx.mpc(-L, -theta))
        q = ctx.mpc(0)
        for n in range(deg, -1, -1):
            q = q + mcs[n] * wz ** (deg - n)
        if q == 0:
            return -ctx.inf, ctx.mpf(0)
        return deg * L + ctx.log(abs(q)), wrap_arg(deg * theta + ctx.arg(q))

    np_c = np.array(cs[::-1], dtype=complex)
    np_d = np.array([n * c for n, c in enumerate(cs)][1:][::-1] or [0j], dtype=complex)

    def log_abs_np(z):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return np.log(np.abs(np.polyval(np_c, z)))

    real = all(c.imag == 0 for c in cs)
    return EntireFunction(
        id=name,
        mc_declared="unknown",
        eval=lambda z: horner(mcs, z),
        deriv=lambda z: horner(dcs, z),
        log_eval=log_eval,
        eval_np=lambda z: np.polyval(np_c, z),
        deriv_np=lambda z: np.polyval(np_d, z),
        log_abs_np=log_abs_np,
        real_on_axis=real,
        params=(("coeffs", ";".join(_fmt_c(c) for c in cs)),),
    )


def make_monomial(d: int = 2, c: float = 1.0) -> EntireFunction:
    """c z^d with exact moduli; the zero-free synthetic harness."""
    if d < 1:
        raise ValueError("degree must be >= 1")
    cc = complex(c)
    C = ctx.mpc(cc)
    logc = math.log(abs(cc))

    def log_eval(L, theta):
        return d * L + ctx.log(abs(C)), wrap_arg(d * theta + ctx.arg(C))

    def branches(w: ComplexPoint, t_in, t_out, limit=4):
        u, phi = _point_log_arg(w)
        if phi is None:
            return []
        lz = (u - ctx.log(abs(C))) / d
        if not (mpf(t_in) < lz < mpf(t_out)):
            return []
        out = []
        for k in range(min(d, limit)):
            a = (phi - ctx.arg(C) + 2 * ctx.pi * k) / d
            out.append(ComplexPoint.from_polar(lz, a))
        return out

    exact = lambda t: ext(t) * d + logc  # noqa: E731
    return EntireFunction(
        id="monomial",
        mc_declared="unknown",
        eval=lambda z: C * z ** d,
        deriv=lambda z: d * C * z ** (d - 1),
        log_eval=log_eval,
        exact_log_max_modulus=exact,
        exact_log_min_modulus=exact,
        eval_np=lambda z: cc * z ** d,
        deriv_np=lambda z: d * cc * z ** (d - 1),
        log_abs_np=lambda z: d * np.log(np.abs(z)) + logc,
        branches=branches,
        real_on_axis=(cc.imag == 0),
        params=(("d", d), ("c", _fmt_c(cc))),
    )


def load_coefficients(path) -> list:
    """Read a coefficient file: lines ``index re im``, '#' starts a comment."""
    coeffs = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"{path}:{lineno}: expected 'index re [im]'")
        idx = int(parts[0])
        if idx < 0:
            raise ValueError(f"{path}:{lineno}: negative index")
        re_ = float(parts[1])
        im_ = float(parts[2]) if len(parts) == 3 else 0.0
        coeffs[idx] = complex(re_, im_)
    if not coeffs:
        raise ValueError(f"{path}: no coefficients")
    out = [0j] * (max(coeffs) + 1)
    for k, v in coeffs.items():
        out[k] = v
    return out


def series_from_file(path) -> EntireFunction:
    return make_series(load_coefficients(path), name="series")


def builtin_catalog(a=1.0, b=0.0, coeff_file=None) -> list:
    fns = [make_exp(), make_affine_exp(a, b), make_sin(), make_cosh(), make_zexp()]
    if coeff_file is not None:
        fns.append(series_from_file(coeff_file))
    return fns


def get_function(name: str, **params) -> EntireFunction:
    """Resolve a function id (as used by the CLI) with parameters."""
    if name == "exp":
        return make_exp()
    if name in ("aexp_b", "aexpb", "affine_exp"):
        return make_affine_exp(params.get("a", 1.0), params.get("b", 0.0))
    if name == "sin":
        return make_sin()
    if name == "cosh":
        return make_cosh()
    if name in ("zexp", "z_exp"):
        return make_zexp()
    if name == "monomial":
        return make_monomial(int(params.get("d", 2)), params.get("c", 1.0))
    if name == "series":
        if "coeff_file" not in params:
            raise ValueError("series requires a coefficient file")
        return series_from_file(params["coeff_file"])
    raise ValueError(f"unknown function {name!r}")
