"""Wide-exponent reals and complex points.

Radii are stored as ``t = log r``.  The mantissa precision and the exponent
range are both configurable; a value whose binary exponent would leave the
range becomes *saturated* (``+inf`` or ``-inf``) and stays saturated through
any further arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import mpmath

ctx = mpmath.MPContext()
ctx.prec = 128

# binary exponent range of ExtLogReal values (|exponent| < 2**(EXPONENT_BITS-1))
EXPONENT_BITS = 4096
# exponent range for the plain (re, im) form of a ComplexPoint
PLAIN_EXPONENT_BITS = 64

LOG2E = 1.4426950408889634


def set_precision(bits: int) -> None:
    if bits < 64:
        raise ValueError("precision must be at least 64 bits")
    ctx.prec = int(bits)


def set_exponent_bits(bits: int) -> None:
    global EXPONENT_BITS
    if bits < 16:
        raise ValueError("exponent range too small")
    EXPONENT_BITS = int(bits)


def get_precision() -> int:
    return ctx.prec


def _exp_limit_bits() -> int:
    return 2 ** (EXPONENT_BITS - 1)


def exp_guard(x) -> int:
    """Guard bits for exp(x): enough to keep the integer part of x exact."""
    return max(0, _mag(x)) + 10


def exp_wide(v):
    """exp(v) to working precision for arbitrarily large finite v.

    mpmath's exp raises e to the integer part of v by repeated squaring,
    which is slow once v has thousands of integer bits.  Here the split is
    done in base 2: one wide division gives v / log 2 = n + frac exactly
    enough, and only 2^frac needs an exponential.
    """
    m = _mag(v)
    if m < 32:
        with ctx.extraprec(m + 10):
            return +ctx.exp(v)
    with ctx.extraprec(m + 20):
        y = v / ctx.ln2
        n = int(ctx.floor(y))
        frac = y - n
    with ctx.extraprec(10):
        r = ctx.ldexp(ctx.exp(frac * ctx.ln2), n)
    return +r


def _mag(x) -> int:
    """Binary magnitude bound of a finite mpf (0 for zero)."""
    if not x:
        return 0
    return int(ctx.mag(x))


def mpf(x):
    if isinstance(x, ExtLogReal):
        return x.value
    if isinstance(x, str):
        return ctx.mpf(x)
    return ctx.mpf(x)


Number = Union[int, float, str, "ExtLogReal", object]


class ExtLogReal:
    """Ordered real with wide exponent range and a saturation flag."""

    __slots__ = ("value", "saturated")

    def __init__(self, value=0, saturated: bool = False):
        if isinstance(value, ExtLogReal):
            saturated = saturated or value.saturated
            value = value.value
        v = ctx.mpf(value)
        if not saturated:
            if ctx.isinf(v) or ctx.isnan(v):
                saturated = True
            elif _mag(v) >= _exp_limit_bits():
                saturated = True
        if saturated and not ctx.isinf(v):
            v = ctx.inf if v >= 0 else -ctx.inf
        self.value = v
        self.saturated = bool(saturated)

    # construction helpers -------------------------------------------------
    @classmethod
    def saturated_above(cls) -> "ExtLogReal":
        return cls(ctx.inf, True)

    @classmethod
    def saturated_below(cls) -> "ExtLogReal":
        return cls(-ctx.inf, True)

    # arithmetic -------------------------------------------------------------
    def _bin(self, other, op):
        o = ext(other)
        if self.saturated or o.saturated:
            try:
                r = op(self.value, o.value)
            except (ZeroDivisionError, ValueError):
                r = ctx.inf
            if ctx.isnan(r):
                r = ctx.inf
            return ExtLogReal(r, True)
        return ExtLogReal(op(self.value, o.value))

    def __add__(self, other):
        return self._bin(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._bin(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return ext(other) - self

    def __mul__(self, other):
        return self._bin(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._bin(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return ext(other) / self

    def __neg__(self):
        return ExtLogReal(-self.value, self.saturated)

    def __abs__(self):
        return ExtLogReal(abs(self.value), self.saturated)

    # comparisons (saturated values sit at +-inf) ---------------------------
    def _cmp_value(self, other):
        return ext(other).value

    def __lt__(self, other):
        return self.value < self._cmp_value(other)

    def __le__(self, other):
        return self.value <= self._cmp_value(other)

    def __gt__(self, other):
        return self.value > self._cmp_value(other)

    def __ge__(self, other):
        return self.value >= self._cmp_value(other)

    def __eq__(self, other):
        try:
            o = ext(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.value == o.value and self.saturated == o.saturated

    def __hash__(self):
        return hash((str(self.value), self.saturated))

    def __float__(self):
        if self.saturated:
            return math.copysign(math.inf, 1.0 if self.value > 0 else -1.0)
        return float(self.value)

    def __repr__(self):
        if self.saturated:
            return f"ExtLogReal({'+' if self.value > 0 else '-'}inf, saturated)"
        return f"ExtLogReal({ctx.nstr(self.value, 20)})"

    def to_str(self, digits: int = 17) -> str:
        if self.saturated:
            return "+sat" if self.value > 0 else "-sat"
        return ctx.nstr(self.value, digits, min_fixed=-6, max_fixed=18)

    # transcendental ---------------------------------------------------------
    def exp(self) -> "ExtLogReal":
        if self.saturated:
            return ExtLogReal(ctx.inf if self.value > 0 else 0, self.value > 0)
        v = self.value
        if v * LOG2E >= _exp_limit_bits() - 2:
            return ExtLogReal.saturated_above()
        if -v * LOG2E >= _exp_limit_bits() - 2:
            return ExtLogReal(0)
        return ExtLogReal(exp_wide(v))

    def log(self) -> "ExtLogReal":
        if self.saturated:
            return ExtLogReal(self.value, True) if self.value > 0 else ExtLogReal.saturated_below()
        if self.value <= 0:
            raise ValueError("log of non-positive ExtLogReal")
        return ExtLogReal(ctx.log(self.value))

    def sqrt(self) -> "ExtLogReal":
        if self.saturated:
            return ExtLogReal(self.value, True)
        return ExtLogReal(ctx.sqrt(self.value))

    @property
    def finite(self) -> bool:
        return not self.saturated


def ext(x) -> ExtLogReal:
    if isinstance(x, ExtLogReal):
        return x
    return ExtLogReal(x)


def exp_would_saturate(v) -> bool:
    v = mpf(v)
    return v * LOG2E >= _exp_limit_bits() - 2


def plain_log_limit():
    """Largest |log|z|| kept in plain (re, im) form."""
    return ctx.mpf(2) ** (PLAIN_EXPONENT_BITS - 1) / LOG2E


def wrap_arg(a):
    """Reduce an angle to [0, 2pi)."""
    two_pi = 2 * ctx.pi
    if 0 <= a < two_pi:
        return a
    if -two_pi < a < 0:
        # no fmod: it shifts by the exponent, which overflows for tiny angles
        r = a + two_pi
        return r if r < two_pi else ctx.mpf(0)
    r = ctx.fmod(a, two_pi)
    if r < 0:
        r += two_pi
    if r >= two_pi:
        r -= two_pi
    return r


@dataclass(frozen=True)
class ComplexPoint:
    """A complex number in plain form, log-polar form, or both.

    ``arg`` may be None for a log-polar point whose argument could not be
    resolved at the working precision; such a point cannot be iterated.
    """

    z: Optional[object] = None
    logmod: Optional[object] = None
    arg: Optional[object] = None

    @classmethod
    def from_complex(cls, value) -> "ComplexPoint":
        return cls(z=ctx.mpc(value))

    @classmethod
    def from_polar(cls, logmod, arg) -> "ComplexPoint":
        lm = mpf(logmod)
        a = None if arg is None else wrap_arg(mpf(arg))
        z = None
        if a is not None and abs(lm) < plain_log_limit():
            with ctx.extraprec(exp_guard(lm)):
                z = +ctx.exp(ctx.mpc(lm, a))
        return cls(z=z, logmod=lm, arg=a)

    @property
    def is_plain(self) -> bool:
        return self.z is not None

    def log_abs(self):
        if self.logmod is not None:
            return self.logmod
        a = abs(self.z)
        if a == 0:
            return -ctx.inf
        return ctx.log(a)

    def argument(self):
        if self.arg is not None:
            return self.arg
        if self.z is None:
            return None
        if self.z == 0:
            return ctx.mpf(0)
        return wrap_arg(ctx.arg(self.z))

    def complex(self) -> complex:
        if self.z is None:
            raise OverflowError("point has no plain form")
        return complex(self.z)

    def __repr__(self):
        if self.z is not None:
            return f"ComplexPoint({ctx.nstr(self.z, 15)})"
        a = "?" if self.arg is None else ctx.nstr(self.arg, 15)
        return f"ComplexPoint(logmod={ctx.nstr(self.logmod, 15)}, arg={a})"


def as_point(z) -> ComplexPoint:
    if isinstance(z, ComplexPoint):
        return z
    return ComplexPoint.from_complex(z)
