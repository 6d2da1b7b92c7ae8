import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from annular_dyn.numbers import ComplexPoint, ExtLogReal, ctx, ext, set_precision, wrap_arg

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def test_exp_far_beyond_double_range_stays_finite():
    x = ext(1618.18).exp().exp()
    assert x.finite
    assert not x.saturated
    # log of the value recovers the input
    assert abs(float(x.log().log()) - 1618.18) < 1e-9


def test_saturation_is_sticky():
    big = ExtLogReal.saturated_above()
    assert big.saturated and (big + 1).saturated and (big * 2).saturated
    assert ExtLogReal.saturated_below() < ext(-1e300)


def test_exp_of_huge_argument_saturates():
    assert ext(ctx.mpf(2) ** 5000).exp().saturated


def test_precision_floor():
    with pytest.raises(ValueError):
        set_precision(32)


@given(finite, finite)
def test_ordering_matches_floats(a, b):
    assert (ext(a) < ext(b)) == (a < b)
    assert (ext(a) == ext(b)) == (a == b)


@given(finite, finite)
def test_arithmetic_matches_mpmath(a, b):
    assert float(ext(a) + ext(b)) == pytest.approx(a + b, rel=1e-15, abs=1e-300)
    assert float(ext(a) * ext(b)) == pytest.approx(a * b, rel=1e-15, abs=1e-300)


@given(st.floats(min_value=-50, max_value=50), st.floats(min_value=-3.1, max_value=3.1))
def test_polar_roundtrip(lm, arg):
    z = ComplexPoint.from_polar(lm, arg)
    assert float(z.log_abs()) == pytest.approx(lm, abs=1e-12)
    d = float(z.argument()) - arg
    assert abs(math.remainder(d, 2 * math.pi)) < 1e-12


def test_plain_point_matches_mpmath():
    z = ComplexPoint.from_complex(3 + 4j)
    assert float(z.log_abs()) == pytest.approx(math.log(5), rel=1e-15)
    assert float(z.argument()) == pytest.approx(float(mpmath.atan2(4, 3)), rel=1e-15)


@given(st.floats(min_value=-1e4, max_value=1e4))
def test_wrap_arg_range(a):
    w = wrap_arg(a)
    assert 0 <= w < 2 * ctx.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-6)
