import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from annular_dyn.errors import RangeExceeded
from annular_dyn.functions import (builtin_catalog, derivative, evaluate, get_function, load_coefficients,
                                   make_monomial, series_from_file)
from annular_dyn.numbers import ComplexPoint, ctx

EXP = get_function("exp")
SIN = get_function("sin")
ZEXP = get_function("zexp")


def c(p):
    return p.complex()


def test_exp_values():
    assert c(evaluate(EXP, 0)) == pytest.approx(1)
    assert c(evaluate(EXP, 1 + 1j * math.pi)) == pytest.approx(-math.e)


def test_zexp_value():
    assert c(evaluate(ZEXP, 1)) == pytest.approx(math.e)


def test_derivatives():
    assert c(derivative(EXP, 0)) == pytest.approx(1)
    assert c(derivative(SIN, 0)) == pytest.approx(1)
    assert c(derivative(ZEXP, 1)) == pytest.approx(2 * math.e)


def test_catalog_contents():
    ids = [f.id for f in builtin_catalog()]
    assert {"exp", "sin", "cosh", "zexp"} <= set(ids)
    exp = builtin_catalog()[0]
    assert float(exp.exact_log_max_modulus(2)) == pytest.approx(math.exp(2))
    sin = next(f for f in builtin_catalog() if f.id == "sin")
    assert sin.exact_log_max_modulus is None


def test_coefficient_file_square(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("0 0\n1 0\n2 1\n")
    f = series_from_file(p)
    assert c(evaluate(f, 3)) == pytest.approx(9)
    assert [complex(v) for v in load_coefficients(p)] == [0, 0, 1]


def test_unknown_function():
    with pytest.raises(ValueError):
        get_function("tan")


def test_large_argument_goes_log_polar():
    # e^(e^800): far past double range, still evaluable in log form
    w = evaluate(EXP, ComplexPoint.from_polar(ctx.log(800), 0))
    assert float(w.log_abs()) == pytest.approx(800)
    big = evaluate(EXP, w)
    assert float(ctx.log(big.log_abs())) == pytest.approx(800, rel=1e-12)


def test_unresolved_argument_raises():
    p = ComplexPoint(logmod=ctx.mpf(10) ** 30, arg=None)
    with pytest.raises(RangeExceeded):
        evaluate(EXP, p)


small = st.complex_numbers(max_magnitude=20, allow_nan=False, allow_infinity=False)


@given(small)
def test_builtins_match_cmath(z):
    assert c(evaluate(EXP, z)) == pytest.approx(cmath.exp(z), rel=1e-12, abs=1e-300)
    assert c(evaluate(SIN, z)) == pytest.approx(cmath.sin(z), rel=1e-10, abs=1e-12)
    assert c(evaluate(ZEXP, z)) == pytest.approx(z * cmath.exp(z), rel=1e-12, abs=1e-300)


@given(small)
def test_vectorised_matches_scalar(z):
    for f in builtin_catalog():
        a = complex(f.eval_np(np.array([z]))[0])
        b = c(evaluate(f, z))
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


@given(st.integers(min_value=1, max_value=12), st.complex_numbers(min_magnitude=0.1, max_magnitude=5))
def test_monomial(d, z):
    f = make_monomial(d, 1.0)
    assert c(evaluate(f, z)) == pytest.approx(z ** d, rel=1e-12)
