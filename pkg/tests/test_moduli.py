import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from annular_dyn.errors import DomainError
from annular_dyn.functions import get_function
from annular_dyn.moduli import (circle_moduli, delta, hadamard_check, lambda_eps, log_max_modulus,
                                log_min_modulus, mu, mu_iter)
from annular_dyn.numbers import ctx

EXP = get_function("exp")
SIN = get_function("sin")
ZEXP = get_function("zexp")


def sweep(fn, r, n=10 ** 6):
    """Dense circle sweep, the independent oracle for sampled moduli."""
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    v = np.abs(fn(r * np.exp(1j * th)))
    return math.log(v.max()), math.log(v.min())


def test_exp_closed_forms():
    assert float(log_max_modulus(EXP, 2)) == pytest.approx(math.exp(2), rel=1e-15)
    assert float(log_min_modulus(EXP, 2)) == pytest.approx(-math.exp(2), rel=1e-15)


def test_zexp_max():
    assert float(log_max_modulus(ZEXP, math.log(3))) == pytest.approx(math.log(3) + 3, rel=1e-12)


def test_sin_against_dense_sweep():
    lM, lm = sweep(np.sin, 2.0)
    assert lM == pytest.approx(math.log(math.sinh(2)), abs=1e-9)
    assert float(log_max_modulus(SIN, math.log(2))) == pytest.approx(lM, abs=1e-9)
    assert float(log_min_modulus(SIN, math.log(2))) == pytest.approx(lm, abs=1e-9)
    assert float(log_min_modulus(SIN, math.log(2))) == pytest.approx(math.log(abs(math.sin(2))), abs=1e-9)


def test_sin_zero_on_circle():
    rep = circle_moduli(SIN, ctx.log(ctx.pi))
    assert rep.zero_on_circle
    assert rep.logm.saturated and rep.logm.value < 0


def test_sampled_path_matches_override():
    f = EXP.without_overrides()
    for t in (0.5, 1.0, 3.0):
        assert float(mu(f, t)) == pytest.approx(math.exp(t), rel=1e-9)


def test_mu_triple_iterate():
    # oracle: direct wide exponentiation e^(e^e)
    v = mu_iter(EXP, 1, 3)
    with ctx.workprec(200):
        direct = ctx.exp(ctx.exp(ctx.e))
    assert float(v) == pytest.approx(float(direct), rel=1e-15)
    assert float(v) == pytest.approx(3814279.1, abs=0.05)


@pytest.mark.parametrize("t,expect", [(100, 0.1), (6400, 0.0125), (4, 0.5)])
def test_delta(t, expect):
    assert float(delta(t)) == pytest.approx(expect)


def test_delta_domain():
    with pytest.raises(DomainError):
        delta(0.5)


def test_lambda_exp_closed_form():
    le = lambda_eps(EXP, math.log(10), math.e, math.e)
    lam = (math.exp(10) - 1) / 2
    assert float(le.log_lambda) == pytest.approx(math.log(lam), rel=1e-12)
    oracle = 2 * math.e * (math.e * lam) ** (-1 / math.e)
    assert le.eps == pytest.approx(oracle, rel=1e-9)
    assert le.eps == pytest.approx(0.12264, abs=1e-5)


@given(st.floats(min_value=0.5, max_value=5), st.floats(min_value=0.01, max_value=1))
def test_eps_decreasing_for_exp(t, dt):
    a = lambda_eps(EXP, t, math.e, math.e).eps
    b = lambda_eps(EXP, t + dt, math.e, math.e).eps
    assert b < a


def test_hadamard_exp():
    rep = hadamard_check(EXP, [1, 2, 3, 4, 5], [2])
    assert rep.max_violation_above_R1() == 0
    assert all(g is not None and g > 0 for _, g in rep.growth)


def test_hadamard_sin_has_R1():
    ts = list(np.exp(np.linspace(0, math.log(5), 12)))
    rep = hadamard_check(SIN, ts, [1.5])
    assert rep.empirical_R1 is not None
    assert rep.max_violation_above_R1() <= 1e-9


def test_hadamard_bad_k():
    with pytest.raises(DomainError):
        hadamard_check(EXP, [1], [1.0])


@given(st.floats(min_value=0.2, max_value=4))
def test_mu_exceeds_t_and_is_convex(t):
    h = 0.05
    for f in (EXP, ZEXP):
        a, b, c = (float(mu(f, x)) for x in (t - h, t, t + h))
        assert b > t
        assert a - 2 * b + c >= -1e-9
