import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from annular_dyn.covering import (DESK_RELAXED, PAPER_STRICT, Annulus, bohr_analyze, corollary_cover_choice,
                                  count_zeros_annulus, custom_profile, decide_preimage, find_small_min_modulus,
                                  get_profile, harnack_analyze, verify_annulus_covering, w_grid)
from annular_dyn.errors import HypothesisFailed, PreconditionError
from annular_dyn.functions import evaluate, get_function, make_affine_exp, make_monomial
from annular_dyn.numbers import ComplexPoint

EXP = get_function("exp")
SIN = get_function("sin")
SQ = make_monomial(2)
L = math.log


def test_profiles():
    assert get_profile("paper-strict") is PAPER_STRICT
    assert get_profile("desk-relaxed").harnack_exponent == 3
    with pytest.raises(ValueError):
        custom_profile(DESK_RELAXED, seed_width=-1)
    with pytest.raises(ValueError):
        get_profile("lax")


def test_annulus_validation():
    with pytest.raises(ValueError):
        Annulus(2, 1)
    a = Annulus(1, 1, rel_width=1e-300)
    assert a.thin


def test_boundary_check_exp_fails():
    c = verify_annulus_covering(EXP, Annulus(3, 4), Annulus(20.1, 21))
    assert float(c.inner_logM) == pytest.approx(math.exp(3))
    assert float(c.outer_logm) == pytest.approx(-math.exp(4))
    assert c.verdict == "fails"


def test_boundary_check_square():
    c = verify_annulus_covering(SQ, Annulus(1, 2), Annulus(2.5, 3.5))
    assert c.verdict == "covers"
    assert c.margin == pytest.approx(0.5)
    assert verify_annulus_covering(SQ, Annulus(1, 2), Annulus(1.5, 4.5)).verdict == "fails"


def test_small_min_modulus():
    w = find_small_min_modulus(EXP, 0, 1)
    assert w is not None and 0 < float(w) < 1
    s = find_small_min_modulus(SIN, 1, 1.3)
    assert float(s) == pytest.approx(math.log(math.pi), abs=1e-6)


def test_affine_exp_has_no_small_min_modulus():
    f = make_affine_exp(1, 10)
    assert find_small_min_modulus(f, 0.1, 0.7) is None
    # oracle: dense circle sweeps
    th = np.linspace(0, 2 * np.pi, 20000, endpoint=False)
    for t in np.linspace(0.1, 0.7, 13):
        assert np.abs(np.exp(np.exp(t) * np.exp(1j * th)) + 10).min() > 1


def test_zero_counts():
    assert count_zeros_annulus(SIN, Annulus(L(2), L(4))) == 2
    assert count_zeros_annulus(EXP, Annulus(0, 3)) == 0
    assert count_zeros_annulus(get_function("zexp"), Annulus(L(0.5), L(2))) == 0


@given(st.integers(min_value=1, max_value=8), st.floats(min_value=0.05, max_value=0.95))
def test_sin_zero_count_property(k, frac):
    # only the zeros +-k pi lie in the annulus
    w = frac * L((k + 1) / k) / 2
    lo, hi = L(k * math.pi) - w, L(k * math.pi) + w
    assert count_zeros_annulus(SIN, Annulus(lo, hi)) == 2


def test_harnack_monomial():
    h = harnack_analyze(make_monomial(8), 6400, 2)
    assert h.part_a_margin > 0
    assert h.outer_cert.verdict == "covers" and h.outer_cert.margin > 0
    assert h.K >= h.K_lower
    assert h.inside_ok


def test_harnack_exp_fails_mbig():
    with pytest.raises(HypothesisFailed) as ei:
        harnack_analyze(EXP, 5, 3)
    assert "mbig" in ei.value.failed


def test_harnack_affine_exp_part_a():
    with pytest.raises(HypothesisFailed) as ei:
        harnack_analyze(make_affine_exp(1, 10), 0.1, 14, DESK_RELAXED)
    rep = ei.value.report
    assert rep.hyp_mbig
    assert rep.part_a_margin >= 0


def test_bohr_exp_small_radius():
    rep = bohr_analyze(EXP, L(2), grid_n=24)
    assert rep.verdict in ("full-cover", "one-disc-exception")
    assert all(float(p.log_abs()) <= -16 + 1 for p in rep.uncovered)
    assert not rep.indeterminate


@given(st.floats(min_value=L(2.5), max_value=L(7.5)), st.floats(min_value=0, max_value=6.28))
def test_forward_witness_is_covered(t, a):
    # w = f(z0) for z0 in the source annulus always has a preimage there
    z0 = ComplexPoint.from_polar(t, a)
    w = evaluate(EXP, z0)
    dec, _, _ = decide_preimage(EXP, w, L(2), L(16))
    assert dec is True


def test_corollary_choice_exp():
    # S = 2.5, S' = 3, T = 6.5, T' = 7 < M(2) = e^2
    choice, c1, c2 = corollary_cover_choice(EXP, L(2), L(2.5), L(3), L(6.5), L(7))
    assert choice == "both"


def test_corollary_precondition():
    with pytest.raises(PreconditionError):
        corollary_cover_choice(EXP, L(2), L(3), L(5), L(8), L(math.e ** 2 * 0.9))


def test_w_grid_shape():
    g = w_grid(-2, 1, 4, 5)
    assert len(g) == 20
    assert min(float(p.log_abs()) for p in g) == pytest.approx(-2)
