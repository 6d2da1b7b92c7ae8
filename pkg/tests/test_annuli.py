import math

import pytest

from annular_dyn.annuli import (ChainEntry, absorbing_step, align_partition, bohr_candidates, build_absorbing_chain,
                                build_Bn_sequence, gap_annuli, min_mod_witness, product_bound,
                                recurrence_residuals, seed_entry, zero_locating_indices)
from annular_dyn.covering import DESK_RELAXED, PAPER_STRICT, custom_profile
from annular_dyn.errors import CeilingViolated, DegenerateInnerAnnulus, HypothesisFailed, NoFeasibleR, TooShort
from annular_dyn.annuli import AnnuliChain
from annular_dyn.functions import get_function
from annular_dyn.moduli import mu
from annular_dyn.numbers import ctx

MONO = get_function("monomial", d=16, c=2)


@pytest.fixture(scope="module")
def mono_chain():
    return build_absorbing_chain(MONO, 6400, 5, PAPER_STRICT)


def test_exp_fails_min_modulus_at_once(exp_fn):
    res = build_absorbing_chain(exp_fn, 16, 5, DESK_RELAXED)
    assert res.terminal == "min-mod-failure"
    assert len(res.entries) == 1


def test_monomial_chain_recurrence(mono_chain):
    assert mono_chain.terminal == "budget"
    assert len(mono_chain.entries) == 5
    for e in mono_chain.entries[1:]:
        assert e.cert.verdict == "covers"
    for rel, slack in recurrence_residuals(MONO, mono_chain.entries):
        assert rel <= 1e-6
        assert slack >= -1e-6


def test_monomial_step_by_hand(mono_chain):
    # mu(t) = 16 t + log 2, so k' t' = (1 - 2 pi d) (16 (k - 2 d) t + log 2)
    a, b = mono_chain.entries[:2]
    t, k = 6400.0, 1.25
    d = 1 / math.sqrt(t)
    assert float(b.t) == pytest.approx(16 * t + math.log(2), rel=1e-15)
    want = (1 - 2 * math.pi * d) * (16 * (k - 2 * d) * t + math.log(2)) / (16 * t + math.log(2))
    assert float(b.k) == pytest.approx(want, rel=1e-12)
    assert float(b.k) >= k * (1 - 9 * d)


def test_product_bound(mono_chain):
    p, target = product_bound(mono_chain.entries)
    assert p >= target


def test_threshold_failure_is_named():
    with pytest.raises(HypothesisFailed) as ei:
        absorbing_step(MONO, seed_entry(6400, DESK_RELAXED), DESK_RELAXED)
    assert any("delta" in x for x in ei.value.failed)


def test_gap_annuli():
    prof = custom_profile(PAPER_STRICT, seed_width=40)
    res = build_absorbing_chain(MONO, 1e6, 4, prof)
    g = gap_annuli(res.entries, MONO)
    assert len(g.entries) == 3
    assert all(a.t_in < a.t_out for a in g.entries)
    assert all(g.interleaving_ok)
    assert zero_locating_indices(MONO, g) == []
    assert len(gap_annuli(res.entries[:2]).entries) == 1


def test_gap_annuli_degenerate(mono_chain):
    with pytest.raises(DegenerateInnerAnnulus):
        gap_annuli(mono_chain.entries)


def test_gap_annuli_too_short(mono_chain):
    with pytest.raises(TooShort):
        gap_annuli(mono_chain.entries[:1])


def test_bohr_candidates_arithmetic():
    c = bohr_candidates(math.exp(2), PAPER_STRICT)
    S = math.exp(2)
    assert float(c.S) == pytest.approx(S)
    assert float(c.T) == pytest.approx((1 + 40 / math.sqrt(S)) * S)
    # log T - log S' = 20 delta(S) log S
    assert float(c.gap) == pytest.approx(20 / math.sqrt(S) * S)
    assert float(c.gap) >= math.log(2)


def test_sin_witness_on_zero_radius():
    w = min_mod_witness(get_function("sin"), seed_entry(2))
    k = math.exp(float(w)) / math.pi
    assert k == pytest.approx(round(k), abs=1e-6)


def test_sin_chain_hits_the_ceiling():
    with pytest.raises(CeilingViolated):
        build_Bn_sequence(get_function("sin"), 2, 4)


def test_single_entry_chain(exp_fn):
    ch = build_Bn_sequence(exp_fn, 2, 1)
    assert len(ch.entries) == 1 and ch.certs == []
    al = align_partition(ch, exp_fn)
    assert al.logR > ch.entries[0].t_outer


def test_flagship_structure(flagship):
    chain, al = flagship
    assert len(chain.entries) == 5
    assert chain.n_j == [0, 1, 2, 3, 4]
    assert all(s == set() for s in chain.I_j)
    assert chain.all_cover()
    for row in chain.past_coverage:
        assert all(c.verdict == "covers" for c in row)
    # thin annuli keep a positive relative width even when t_in == t_out after rounding
    assert all(e.k_minus_1 > 0 for e in chain.entries)
    assert all(al.checked) and len(al.checked) >= 5


def test_flagship_first_step(flagship):
    chain, _ = flagship
    # the first Bohr step takes log S = mu(2) = e^2
    assert float(chain.entries[1].t) == pytest.approx(math.exp(2))
    assert chain.entries[1].origin == "bohr-S"


def test_flagship_logR_frozen(flagship):
    _, al = flagship
    assert float(al.logR) == pytest.approx(6.8158483930249677, rel=1e-14)
    assert al.lower < al.logR < al.upper


def test_no_feasible_R(exp_fn):
    a = ChainEntry(ctx.mpf(10), ctx.mpf(1), "seed")
    b = ChainEntry(ctx.mpf(15), ctx.mpf("0.1"), "seed")
    with pytest.raises(NoFeasibleR):
        align_partition(AnnuliChain(entries=[a, b]), exp_fn)
