import itertools

import pytest
from hypothesis import given, strategies as st

from annular_dyn.errors import InsufficientBranching, RateViolation, Unrealizable
from annular_dyn.moduli import mu
from annular_dyn.partition import build_partition
from annular_dyn.synthesis import (TransitionSystem, admissible_check, branching_witness, check_rate,
                                   count_admissible, enumerate_admissible, gen_bounded, gen_oscillating,
                                   gen_periodic, gen_slow_escape, load_rate_file, prescribed_rate_plan,
                                   rate_from_formula)


def brute_count(n_j, I_j, index_by, length, s0, cap):
    """Independent oracle: the backjump rule written out directly."""
    pos = {v: j for j, v in enumerate(n_j)}
    total = 0
    for tail in itertools.product(range(cap + 1), repeat=length - 1):
        seq = (s0,) + tail
        ok = True
        for n, (a, b) in enumerate(zip(seq, seq[1:])):
            if b == a + 1:
                continue
            j = pos.get(n if index_by == "time" else a)
            if j is None or b > a or b in (I_j[j] if j < len(I_j) else set()):
                ok = False
                break
        total += ok
    return total


@pytest.fixture(scope="module")
def flag_ts(flagship):
    return TransitionSystem.from_chain(flagship[0], horizon=12)


def test_admissible_examples():
    ts = TransitionSystem([2], [set()])
    assert admissible_check([0, 1, 2, 0], ts)
    assert not admissible_check([0, 1, 2, 4], ts)
    ts1 = TransitionSystem([0, 2], [set(), {1}])
    assert not admissible_check([0, 1, 2, 1], ts1)


def test_count_examples():
    assert count_admissible(TransitionSystem([]), 7, 0, 10) == 1
    assert count_admissible(TransitionSystem([0], [set()]), 2, 2, 3) == 4


def test_flagship_count_frozen(flag_ts):
    n = count_admissible(flag_ts, 6, 2, 4)
    assert n == brute_count([0, 1, 2, 3, 4], [], "state", 6, 2, 4)
    assert n == 507


@given(st.lists(st.integers(min_value=0, max_value=6), max_size=4, unique=True),
       st.sampled_from(["time", "state"]), st.integers(min_value=1, max_value=5),
       st.integers(min_value=0, max_value=3), st.integers(min_value=2, max_value=4), st.data())
def test_count_matches_brute_force(nj, mode, length, s0, cap, data):
    nj = sorted(nj)
    I = [set(data.draw(st.lists(st.integers(0, cap), max_size=1))) for _ in nj]
    ts = TransitionSystem(nj, I, index_by=mode)
    s0 = min(s0, cap)
    assert count_admissible(ts, length, s0, cap) == brute_count(nj, I, mode, length, s0, cap)
    assert len(enumerate_admissible(ts, length, s0, cap)) == count_admissible(ts, length, s0, cap)


def test_periodic(flag_ts):
    assert gen_periodic(flag_ts, 3, 2, 6) == [2, 3, 4, 2, 3, 4]
    assert gen_periodic(flag_ts, 1, 2, 5) == [2] * 5


def test_periodic_blocked():
    ts = TransitionSystem([2], [{0}], index_by="state")
    with pytest.raises(Unrealizable) as ei:
        gen_periodic(ts, 3, 0, 6)
    assert ei.value.witness["I_j"] == [0]


def test_bounded(flag_ts):
    out = gen_bounded(flag_ts, 2, 4, 8)
    assert len(out) == 8 and len({tuple(s) for s in out}) == 8
    assert all(len(s) == 12 and admissible_check(s, flag_ts) for s in out)
    assert all(2 <= x <= 4 for s in out for x in s)
    assert gen_bounded(flag_ts, 2, 4, 1) == [min(out)]


def test_oscillating(flag_ts):
    osc = gen_oscillating(flag_ts, 0, lambda j: j + 1, 12)
    assert admissible_check(osc.seq, flag_ts)
    assert osc.returns >= 2
    # after every peak the next symbol is s_min
    idx = [i for i in range(len(osc.seq) - 1) if osc.seq[i + 1] < osc.seq[i]]
    assert all(osc.seq[i + 1] == 0 for i in idx)


def test_rate_violation(exp_fn):
    rate = rate_from_formula("power", 6, c0=1, p=8)
    with pytest.raises(RateViolation) as ei:
        check_rate(rate, lambda t: mu(exp_fn, t))
    assert ei.value.index == 0


def test_rate_file(tmp_path):
    p = tmp_path / "rate.txt"
    p.write_text("# n log a\n0 2\n1 2.5\n2 3\n")
    r = load_rate_file(p)
    assert [float(v) for v in r.log_a] == [2, 2.5, 3]


def test_slow_escape(flag_ts, flagship, exp_fn):
    chain, al = flagship
    part = build_partition(exp_fn, al.logR, 6)
    rate = rate_from_formula("linear", 40, c0=0, c1=1)
    se = gen_slow_escape(flag_ts, rate, part, 40)
    assert admissible_check(se.seq, flag_ts)
    assert se.loiter_lengths and all(x > 0 for x in se.loiter_lengths)
    assert all(b >= a for a, b in zip(se.seq, se.seq[1:]))
    for n in range(se.first_loiter_end, len(se.seq)):
        s = se.seq[n]
        if s < len(part.levels):
            assert part.levels[s] <= n


def test_plan_least_p(flagship, exp_fn):
    chain, _ = flagship
    rate = rate_from_formula("linear", 12, c0=2, c1=0.5)
    plan = prescribed_rate_plan(rate, chain, "noMC", lambda t: mu(exp_fn, t))
    assert plan.valid
    assert plan.n_j_out
    for fr in plan.firings:
        p, la = fr["p"], rate.log_a[fr["n"] + 1]
        assert la <= chain.entries[p].t
        if p > 0:
            assert chain.entries[p - 1].t < la


def test_plan_on_chain_radii(flagship, exp_fn):
    chain, _ = flagship
    rate = rate_from_formula("linear", 1, c0=2, c1=0)
    rate.log_a = [e.t for e in chain.entries]
    plan = prescribed_rate_plan(rate, chain, "MC", lambda t: mu(exp_fn, t))
    assert plan.targets == [0, 1, 2, 3, 4]


def test_branching(flagship, exp_fn):
    chain, al = flagship
    part = build_partition(exp_fn, al.logR, 6)
    rate = rate_from_formula("linear", 12, c0=2, c1=0.5)
    bw = branching_witness(rate, 4, chain=chain, levels=part.levels)
    assert len({tuple(b) for b in bw}) == 16
    ts = TransitionSystem.from_chain(chain)
    assert all(admissible_check(b, ts) for b in bw)
    assert len(branching_witness(rate, 0, chain=chain)) == 1


def test_branching_fast_rate(flagship):
    chain, _ = flagship
    rate = rate_from_formula("linear", 3, c0=7, c1=0)
    with pytest.raises(InsufficientBranching):
        branching_witness(rate, 4, chain=chain)
