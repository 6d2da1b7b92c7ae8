"""The eleven acceptance criteria, one test each (criterion 11 reuses 5, 8, 10)."""

import itertools
import json
import math
import random
import time

import numpy as np
import pytest

from annular_dyn.annuli import align_partition, build_absorbing_chain, build_Bn_sequence, recurrence_residuals
from annular_dyn.cli import main
from annular_dyn.covering import DESK_RELAXED, PAPER_STRICT, bohr_analyze, harnack_analyze
from annular_dyn.errors import HypothesisFailed
from annular_dyn.functions import builtin_catalog, get_function, make_affine_exp, make_monomial
from annular_dyn.moduli import clear_memo, hadamard_check, log_max_modulus, mu
from annular_dyn.partition import build_partition, compute_itinerary, relabel_offset
from annular_dyn.realize import realize_itinerary, realize_prescribed
from annular_dyn.serialize import chain_json, document, dumps, realization_json
from annular_dyn.synthesis import (TransitionSystem, admissible_check, branching_witness, count_admissible,
                                   gen_bounded, gen_oscillating, gen_periodic, gen_slow_escape,
                                   prescribed_rate_plan, rate_from_formula)

EXP = get_function("exp")
ZEXP = get_function("zexp")
FOUR = [get_function(n) for n in ("exp", "sin", "cosh", "zexp")]
PERIOD3 = [0, 1, 2, 0, 1, 2]
CLIMB = [0, 1, 2, 3, 4]
SLOW = dict(c0=2, c1=0.5)


# ---------------------------------------------------------------------------
# 1


def test_c01_modulus_oracle(criterion):
    start = time.perf_counter()
    worst = 0.0
    for f, closed in ((EXP, lambda t: math.exp(t)), (ZEXP, lambda t: t + math.exp(t))):
        sampled = f.without_overrides()
        for t in np.arange(0.5, 6.01, 0.5):
            v = float(log_max_modulus(sampled, float(t), use_override=False))
            worst = max(worst, abs(v - closed(t)) / abs(closed(t)))
    took = time.perf_counter() - start
    ok = worst <= 1e-9 and took < 5
    criterion(1, ok, f"max rel err {worst:.2e}, {took:.2f}s")
    assert ok


# ---------------------------------------------------------------------------
# 2


def test_c02_hadamard_suite(criterion):
    ts = list(np.round(np.arange(0.5, 5.01, 0.25), 2))
    bad = []
    for f in builtin_catalog():
        rep = hadamard_check(f, ts, [1.5, 2.0])
        R1 = rep.empirical_R1
        if R1 is None:
            bad.append((f.id, "no R1"))
            continue
        conv = [d for t, d in rep.second_differences if t >= R1 and d < -1e-9]
        g = [(t, v) for t, v in rep.growth if t >= R1 and v is not None]
        grow = [a for a, b in zip(g, g[1:]) if not b[1] > a[1]]
        if conv or grow or rep.max_violation_above_R1() > 0:
            bad.append((f.id, len(conv), len(grow)))
    criterion(2, not bad, f"{len(builtin_catalog())} builtins, violations above R1: {bad or 'none'}")
    assert not bad


# ---------------------------------------------------------------------------
# 3


def test_c03_maximum_principle(criterion):
    rng = np.random.default_rng(3)
    violations, checked, skipped = 0, 0, 0
    for f in FOUR:
        part = build_partition(f, 1, 8)
        for _ in range(1000):
            r = 4 * math.sqrt(rng.random())
            z = complex(r * math.cos(a := 2 * math.pi * rng.random()), r * math.sin(a))
            it = compute_itinerary(f, z, part, 6)
            if it.any_ambiguous:
                skipped += 1
                continue
            checked += 1
            violations += not it.transition_rule_holds()
    ok = violations == 0 and checked >= 1000
    criterion(3, ok, f"{checked} itineraries checked, {skipped} ambiguous skipped, {violations} violations")
    assert ok


# ---------------------------------------------------------------------------
# 4


def test_c04_relabeling(criterion):
    rng = np.random.default_rng(4)
    fails, done = 0, 0
    for f in FOUR:
        n = 0
        while n < 100:
            r = 3 * math.sqrt(rng.random())
            a = 2 * math.pi * rng.random()
            z = complex(r * math.cos(a), r * math.sin(a))
            lr1, lr2 = 1 + rng.random(), 1 + rng.random()
            i1 = compute_itinerary(f, z, build_partition(f, lr1, 8), 5)
            i2 = compute_itinerary(f, z, build_partition(f, lr2, 8), 5)
            if i1.any_ambiguous or i2.any_ambiguous or not i1.symbols or not i2.symbols:
                continue
            n += 1
            try:
                p = relabel_offset(i1, i2)
                m = min(len(i1.symbols), len(i2.symbols))
                fails += any(b - a not in (p, p + 1) for a, b in zip(i1.symbols[:m], i2.symbols[:m]))
            except Exception:
                fails += 1
        done += n
    criterion(4, fails == 0, f"{done} triples, {fails} failures")
    assert fails == 0


# ---------------------------------------------------------------------------
# 5


def bohr_json(r):
    rep = bohr_analyze(EXP, math.log(r), grid_n=64)
    return rep, dumps(document("bohr", {
        "r": r, "verdict": rep.verdict, "grid_size": rep.grid_size,
        "uncovered_log_abs": [format(float(p.log_abs()), ".12g") for p in rep.uncovered],
        "indeterminate": len(rep.indeterminate),
    }))


def test_c05_bohr_exp(criterion):
    start = time.perf_counter()
    problems = []
    for r in (2, 3, 4):
        rep, _ = bohr_json(r)
        cut = -8 * r + 1
        if rep.indeterminate:
            problems.append((r, "indeterminate", len(rep.indeterminate)))
        if any(float(p.log_abs()) > cut for p in rep.uncovered):
            problems.append((r, "uncovered above cut"))
        if rep.verdict == "violation":
            problems.append((r, "violation"))
    took = time.perf_counter() - start
    ok = not problems and took < 60
    criterion(5, ok, f"r=2,3,4 on 64x64 grids, {took:.1f}s, problems: {problems or 'none'}")
    assert ok


# ---------------------------------------------------------------------------
# 6


def test_c06_harnack(criterion):
    part_a, part_b = [], []
    for f, t, k in ((make_monomial(8), 6400, 2.0), (make_monomial(16, 2), 6400, 1.5), (make_monomial(4), 400, 3.0)):
        rep = harnack_analyze(f, t, k, DESK_RELAXED)
        part_a.extend(m for _, m in rep.part_a_samples)
        part_b.append((rep.outer_cert.verdict, rep.outer_cert.margin))
    # e^z + 10 on its small-radius window: the delta threshold is out of reach
    # there, so part (a) is read from the report attached to the failure
    try:
        rep = harnack_analyze(make_affine_exp(1, 10), 0.1, 14, DESK_RELAXED)
    except HypothesisFailed as exc:
        rep = exc.report
    part_a.extend(m for _, m in rep.part_a_samples)
    ok = bool(part_a) and min(part_a) >= 0 and all(v == "covers" and m > 0 for v, m in part_b)
    criterion(6, ok, f"min part (a) margin {min(part_a):.3g} over {len(part_a)} samples; part (b) {part_b}")
    assert ok


# ---------------------------------------------------------------------------
# 7


def test_c07_chain_recurrences(criterion):
    f = make_monomial(16, 2)
    res = build_absorbing_chain(f, 6400, 6, PAPER_STRICT)
    rr = recurrence_residuals(f, res.entries)
    ok = len(rr) == 5 and all(rel <= 1e-6 and slack >= -1e-6 for rel, slack in rr)
    criterion(7, ok, f"{len(rr)} steps, max rel err {max(r for r, _ in rr):.1e}, "
                     f"min k slack {min(s for _, s in rr):.3g}")
    assert ok


# ---------------------------------------------------------------------------
# 8


def flagship_json():
    clear_memo()
    chain = build_Bn_sequence(EXP, 2, 5, DESK_RELAXED)
    al = align_partition(chain, EXP)
    return chain, al, dumps(document("chain", chain_json(chain, EXP, al)))


def test_c08_flagship(criterion):
    start = time.perf_counter()
    chain, al, _ = flagship_json()
    took = time.perf_counter() - start
    ok = (len(chain.entries) == 5 and chain.all_cover() and all(not s for s in chain.I_j)
          and al.lower < al.logR < al.upper and len(al.checked) >= 5 and all(al.checked) and took < 120)
    criterion(8, ok, f"5 entries, all covers, I_j empty, logR {al.logR.to_str(10)}, {took:.1f}s")
    assert ok


# ---------------------------------------------------------------------------
# 9


def exhaustive(ts, length, s0, cap):
    return sum(admissible_check((s0,) + tail, ts)
               for tail in itertools.product(range(cap + 1), repeat=length - 1))


def test_c09_combinatorics(criterion, flagship):
    rnd = random.Random(9)
    mismatches = 0
    for _ in range(50):
        length = rnd.randint(1, 8)
        cap = rnd.randint(1, 5 if length <= 6 else 3)
        nj = sorted(rnd.sample(range(8), rnd.randint(0, 4)))
        I = [set(rnd.sample(range(cap + 1), rnd.randint(0, 1))) for _ in nj]
        ts = TransitionSystem(nj, I, index_by=rnd.choice(["time", "state"]))
        s0 = rnd.randint(0, cap)
        mismatches += count_admissible(ts, length, s0, cap) != exhaustive(ts, length, s0, cap)
    chain, al = flagship
    ts = TransitionSystem.from_chain(chain, horizon=12)
    part = build_partition(EXP, al.logR, 6)
    gens = [gen_periodic(ts, 3, 2, 12), gen_periodic(ts, 1, 2, 12), *gen_bounded(ts, 2, 4, 8),
            gen_oscillating(ts, 0, lambda j: j + 1, 12).seq,
            gen_slow_escape(ts, rate_from_formula("linear", 40, c0=0, c1=1), part, 40).seq]
    gen_ok = all(admissible_check(s, ts) for s in gens)
    bw = branching_witness(rate_from_formula("linear", 12, **SLOW), 4, chain=chain, levels=part.levels)
    distinct = len({tuple(b) for b in bw})
    br_ok = distinct == 16 and all(admissible_check(b, ts) for b in bw)
    ok = mismatches == 0 and gen_ok and br_ok
    criterion(9, ok, f"50 systems, {mismatches} mismatches; {len(gens)} generated sequences admissible: {gen_ok}; "
                     f"{distinct} distinct branches at depth 4")
    assert ok


# ---------------------------------------------------------------------------
# 10


def realization_docs(chain, al):
    out = []
    for seq in (PERIOD3, CLIMB):
        r = realize_itinerary(EXP, chain, al.logR, seq)
        out.append((r, dumps(document("realization", realization_json(r)))))
    rate = rate_from_formula("linear", 12, **SLOW)
    plan = prescribed_rate_plan(rate, chain, "noMC", lambda t: mu(EXP, t))
    pres = realize_prescribed(EXP, chain, al.logR, plan, rate, 4)
    return out, pres, plan


def test_c10_realization(criterion, flagship):
    chain, al = flagship
    docs, pres, plan = realization_docs(chain, al)
    round_trip = all(r.verified_len >= 5 and max(r.residuals) <= 1e-8 for r, _ in docs)
    rule1 = [n for n in plan.n_j_out if n <= 4]
    upper_seen = sorted(c["n"] for c in pres.upper_checks)
    ok = (round_trip and pres.realization.verified_len >= 5 and pres.lower_ok
          and pres.upper_ok and upper_seen == rule1 and len(rule1) >= 1)
    criterion(10, ok, f"verified {[r.verified_len for r, _ in docs]}, prescribed lower ok {pres.lower_ok}, "
                      f"upper ok {pres.upper_ok} at n={upper_seen} ({pres.bound_kind})")
    assert ok


# ---------------------------------------------------------------------------
# 11


def test_c11_determinism(criterion, tmp_path):
    same = {}
    _, a = bohr_json(3)
    _, b = bohr_json(3)
    paths = [tmp_path / f"bohr{i}.json" for i in range(2)]
    for p in paths:
        main(["covering", "--fn", "exp", "--test", "bohr", "--t", str(math.log(3)), "--grid", "32",
              "--out", str(p)])
    same[5] = a == b and paths[0].read_bytes() == paths[1].read_bytes()
    c1, al1, j1 = flagship_json()
    _, _, j2 = flagship_json()
    same[8] = j1 == j2
    d1, _, _ = realization_docs(c1, al1)
    d2, _, _ = realization_docs(c1, al1)
    same[10] = [d for _, d in d1] == [d for _, d in d2]
    ok = all(same.values())
    criterion(11, ok, f"byte-identical JSON for criteria {sorted(k for k, v in same.items() if v)}")
    assert ok
