"""Chains of annuli B_n = {t_n < log|z| < k_n t_n} with f(B_n) ⊇ B_(n+1).

Two assembly policies share one step:

* absorbing (Harnack) steps: t' = mu(t), k' t' = (1 - 2 pi delta) mu((k - 2 delta) t);
* Bohr splices when the minimum modulus dips below 1 inside the current
  annulus: the next radius is M(r_N) (or a larger T), with a fresh width.

Widths are stored as k - 1 so that annuli far narrower than the mantissa
(relative width e^(-t/2) once t is astronomically large) stay well defined.
The identity t * delta(t) = sqrt(t) keeps all Bohr quantities additive.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import List, Optional, Union

from .covering import (
    DESK_RELAXED,
    LOG2,
    LOG3,
    LOG8,
    Annulus,
    CoveringCertificate,
    branch_cover_certificate,
    count_zeros_annulus,
    find_small_min_modulus,
    get_profile,
    verify_annulus_covering,
)
from .errors import (
    CeilingViolated,
    DegenerateInnerAnnulus,
    DomainError,
    HypothesisFailed,
    NeitherCovered,
    NoFeasibleR,
    PreconditionError,
    RangeExceeded,
    TooShort,
)
from .functions import EntireFunction
from .moduli import DEFAULT_TOL, delta, log_min_modulus, mu
from .numbers import ExtLogReal, ctx, ext

ORIGINS = ("harnack-step", "bohr-S", "bohr-T", "seed")
CHAIN_TOL = 1e-6
GUARD_BITS = 128
MAX_WORK_BITS = 1 << 15


@contextmanager
def resolving(t):
    """Working precision that resolves O(1) offsets at log-radius t."""
    t = ext(t)
    if t.saturated:
        raise RangeExceeded("saturated radius")
    need = max(ctx.prec, int(ctx.mag(t.value)) + GUARD_BITS) if t.value else ctx.prec
    if need > MAX_WORK_BITS:
        raise RangeExceeded(f"resolving t needs {need} bits")
    with ctx.workprec(need):
        yield


@dataclass
class ChainEntry:
    t: ExtLogReal
    k_minus_1: object    # mpf, k_n - 1 > 0
    origin: str
    cert: Optional[CoveringCertificate] = field(default=None, compare=False)

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(self.origin)
        self.t = ext(self.t)
        self.k_minus_1 = ctx.mpf(self.k_minus_1)
        if not self.k_minus_1 > 0:
            raise ValueError("k must exceed 1")

    @property
    def k(self):
        return 1 + self.k_minus_1

    @property
    def delta(self):
        return delta(self.t)

    @property
    def t_outer(self) -> ExtLogReal:
        return self.t + self.t * self.k_minus_1

    def annulus(self) -> Annulus:
        # below resolution t + t(k-1) can round under t; keep the annulus thin
        out = self.t_outer
        if out < self.t:
            out = self.t
        return Annulus(self.t, out, rel_width=self.k_minus_1)


@dataclass
class MinModFailure:
    t_s: ExtLogReal


@dataclass
class AnnuliChain:
    entries: List[ChainEntry]
    n_j: List[int] = field(default_factory=list)
    I_j: List[set] = field(default_factory=list)
    certs: List[CoveringCertificate] = field(default_factory=list)
    profile: str = DESK_RELAXED.name
    fn_key: str = ""
    terminal: str = "budget"
    witnesses: List[ExtLogReal] = field(default_factory=list)
    past_coverage: List[list] = field(default_factory=list)
    mode: str = "noMC"

    def __len__(self):
        return len(self.entries)

    def ts(self):
        return [e.t for e in self.entries]

    def all_cover(self) -> bool:
        return all(c is not None and c.verdict == "covers" for c in self.certs)


# ---------------------------------------------------------------------------
# absorbing steps


def min_mod_witness(f: EntireFunction, entry: ChainEntry) -> Optional[ExtLogReal]:
    """t_s in (t(1 + delta), t(k - delta)) with m(e^t_s) <= 1, or None.

    When that interval is below the working resolution the single
    representable radius t is probed instead.
    """
    t = entry.t
    try:
        with resolving(t):
            root = ctx.sqrt(t.value)          # t * delta
            lo = t + root
            hi = entry.t_outer - root
            if lo < hi:
                return find_small_min_modulus(f, lo, hi)
    except RangeExceeded:
        root = ctx.sqrt(t.value)
    if not entry.k_minus_1 > 2 / root:
        raise DomainError("entry too thin for a min-modulus window")
    v = log_min_modulus(f, t)
    return t if v <= 0 else None


def absorbing_step(f: EntireFunction, entry: ChainEntry, profile=DESK_RELAXED,
                   tol: float = DEFAULT_TOL) -> Union[ChainEntry, MinModFailure]:
    """One Harnack step, or the min-modulus witness that blocks it."""
    prof = get_profile(profile)
    t, d = entry.t, entry.delta
    w = min_mod_witness(f, entry)
    if w is not None:
        return MinModFailure(t_s=w)
    failed = []
    mu_t = mu(f, t, tol)
    if not mu_t > prof.chain_exponent * t:
        failed.append(f"M(r)>r^{prof.chain_exponent:g}")
    if not ctx.sqrt(t.value) >= prof.min_sqrt_log:
        failed.append(f"sqrt(log r)>={prof.min_sqrt_log:g}")
    if not d < min(1 / (2 * ctx.pi), entry.k_minus_1 / 4):
        failed.append("delta<min(1/(2pi),(k-1)/4)")
    if failed:
        raise HypothesisFailed(failed)
    inner_top = t * (entry.k - 2 * d)
    if mu_t.saturated:
        raise RangeExceeded("next radius saturated")
    kt_next = (1 - 2 * ctx.pi * d) * mu(f, inner_top, tol)
    if kt_next.saturated:
        raise RangeExceeded("next outer radius saturated")
    nxt = ChainEntry(t=mu_t, k_minus_1=((kt_next - mu_t) / mu_t).value, origin="harnack-step")
    nxt.cert = verify_annulus_covering(f, Annulus(t, inner_top), nxt.annulus(), inner_exact=True)
    return nxt


def seed_entry(t0, profile=DESK_RELAXED) -> ChainEntry:
    prof = get_profile(profile)
    return ChainEntry(t=ext(t0), k_minus_1=prof.seed_width * delta(t0), origin="seed")


@dataclass
class AbsorbingResult:
    entries: List[ChainEntry]
    terminal: str            # min-mod-failure | budget | saturation
    t_s: Optional[ExtLogReal] = None


def build_absorbing_chain(f: EntireFunction, t0, budget: int, profile=DESK_RELAXED,
                          first: Optional[ChainEntry] = None) -> AbsorbingResult:
    """Seed k0 = 1 + c delta(t0) and iterate absorbing steps up to ``budget`` entries.

    A min-modulus failure at the last entry is still reported when the budget
    is reached there.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    entries = [first if first is not None else seed_entry(t0, profile)]
    while True:
        if len(entries) >= budget:
            try:
                w = min_mod_witness(f, entries[-1])
            except (RangeExceeded, DomainError):
                w = None
            if w is not None:
                return AbsorbingResult(entries, "min-mod-failure", w)
            return AbsorbingResult(entries, "budget")
        try:
            out = absorbing_step(f, entries[-1], profile)
        except RangeExceeded:
            return AbsorbingResult(entries, "saturation")
        if isinstance(out, MinModFailure):
            return AbsorbingResult(entries, "min-mod-failure", out.t_s)
        entries.append(out)


def product_bound(entries: List[ChainEntry], seed_width: float = 20.0, step_factor: float = 9.0) -> tuple:
    """(1 + c delta_0) prod (1 - 9 delta_j) and the target 1 + 5 delta_0."""
    d0 = entries[0].delta
    p = 1 + seed_width * d0
    for e in entries[:-1]:
        p *= 1 - step_factor * e.delta
    return p, 1 + 5 * d0


# ---------------------------------------------------------------------------
# gap annuli (multiply connected case)


@dataclass
class GapAnnuli:
    entries: List[Annulus]
    interleaving_ok: List[bool]


def gap_annuli(chain: Union[AnnuliChain, List[ChainEntry]], f: Optional[EntireFunction] = None,
               tol: float = CHAIN_TOL) -> GapAnnuli:
    """Annuli between consecutive absorbed annuli:
    t_in(n) = k_n (1 - 6 pi delta_n) t_n, t_out(n) = (1 + 6 pi delta_(n+1)) t_(n+1)."""
    ents = chain.entries if isinstance(chain, AnnuliChain) else list(chain)
    if len(ents) < 2 or any(e.origin != "harnack-step" for e in ents[1:]):
        raise TooShort("need at least two entries joined by harnack steps")
    six_pi = 6 * ctx.pi
    out = []
    for a, b in zip(ents, ents[1:]):
        inner_factor = a.k * (1 - six_pi * a.delta)
        if inner_factor <= 1 + six_pi * a.delta:
            raise DegenerateInnerAnnulus(f"k(1-6 pi delta) = {float(inner_factor):.6g} <= 1+6 pi delta")
        t_in = a.t * inner_factor
        t_out = b.t * (1 + six_pi * b.delta)
        if not t_in < t_out:
            raise DegenerateInnerAnnulus("gap annulus is empty")
        out.append(Annulus(t_in, t_out))
    ok = []
    if f is not None:
        for g, h in zip(out, out[1:]):
            lo, hi = mu(f, g.t_in), mu(f, g.t_out)
            slack = tol * max(1.0, abs(float(hi)))
            ok.append(bool(h.t_in >= lo - slack and h.t_out <= hi + slack))
    return GapAnnuli(out, ok)


def zero_locating_indices(f: EntireFunction, gaps: GapAnnuli) -> List[int]:
    """Indices of gap annuli containing a zero of f (where countable)."""
    idx = []
    for n, a in enumerate(gaps.entries):
        try:
            if count_zeros_annulus(f, a) > 0:
                idx.append(n)
        except RangeExceeded:
            break
    return idx


# ---------------------------------------------------------------------------
# Bohr splice


@dataclass
class BohrCandidates:
    S: ExtLogReal
    S_rel: object        # log S' = log S (1 + S_rel)
    T: ExtLogReal
    T_rel: object
    gap: object          # log T - log S'

    @property
    def S2(self) -> ExtLogReal:
        return self.S + self.S * self.S_rel

    @property
    def T2(self) -> ExtLogReal:
        return self.T + self.T * self.T_rel


def bohr_candidates(log_S, profile=DESK_RELAXED) -> BohrCandidates:
    """S' = S^(1 + a delta(S)), T = S^(1 + b delta(S)), T' = T^(1 + a delta(T))."""
    prof = get_profile(profile)
    S = ext(log_S)
    if S.saturated:
        raise RangeExceeded("log S saturated")
    root = ctx.sqrt(S.value)
    T = S + prof.t_gap * root
    return BohrCandidates(S=S, S_rel=prof.s_width / root, T=T, T_rel=prof.s_width * delta(T),
                          gap=(prof.t_gap - prof.s_width) * root)


@dataclass
class BohrExtension:
    nextS: ChainEntry
    nextT: ChainEntry
    chosen: ChainEntry
    choice: str
    cert_S: CoveringCertificate
    cert_T: CoveringCertificate
    past_coverage: List[CoveringCertificate]
    exception: set
    log_T_over_S2: object
    ceiling: ExtLogReal
    source: Annulus


def extend_chain_bohr(f: EntireFunction, terminal_entry: ChainEntry, t_s, profile=DESK_RELAXED,
                      prior: Optional[List[ChainEntry]] = None, prefer: str = "S",
                      tol: float = 1e-9) -> BohrExtension:
    """Next entry from a min-modulus witness t_s inside the terminal annulus.

    ``prior`` are the entries before the terminal one; coverage of all of
    them and of the terminal annulus is certified from the same source.
    """
    prof = get_profile(profile)
    with resolving(terminal_entry.t):
        tN = terminal_entry.t
        ts = ext(t_s)
        # r = s/3, and the source annulus A(r, 8r) must sit inside B_N
        r_t = ts - LOG3
        src_hi = r_t + LOG8
        if not (r_t >= tN and src_hi <= terminal_entry.t_outer):
            raise PreconditionError("A(s/3, 8s/3) is not inside the terminal annulus")
        source = Annulus(r_t, src_hi)
        c = bohr_candidates(mu(f, tN), prof)
        if not c.gap >= LOG2:
            raise PreconditionError("T/S' < 2")
        ceiling = mu(f, r_t)
        if not c.T2 <= ceiling:
            raise CeilingViolated(f"log T' = {c.T2.to_str(8)} exceeds log M(s/3) = {ceiling.to_str(8)}")
        a_S = Annulus(c.S, c.S2, rel_width=c.S_rel)
        a_T = Annulus(c.T, c.T2, rel_width=c.T_rel)
        cS = branch_cover_certificate(f, source, a_S, tol=tol)
        cT = branch_cover_certificate(f, source, a_T, tol=tol)
        okS, okT = cS.verdict == "covers", cT.verdict == "covers"
        if not (okS or okT):
            raise NeitherCovered("neither candidate annulus is covered")
        choice = "both" if okS and okT else ("first" if okS else "second")
        eS = ChainEntry(t=c.S, k_minus_1=c.S_rel, origin="bohr-S", cert=cS)
        eT = ChainEntry(t=c.T, k_minus_1=c.T_rel, origin="bohr-T", cert=cT)
        if choice == "both":
            chosen = eT if prefer == "T" else eS
        else:
            chosen = eS if okS else eT
        past, exc = [], set()
        for n, e in enumerate(list(prior or []) + [terminal_entry]):
            pc = branch_cover_certificate(f, source, e.annulus(), tol=tol)
            past.append(pc)
            if pc.verdict != "covers":
                exc.add(n)
    if len(exc) > 1:
        raise NeitherCovered(f"more than one earlier annulus missed: {sorted(exc)}")
    return BohrExtension(eS, eT, chosen, choice, cS, cT, past, exc, c.gap, ceiling, source)


# ---------------------------------------------------------------------------
# full construction


def build_Bn_sequence(f: EntireFunction, t0, n_max: int, profile=DESK_RELAXED, prefer: str = "S",
                      allow_mc: bool = False) -> AnnuliChain:
    """Alternate absorbing segments and Bohr splices until n_max entries."""
    prof = get_profile(profile)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if f.mc_declared == "has-MC" and not allow_mc:
        raise PreconditionError("function declares multiply connected components; use the gap-annuli path")
    chain = AnnuliChain(entries=[], profile=prof.name, fn_key=f.key)
    first = seed_entry(t0, prof)
    while True:
        seg = build_absorbing_chain(f, first.t, n_max - len(chain.entries), prof, first=first)
        for i, e in enumerate(seg.entries):
            if i > 0:
                chain.certs.append(e.cert)
            chain.entries.append(e)
        chain.terminal = seg.terminal
        if seg.terminal != "min-mod-failure":
            break
        N = len(chain.entries) - 1
        chain.n_j.append(N)
        chain.witnesses.append(seg.t_s)
        if len(chain.entries) >= n_max:
            chain.I_j.append(set())
            chain.terminal = "budget"
            break
        try:
            ext_ = extend_chain_bohr(f, chain.entries[-1], seg.t_s, prof, prior=chain.entries[:-1],
                                     prefer=prefer)
        except RangeExceeded:
            chain.I_j.append(set())
            chain.terminal = "saturation"
            break
        chain.I_j.append(set(ext_.exception))
        chain.past_coverage.append(ext_.past_coverage)
        first = ext_.chosen
        chain.certs.append(first.cert)
    return chain


def build_mc_chain(f: EntireFunction, t0, n_max: int, profile=DESK_RELAXED) -> AnnuliChain:
    """Absorbing chain plus gap annuli (the multiply connected assembly)."""
    res = build_absorbing_chain(f, t0, n_max, profile)
    chain = AnnuliChain(entries=res.entries, profile=get_profile(profile).name, fn_key=f.key,
                        terminal=res.terminal, mode="MC")
    chain.certs = [e.cert for e in res.entries[1:]]
    return chain


def recurrence_residuals(f: EntireFunction, chain: Union[AnnuliChain, List[ChainEntry]]):
    """Per harnack-step pair: relative error of k't' against the recurrence,
    and k' - k (1 - 9 delta)."""
    ents = chain.entries if isinstance(chain, AnnuliChain) else list(chain)
    out = []
    for a, b in zip(ents, ents[1:]):
        if b.origin != "harnack-step":
            continue
        d = a.delta
        want = (1 - 2 * ctx.pi * d) * mu(f, a.t * (a.k - 2 * d))
        rel = abs(float(((b.t_outer - want) / want).value))
        out.append((rel, float(b.k - a.k * (1 - 9 * d))))
    return out


# ---------------------------------------------------------------------------
# partition alignment


@dataclass
class Alignment:
    logR: ExtLogReal
    lower: ExtLogReal
    upper: ExtLogReal
    checked: List[bool]


def align_partition(chain: AnnuliChain, f: EntireFunction, depth: Optional[int] = None) -> Alignment:
    """logR with k0 t0 < logR < t1 and k1 t1 < mu(logR), at the midpoint of the
    feasible interval; then checks mu^(n-1)(logR) < t_n and k_n t_n < mu^n(logR)."""
    ents = chain.entries
    if not ents:
        raise NoFeasibleR("empty chain")
    lower = ents[0].t_outer
    if len(ents) == 1:
        logR = lower * (1 + ctx.mpf(2) ** -20)
        return Alignment(logR, lower, ExtLogReal.saturated_above(), [True])
    upper = ents[1].t
    if not lower < upper:
        raise NoFeasibleR("k0 t0 >= t1")
    lo, hi = lower, upper
    target = ents[1].t_outer
    if not mu(f, hi) > target:
        raise NoFeasibleR("no logR below t1 reaches k1 t1")
    if not mu(f, lo) > target:
        a, b = lo, hi
        for _ in range(200):
            m = (a + b) / 2
            if mu(f, m) > target:
                b = m
            else:
                a = m
        lo = b
    logR = (lo + hi) / 2
    if not (lo < logR < hi):
        raise NoFeasibleR("feasible interval collapsed")
    n_check = len(ents) if depth is None else min(depth + 1, len(ents))
    checked = [bool(ents[0].t_outer < logR)]
    level_prev = logR             # mu^(n-1)(logR)
    level = mu(f, logR)           # mu^n(logR)
    for n in range(1, n_check):
        checked.append(bool(level_prev < ents[n].t and ents[n].t_outer < level))
        if n + 1 < n_check:
            level_prev = level
            try:
                level = mu(f, level) if not level.saturated else level
            except RangeExceeded:
                level = ExtLogReal.saturated_above()
    if not all(checked):
        raise NoFeasibleR(f"containment fails at n = {checked.index(False)}")
    return Alignment(logR, lo, hi, checked)
