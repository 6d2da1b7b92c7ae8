"""Numerical verdicts for annulus covering.

Two certificate routes:

* boundary moduli: max|f| on the inner circle below the target inner radius
  and min|f| on the outer circle above the target outer radius give
  f(source) ⊇ target by the degree argument;
* inverse branches / winding / Newton: per-point preimage search over a
  log-polar grid of target values (used where min|f| is tiny, e.g. exp).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import (
    BoundaryZero,
    DomainError,
    HypothesisFailed,
    Indeterminate,
    NeitherCovered,
    NonIntegerResidual,
    PreconditionError,
    RangeExceeded,
)
from .functions import EntireFunction, NP_LOG_LIMIT, evaluate
from .moduli import DEFAULT_TOL, lambda_eps, log_max_modulus, log_min_modulus, mu
from .numbers import ComplexPoint, ExtLogReal, ctx, ext, mpf

VERDICTS = ("covers", "fails", "indeterminate")
LOG2 = math.log(2)
LOG3 = math.log(3)
LOG8 = math.log(8)


# ---------------------------------------------------------------------------
# hypothesis profiles


@dataclass(frozen=True)
class Profile:
    name: str
    harnack_exponent: float    # M(r) > r^e for the Harnack covering step
    chain_exponent: float      # M(r) > r^e along absorbing chains
    bohr_exponent: float       # M(r) > r^e when splicing Bohr steps
    min_sqrt_log: float        # sqrt(log r) lower bound for chain radii
    seed_width: float          # k0 = 1 + seed_width * delta(r0)
    s_width: float             # S' = S^(1 + s_width * delta(S))
    t_gap: float               # T = S^(1 + t_gap * delta(S))

    def as_dict(self):
        return {
            "name": self.name,
            "harnack_exponent": self.harnack_exponent,
            "chain_exponent": self.chain_exponent,
            "bohr_exponent": self.bohr_exponent,
            "min_sqrt_log": self.min_sqrt_log,
            "seed_width": self.seed_width,
            "s_width": self.s_width,
            "t_gap": self.t_gap,
        }


PAPER_STRICT = Profile("paper-strict", 9.0, 16.0, 10000.0, 80.0, 20.0, 20.0, 40.0)
DESK_RELAXED = Profile("desk-relaxed", 3.0, 3.0, 3.0, 1.5, 3.0, 3.0, 6.0)
PROFILES = {p.name: p for p in (PAPER_STRICT, DESK_RELAXED)}


def get_profile(name_or_profile) -> Profile:
    if isinstance(name_or_profile, Profile):
        return name_or_profile
    try:
        return PROFILES[name_or_profile]
    except KeyError:
        raise ValueError(f"unknown profile {name_or_profile!r}") from None


def custom_profile(base: Profile, **overrides) -> Profile:
    vals = base.as_dict()
    vals.update(overrides)
    vals["name"] = overrides.get("name", "custom")
    for k, v in vals.items():
        if k != "name" and not (float(v) > 0):
            raise ValueError(f"profile threshold {k} must be positive")
    return Profile(**vals)


# ---------------------------------------------------------------------------
# core types


@dataclass(frozen=True)
class Annulus:
    t_in: ExtLogReal
    t_out: ExtLogReal
    # (t_out - t_in) / t_in kept exactly; lets an annulus narrower than the
    # working resolution (t_in == t_out after rounding) remain well defined
    rel_width: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "t_in", ext(self.t_in))
        object.__setattr__(self, "t_out", ext(self.t_out))
        if self.t_in < self.t_out:
            return
        if self.rel_width is not None and self.rel_width > 0 and self.t_in == self.t_out:
            return
        raise ValueError(f"annulus needs t_in < t_out ({self.t_in.to_str()} >= {self.t_out.to_str()})")

    @property
    def thin(self) -> bool:
        """True when the width is below the working resolution."""
        return not self.t_in < self.t_out

    def contains_log(self, lm, strict: bool = True) -> bool:
        lm = ext(lm)
        if strict:
            return self.t_in < lm < self.t_out
        return self.t_in <= lm <= self.t_out

    def contains(self, other: "Annulus") -> bool:
        return self.t_in <= other.t_in and other.t_out <= self.t_out

    def mid(self):
        return (self.t_in + self.t_out) / 2


@dataclass
class CoveringCertificate:
    source: Annulus
    target: Annulus
    inner_logM: Optional[ExtLogReal]
    outer_logm: Optional[ExtLogReal]
    margin: float
    verdict: str
    tol: float = 1e-9
    method: str = "boundary-moduli"
    inner_exact: bool = False
    note: str = ""

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(self.verdict)


def _verdict(margin: float, tol: float) -> str:
    if margin > tol:
        return "covers"
    if margin < -tol:
        return "fails"
    return "indeterminate"


def _fmargin(x: ExtLogReal) -> float:
    if x.saturated:
        return math.inf if x.value > 0 else -math.inf
    return float(x.value)


def verify_annulus_covering(f: EntireFunction, source: Annulus, target: Annulus, tol: float = 1e-9,
                            inner_exact: bool = False) -> CoveringCertificate:
    """Boundary-moduli sufficiency check for f(source) ⊇ target.

    With ``inner_exact`` the target inner radius is by definition the maximum
    modulus on the source inner circle, so only the outer margin decides.
    The verdict is one-sided: "fails" means the sufficient condition is
    violated, not that covering is disproved.
    """
    try:
        inner = log_max_modulus(f, source.t_in)
        outer = log_min_modulus(f, source.t_out)
    except RangeExceeded as exc:
        return CoveringCertificate(source, target, None, None, math.nan, "indeterminate", tol, note=str(exc))
    m_in = _fmargin(target.t_in - inner)
    m_out = _fmargin(outer - target.t_out)
    scale = max(1.0, abs(float(target.t_out)))
    margin = m_out if inner_exact else min(m_in, m_out)
    verdict = _verdict(margin / scale if math.isfinite(margin) else margin, tol)
    return CoveringCertificate(source, target, inner, outer, margin, verdict, tol,
                               method="boundary-moduli", inner_exact=inner_exact)


# ---------------------------------------------------------------------------
# small minimum modulus


def _logm_value(f, t, tol):
    v = log_min_modulus(f, t, tol)
    return -math.inf if (v.saturated and v.value < 0) else v.value


def find_small_min_modulus(f: EntireFunction, t_lo, t_hi, tol: float = 1e-9, n_grid: int = 24):
    """Some t_s in (t_lo, t_hi) with log m(e^t_s) <= 0, or None.

    Grid search over the interval followed by golden refinement of the
    smallest sampled value.  Raises Indeterminate when the smallest value
    found is in [0, tol).
    """
    lo, hi = mpf(t_lo), mpf(t_hi)
    if not lo < hi:
        raise DomainError("need t_lo < t_hi")
    ts = [lo + (hi - lo) * (i + ctx.mpf(0.5)) / n_grid for i in range(n_grid)]
    vals = [_logm_value(f, t, tol) for t in ts]
    i = min(range(n_grid), key=lambda j: (vals[j], -j))
    best_t, best_v = ts[i], vals[i]
    if best_v != -math.inf:
        a = ts[i - 1] if i > 0 else lo + (ts[0] - lo) / 4
        b = ts[i + 1] if i < n_grid - 1 else hi - (hi - ts[-1]) / 4
        c = b - (b - a) * 0.6180339887498949
        d = a + (b - a) * 0.6180339887498949
        fc, fd = _logm_value(f, c, tol), _logm_value(f, d, tol)
        for _ in range(40):
            if fc <= fd:
                b, d, fd = d, c, fc
                c = b - (b - a) * 0.6180339887498949
                fc = _logm_value(f, c, tol)
            else:
                a, c, fc = c, d, fd
                d = a + (b - a) * 0.6180339887498949
                fd = _logm_value(f, d, tol)
            if fc == -math.inf or fd == -math.inf:
                break
        for tt, vv in ((c, fc), (d, fd)):
            if vv < best_v:
                best_t, best_v = tt, vv
    if best_v <= 0:
        return ext(best_t)
    if best_v < tol:
        raise Indeterminate(f"sampled min log m = {float(best_v):.3g} within tolerance of 0")
    return None


# ---------------------------------------------------------------------------
# Harnack-type covering


def raw_delta(t):
    """1/sqrt(t) for any t > 0 (no t > 1 restriction)."""
    t = mpf(t)
    if t <= 0:
        raise DomainError("delta needs t > 0")
    return 1 / ctx.sqrt(t)


@dataclass
class HarnackReport:
    t: float
    k: float
    delta: float
    profile: str
    hyp_Mr9: bool
    hyp_delta: bool
    hyp_delta_c: bool
    hyp_mbig: bool
    part_a_margin: Optional[float] = None
    part_a_samples: List[tuple] = field(default_factory=list)
    logR_out: Optional[ExtLogReal] = None
    K: Optional[float] = None
    K_lower: Optional[float] = None
    outer_cert: Optional[CoveringCertificate] = None
    inside_ok: Optional[bool] = None
    mbig_witness: Optional[ExtLogReal] = None

    @property
    def failed(self) -> List[str]:
        out = []
        if not self.hyp_Mr9:
            out.append("Mr9")
        if not self.hyp_delta:
            out.append("delta")
        if not self.hyp_mbig:
            out.append("mbig")
        return out


def harnack_analyze(f: EntireFunction, t, k: float, profile=DESK_RELAXED, n_s: int = 16,
                    tol: float = 1e-9) -> HarnackReport:
    """Evaluate the Harnack covering theorem at r = e^t.

    Everything computable is filled in; if a hypothesis fails the report is
    attached to the raised HypothesisFailed.
    """
    prof = get_profile(profile)
    if k <= 1:
        raise DomainError("k must exceed 1")
    t = mpf(t)
    d = raw_delta(t)
    kk = ctx.mpf(k)
    mu_t = mu(f, t)
    hyp_M = bool(mu_t > prof.harnack_exponent * t)
    hyp_d = bool(t > 1 and d < min(1 / (2 * ctx.pi), (kk - 1) / 4))
    hyp_dc = bool(t > 1 and d < min(1 / (6 * ctx.pi), (kk - 1) / (6 * ctx.pi + 1)))
    lo, hi = t * (1 + d), t * (kk - d)
    witness = None
    if lo < hi:
        try:
            witness = find_small_min_modulus(f, lo, hi, tol)
            hyp_mb = witness is None
        except Indeterminate:
            hyp_mb = False
    else:
        # empty range: the condition holds vacuously
        hyp_mb = True
    rep = HarnackReport(t=float(t), k=float(k), delta=float(d), profile=prof.name, hyp_Mr9=hyp_M,
                        hyp_delta=hyp_d, hyp_delta_c=hyp_dc, hyp_mbig=hyp_mb, mbig_witness=witness)
    a_lo, a_hi = t * (1 + 2 * d), t * (kk - 2 * d)
    if hyp_mb and a_lo < a_hi:
        c = 1 - 2 * ctx.pi * d
        worst = None
        for i in range(n_s):
            s = a_lo + (a_hi - a_lo) * i / (n_s - 1)
            lm = log_min_modulus(f, s)
            lM = mu(f, s)
            marg = _fmargin(lm - c * lM)
            rep.part_a_samples.append((float(s), marg))
            worst = marg if worst is None else min(worst, marg)
        rep.part_a_margin = worst
        # part (b)
        R = mu_t
        top = mu(f, a_hi)
        K = (c * top) / R
        rep.logR_out = R
        rep.K = float(K)
        rep.K_lower = float(kk * (1 - 9 * d))
        try:
            rep.outer_cert = verify_annulus_covering(
                f, Annulus(t, a_hi), Annulus(R, K * R), tol, inner_exact=True)
        except ValueError:
            rep.outer_cert = None
        # part (c): image of the inner sub-annulus lies in the predicted annulus
        if hyp_dc:
            i_lo, i_hi = t * (1 + 6 * ctx.pi * d), t * kk * (1 - 6 * ctx.pi * d)
            dR = raw_delta(R.value)
            o_lo, o_hi = R * (1 + 6 * ctx.pi * dR), K * R * (1 - 6 * ctx.pi * dR)
            ok = True
            if i_lo < i_hi:
                for j in range(5):
                    s = i_lo + (i_hi - i_lo) * j / 4
                    if not (log_min_modulus(f, s) > o_lo and mu(f, s) < o_hi):
                        ok = False
            rep.inside_ok = ok
    failed = rep.failed
    if failed:
        raise HypothesisFailed(failed, report=rep)
    return rep


# ---------------------------------------------------------------------------
# per-value preimage deciders


def newton_multistart(f: EntireFunction, w, t_in, t_out, seeds: int = 8, tol: float = 1e-12,
                      max_iter: int = 80, rng_seed: int = 0):
    """Newton on f(z) = w from a seeds x seeds log-polar grid of starts.

    Returns a ComplexPoint inside the open log-annulus, or None.
    """
    wp = w if isinstance(w, ComplexPoint) else ComplexPoint.from_complex(w)
    if not wp.is_plain:
        return None
    wz = wp.z
    lo, hi = mpf(t_in), mpf(t_out)
    scale = max(1, abs(wz))
    for i in range(seeds):
        for j in range(seeds):
            lr = lo + (hi - lo) * (i + ctx.mpf(0.5)) / seeds
            th = 2 * ctx.pi * (j + ctx.mpf(0.5) * (i % 2)) / seeds
            z = ctx.exp(ctx.mpc(lr, th))
            for _ in range(max_iter):
                try:
                    fz = f.eval(z) - wz
                    dz = f.deriv(z)
                except (OverflowError, ValueError, ZeroDivisionError):
                    break
                if abs(fz) <= tol * scale:
                    break
                if dz == 0:
                    break
                step = fz / dz
                if abs(step) > abs(z) / 2 + 1:
                    step = step * (abs(z) / 2 + 1) / abs(step)
                z = z - step
                if abs(z) == 0 or ctx.log(abs(z)) > hi + 2:
                    break
            try:
                res = abs(f.eval(z) - wz)
            except (OverflowError, ValueError):
                continue
            if res <= tol * scale * 1e3 and z != 0 and lo < ctx.log(abs(z)) < hi:
                return ComplexPoint(z=z)
    return None


def winding_number_cell(f: EntireFunction, w: complex, t0: float, t1: float, th0: float, th1: float,
                        n_edge: int = 64, max_edge: int = 4096):
    """Winding number of f(boundary of a log-polar cell) around w.

    Returns an int, or None when the boundary passes (numerically) through w
    or the sampling cannot resolve the argument increments.
    """
    if f.eval_np is None or t1 > NP_LOG_LIMIT:
        return None
    n = n_edge
    while n <= max_edge:
        s = np.linspace(0.0, 1.0, n, endpoint=False)
        th_a = th0 + (th1 - th0) * s
        t_r = t0 + (t1 - t0) * s
        path = np.concatenate([
            np.exp(t0 + 1j * th_a),
            np.exp(t_r + 1j * th1),
            np.exp(t1 + 1j * (th1 - (th1 - th0) * s)),
            np.exp(t1 - (t1 - t0) * s + 1j * th0),
        ])
        with np.errstate(all="ignore"):
            vals = f.eval_np(path) - w
        if not np.all(np.isfinite(vals)):
            return None
        if np.min(np.abs(vals)) < 1e-12 * max(1.0, abs(w)):
            return None
        ang = np.angle(vals)
        dang = np.diff(np.concatenate([ang, ang[:1]]))
        dang = (dang + np.pi) % (2 * np.pi) - np.pi
        if np.max(np.abs(dang)) < np.pi / 4:
            return int(round(float(np.sum(dang)) / (2 * np.pi)))
        n *= 2
    return None


def winding_decide(f: EntireFunction, w: complex, t_in: float, t_out: float, cells: int = 8):
    """True if some cell has non-zero winding; False if all are zero; None if inconclusive."""
    if f.eval_np is None or t_out > NP_LOG_LIMIT:
        return None
    inconclusive = False
    for i in range(cells):
        a = t_in + (t_out - t_in) * i / cells
        b = t_in + (t_out - t_in) * (i + 1) / cells
        for j in range(cells):
            th0 = 2 * math.pi * j / cells
            th1 = 2 * math.pi * (j + 1) / cells
            wn = winding_number_cell(f, w, a, b, th0, th1)
            if wn is None:
                # refine the cell once by splitting it into four
                sub = [winding_number_cell(f, w, aa, bb, c0, c1)
                       for aa, bb in ((a, (a + b) / 2), ((a + b) / 2, b))
                       for c0, c1 in ((th0, (th0 + th1) / 2), ((th0 + th1) / 2, th1))]
                if any(x is None for x in sub):
                    inconclusive = True
                    continue
                wn = sum(sub)
            if wn != 0:
                return True
    return None if inconclusive else False


def decide_preimage(f: EntireFunction, w: ComplexPoint, t_in, t_out, seeds: int = 8):
    """Is there z with f(z) = w and log|z| in (t_in, t_out)?

    Returns (decision, method, preimage) with decision True/False/None.
    """
    if f.preimage_slack is not None:
        try:
            if f.preimage_slack(w, t_in, t_out) > 0:
                return True, "branch-room", None
        except RangeExceeded:
            pass
    if f.branches is not None:
        try:
            cands = f.branches(w, t_in, t_out, 4)
        except RangeExceeded:
            cands = None
        if cands:
            return True, "inverse-branch", cands[0]
        if cands is not None and f.id in ("exp", "aexp_b", "monomial"):
            # these branch lists are exhaustive
            return False, "inverse-branch", None
    if w.is_plain and float(mpf(t_out)) <= NP_LOG_LIMIT:
        wc = complex(w.z)
        dec = winding_decide(f, wc, float(mpf(t_in)), float(mpf(t_out)))
        if dec is not None:
            z = newton_multistart(f, w, t_in, t_out, seeds) if dec else None
            return dec, "winding", z
        z = newton_multistart(f, w, t_in, t_out, seeds)
        if z is not None:
            return True, "newton", z
    return None, "none", None


# ---------------------------------------------------------------------------
# Bohr-type covering


@dataclass
class BohrReport:
    t: float
    s_witness: ExtLogReal
    grid_size: int
    uncovered: List[ComplexPoint]
    indeterminate: List[ComplexPoint]
    w1_estimate: Optional[ComplexPoint]
    eps_bound: float
    verdict: str
    log_w_min: float = 0.0
    log_w_max: float = 0.0
    C0: float = 20.0
    C1: float = 50.0


def w_grid(log_lo, log_hi, n_mod: int, n_arg: int):
    """n_mod x n_arg log-polar grid, log|w| in [log_lo, log_hi) and arg in [0, 2pi)."""
    lo, hi = mpf(log_lo), mpf(log_hi)
    pts = []
    for i in range(n_mod):
        lm = lo + (hi - lo) * i / n_mod
        for j in range(n_arg):
            pts.append(ComplexPoint.from_polar(lm, 2 * ctx.pi * j / n_arg))
    return pts


def bohr_analyze(f: EntireFunction, t, grid_n: int = 64, C0: float = 20.0, C1: float = 50.0,
                 log_w_min=None, seeds: int = 8) -> BohrReport:
    """Scan B(0, M(r)) \\ {0} for values not attained in A(r, 8r)."""
    t = mpf(t)
    witness = find_small_min_modulus(f, t + LOG2, t + 2 * LOG2)
    if witness is None:
        raise HypothesisFailed(["msmall"])
    top = mu(f, t)
    lo = mpf(log_w_min) if log_w_min is not None else -8 * ctx.exp(t) - 10
    grid = w_grid(lo, top.value, grid_n, grid_n)
    src_in, src_out = t, t + LOG8
    uncovered, indet = [], []
    for w in grid:
        dec, _, _ = decide_preimage(f, w, src_in, src_out, seeds)
        if dec is None:
            indet.append(w)
        elif not dec:
            uncovered.append(w)
    le = lambda_eps(f, t, C0, C1)
    w1 = None
    verdict = "full-cover"
    if uncovered:
        with ctx.workprec(ctx.prec):
            zs = [p.z if p.is_plain else ctx.mpc(0) for p in uncovered]
            cen = sum(zs, ctx.mpc(0)) / len(zs)
        w1 = ComplexPoint(z=cen)
        rad = le.eps * max(abs(cen), 1)
        inside = all(p.is_plain and abs(p.z - cen) <= rad for p in uncovered)
        verdict = "one-disc-exception" if inside else "violation"
    return BohrReport(t=float(t), s_witness=witness, grid_size=len(grid), uncovered=uncovered,
                      indeterminate=indet, w1_estimate=w1, eps_bound=le.eps, verdict=verdict,
                      log_w_min=float(lo), log_w_max=float(top), C0=C0, C1=C1)


def branch_cover_certificate(f: EntireFunction, source: Annulus, target: Annulus, n_mod: int = 17,
                             n_arg: int = 16, tol: float = 1e-9, seeds: int = 6) -> CoveringCertificate:
    """Grid certificate for f(source) ⊇ target from explicit preimages.

    Per grid value the slack is either the branch-room log-slack or the
    relative log-depth of a found preimage inside the source; the margin is
    the smallest slack (negative when some value has no preimage).
    """
    lo, hi = target.t_in.value, target.t_out.value
    worst = math.inf
    note = ""
    for i in range(n_mod + 1):
        lm = lo + (hi - lo) * i / n_mod
        if i == 0 or i == n_mod:
            # stay just inside the open target
            lm = lo + (hi - lo) * (ctx.mpf(1) / (4 * n_mod) if i == 0 else 1 - ctx.mpf(1) / (4 * n_mod))
        for j in range(n_arg):
            w = ComplexPoint.from_polar(lm, 2 * ctx.pi * j / n_arg)
            slack = None
            if f.preimage_slack is not None:
                try:
                    sl = f.preimage_slack(w, source.t_in.value, source.t_out.value)
                    if sl > 0:
                        slack = float(sl) if sl < 1e300 else 1e300
                except RangeExceeded:
                    pass
            if slack is None:
                dec, method, z = decide_preimage(f, w, source.t_in.value, source.t_out.value, seeds)
                if dec is None:
                    slack = 0.0
                    note = "indeterminate grid value"
                elif not dec:
                    slack = -1.0
                    note = "grid value without preimage"
                elif z is not None:
                    lz = ext(z.log_abs())
                    depth = min(_fmargin(lz - source.t_in), _fmargin(source.t_out - lz))
                    slack = depth / max(1.0, abs(float(lz)))
                else:
                    slack = 0.0
            worst = min(worst, slack)
    if worst == math.inf:
        worst = 0.0
    return CoveringCertificate(source, target, None, None, float(worst), _verdict(worst, tol), tol,
                               method="inverse-branch-grid", note=note)


def annulus_covered(f: EntireFunction, source: Annulus, target: Annulus, tol: float = 1e-9) -> CoveringCertificate:
    """Best available certificate: boundary moduli first, then preimage grid."""
    cert = verify_annulus_covering(f, source, target, tol)
    if cert.verdict == "covers":
        return cert
    alt = branch_cover_certificate(f, source, target, tol=tol)
    return alt if alt.verdict == "covers" or cert.verdict == "indeterminate" else cert


def corollary_cover_choice(f: EntireFunction, t, S, S2, T, T2, tol: float = 1e-9, ceiling=None,
                           check_hypothesis: bool = True):
    """Which of A(S, S'), A(T, T') does f(A(r, 8r)) contain?  (log values)

    Returns (choice, cert_first, cert_second).  ``ceiling`` overrides the
    bound T' <= M(r) (log value) when the caller has a sharper one.
    """
    t = ext(t)
    S, S2, T, T2 = ext(S), ext(S2), ext(T), ext(T2)
    top = ext(ceiling) if ceiling is not None else mu(f, t)
    problems = []
    if not S > LOG2:
        problems.append("S > 2")
    if not S < S2:
        problems.append("S < S'")
    if not T < T2:
        problems.append("T < T'")
    if not T2 <= top:
        problems.append("T' <= M(r)")
    if not S2 <= T - LOG2:
        problems.append("S' <= T/2")
    if problems:
        raise PreconditionError("covering preconditions violated: " + ", ".join(problems))
    if check_hypothesis and find_small_min_modulus(f, t + LOG2, t + 2 * LOG2) is None:
        raise HypothesisFailed(["msmall"])
    src = Annulus(t, t + LOG8)
    c1 = branch_cover_certificate(f, src, Annulus(S, S2), tol=tol)
    c2 = branch_cover_certificate(f, src, Annulus(T, T2), tol=tol)
    a, b = c1.verdict == "covers", c2.verdict == "covers"
    if a and b:
        return "both", c1, c2
    if a:
        return "first", c1, c2
    if b:
        return "second", c1, c2
    raise NeitherCovered("neither target annulus is covered")


# ---------------------------------------------------------------------------
# zero counting


def _circle_winding(f: EntireFunction, t: float, n: int) -> float:
    th = np.arange(n) * (2 * np.pi / n)
    z = np.exp(t + 1j * th)
    with np.errstate(all="ignore"):
        q = f.deriv_np(z) / f.eval_np(z) * z
    return float(np.mean(q).real)


def _boundary_dip(f: EntireFunction, t: float, n: int = 4096) -> float:
    """Most negative drop of log|f| from a sample to its larger neighbour.

    A zero on (or very near) the circle shows up as a sharp dip.
    """
    th = np.arange(n) * (2 * np.pi / n)
    with np.errstate(all="ignore"):
        la = np.log(np.abs(f.eval_np(np.exp(t + 1j * th))))
    if not np.all(np.isfinite(la)):
        return -math.inf
    nb = np.maximum(np.roll(la, 1), np.roll(la, -1))
    return float(np.min(la - nb))


def count_zeros_annulus(f: EntireFunction, a: Annulus, tol: float = 1e-9, max_n: int = 1 << 20,
                        seed: int = 0) -> int:
    """Zeros of f in the annulus via the argument principle on both circles."""
    if f.eval_np is None or f.deriv_np is None:
        raise RangeExceeded("zero counting needs vectorised evaluation")
    t_in, t_out = float(a.t_in), float(a.t_out)
    if t_out > NP_LOG_LIMIT:
        raise RangeExceeded("annulus beyond float range")
    rng = random.Random(seed)
    radii = []
    for t0 in (t_in, t_out):
        tt = t0
        for _ in range(6):
            if _boundary_dip(f, tt) > -8.0:
                break
            tt = t0 + (rng.random() - 0.5) * 1e-4
        else:
            raise BoundaryZero(f"zero on or near |z| = e^{t0}")
        radii.append(tt)
    total = 0.0
    for tt, sign in ((radii[1], 1), (radii[0], -1)):
        n = 256
        prev = _circle_winding(f, tt, n)
        while True:
            n *= 2
            cur = _circle_winding(f, tt, n)
            if abs(cur - prev) < 1e-6 and abs(cur - round(cur)) < 0.1:
                break
            if n >= max_n:
                raise NonIntegerResidual(f"winding {cur} did not settle at {n} samples")
            prev = cur
        total += sign * cur
    k = round(total)
    if abs(total - k) >= 0.1:
        raise NonIntegerResidual(f"residual {abs(total - k):.3g}")
    return int(k)
