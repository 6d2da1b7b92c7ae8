"""annular-dyn command line: one subcommand per module, JSON or CSV out.

Exit codes: 0 success, 2 when a hypothesis or verdict fails (the report is
still written), 1 on errors.  A flat ``key = value`` file given with
``--config`` supplies defaults; flags override it.  ANNULAR_DYN_WORKERS sets
the process count for the moduli grid.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

from . import serialize as ser
from .annuli import (
    align_partition,
    build_Bn_sequence,
    build_mc_chain,
    gap_annuli,
    recurrence_residuals,
    zero_locating_indices,
)
from .covering import (
    DESK_RELAXED,
    Annulus,
    bohr_analyze,
    count_zeros_annulus,
    custom_profile,
    get_profile,
    harnack_analyze,
    verify_annulus_covering,
)
from .errors import AnnularDynError, HypothesisFailed, NoFeasibleR, RealizationFailed, Unrealizable
from .functions import get_function, make_affine_exp, make_monomial
from .moduli import circle_moduli, hadamard_check, mu
from .numbers import ctx, ext, set_precision
from .partition import build_partition, classify_fast_escaping, compute_itinerary, relabel_offset
from .realize import realize_itinerary, realize_prescribed
from .synthesis import (
    TransitionSystem,
    branching_witness,
    count_admissible,
    gen_bounded,
    gen_oscillating,
    gen_periodic,
    gen_slow_escape,
    load_rate_file,
    prescribed_rate_plan,
    rate_from_formula,
)

WORKERS_ENV = "ANNULAR_DYN_WORKERS"
PROFILE_KEYS = ("harnack_exponent", "chain_exponent", "bohr_exponent", "min_sqrt_log",
                "seed_width", "s_width", "t_gap")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def __init__(self, *a, **kw):
        kw.setdefault("allow_abbrev", False)
        super().__init__(*a, **kw)

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# config and shared option groups


def load_config(path) -> Dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _apply_config(sub: argparse.ArgumentParser, cfg: Dict[str, str]) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for k, v in cfg.items():
        if k not in actions:
            raise UsageError(f"unknown config key {k!r} for {sub.prog}")
        a = actions[k]
        if a.nargs == 0:
            defaults[k] = v.lower() in ("1", "true", "yes", "on")
        else:
            defaults[k] = a.type(v) if a.type is not None else v
    sub.set_defaults(**defaults)


def _common(p):
    p.add_argument("--config", help="key = value file with defaults for this command")
    p.add_argument("--prec", type=int, default=128, help="working precision in bits (>= 64)")
    p.add_argument("--out", help="output path (default stdout)")


def _fn_opts(p):
    p.add_argument("--fn", default="exp", help="exp | aexp_b | sin | cosh | zexp | monomial | series")
    p.add_argument("--a", type=complex, default=1.0, help="a for aexp_b")
    p.add_argument("--b", type=complex, default=0.0, help="b for aexp_b")
    p.add_argument("--d", type=int, default=2, help="degree for monomial")
    p.add_argument("--c", type=complex, default=1.0, help="coefficient for monomial")
    p.add_argument("--coeff-file", help="coefficient file for series")


def _profile_opts(p):
    p.add_argument("--profile", default=DESK_RELAXED.name, help="paper-strict | desk-relaxed")
    for k in PROFILE_KEYS:
        p.add_argument("--" + k.replace("_", "-"), type=float, default=None,
                       help="override this profile threshold (makes a custom profile)")


def _rate_opts(p):
    p.add_argument("--rate-formula", default="linear", help="linear | power | exp-linear")
    p.add_argument("--rate-file", help="file of 'n log_a_n' lines (overrides the formula)")
    p.add_argument("--rate-length", type=int, default=12)
    p.add_argument("--c0", type=float, default=2.0)
    p.add_argument("--c1", type=float, default=0.5)
    p.add_argument("--power", type=float, default=2.0)
    p.add_argument("--R0", type=float, default=None, help="log R0 lower bound for the rate")


def _function(args):
    if args.fn == "aexp_b":
        return make_affine_exp(args.a, args.b)
    if args.fn == "monomial":
        return make_monomial(args.d, args.c)
    if args.fn == "series":
        return get_function("series", coeff_file=args.coeff_file)
    return get_function(args.fn)


def _profile(args):
    base = get_profile(args.profile)
    over = {k: getattr(args, k) for k in PROFILE_KEYS if getattr(args, k) is not None}
    return custom_profile(base, **over) if over else base


def _rate(args):
    if args.rate_file:
        return load_rate_file(args.rate_file, args.R0)
    params = {"c0": args.c0, "c1": args.c1}
    if args.rate_formula == "power":
        params["p"] = args.power
    return rate_from_formula(args.rate_formula, args.rate_length, args.R0, **params)


def _floats(s: str) -> List[float]:
    return [float(x) for x in s.split(",") if x.strip()]


def _ints(s: str) -> List[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def _grid(spec: str) -> List[str]:
    """'a:b:step' inclusive, or a comma list; values kept as decimal strings."""
    if ":" in spec:
        a, b, h = (ctx.mpf(x) for x in spec.split(":"))
        if h <= 0:
            raise UsageError("grid step must be positive")
        n = int(ctx.nint((b - a) / h)) + 1
        return [ctx.nstr(a + i * h, 15) for i in range(n)]
    return [x.strip() for x in spec.split(",") if x.strip()]


def _write(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit(args, kind: str, body: dict) -> None:
    _write(args, ser.dumps(ser.document(kind, body)))


def _read_chain(path):
    return ser.chain_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# moduli


def _moduli_row(job):
    fn_doc, t, tol, prec = job
    set_precision(prec)
    f = ser.function_from_json(fn_doc)
    rm = circle_moduli(f, ctx.mpf(t), tol)
    return [t, rm.logM.to_str(15), rm.logm.to_str(15), repr(rm.tol), rm.n_samples, int(rm.zero_on_circle)]


def workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer") from None
    if n < 1:
        raise UsageError(f"{WORKERS_ENV} must be >= 1")
    return n


def cmd_moduli(args) -> int:
    f = _function(args)
    ts = _grid(args.t_grid)
    jobs = [(ser.function_json(f), t, args.tol, args.prec) for t in ts]
    n = workers()
    if n > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(_moduli_row, jobs))
    else:
        rows = [_moduli_row(j) for j in jobs]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "logM", "logm", "tol", "n_samples", "zero_on_circle"])
    w.writerows(rows)
    _write(args, buf.getvalue())
    status = 0
    if args.hadamard_k:
        rep = hadamard_check(f, [float(t) for t in ts], _floats(args.hadamard_k))
        body = {
            "function": ser.function_json(f),
            "empirical_R1": ser.num(rep.empirical_R1),
            "max_violation_above_R1": ser.num(rep.max_violation_above_R1()),
            "violations": [[ser.num(t), ser.num(k), ser.num(v)] for t, k, v in rep.violations],
            "growth": [[ser.num(t), ser.num(g)] for t, g in rep.growth],
            "range_exceeded": [[a, ser.num(t)] for a, t in rep.range_exceeded],
        }
        text = ser.dumps(ser.document("hadamard", body))
        if args.report:
            Path(args.report).write_text(text, encoding="utf-8")
        else:
            sys.stderr.write(text)
        if rep.empirical_R1 is None:
            status = 2
    return status


# ---------------------------------------------------------------------------
# partition and itinerary


def _partition_json(p):
    return {"logR": ser.ext_json(p.logR), "levels": [ser.ext_json(v) for v in p.levels],
            "depth": p.depth, "saturated_at": p.saturated_at, "top_open": p.top_open, "fn": p.fn_key}


def cmd_partition(args) -> int:
    f = _function(args)
    p = build_partition(f, ext(ctx.mpf(args.logR)), args.depth)
    _emit(args, "partition", _partition_json(p))
    return 0


def _itinerary_json(it):
    return {"symbols": it.symbols, "truncated": it.truncated, "reason": it.reason,
            "ambiguous": it.ambiguous, "log_abs": [ser.ext_json(v) for v in it.logmods],
            "transition_rule_holds": it.transition_rule_holds()}


def cmd_itinerary(args) -> int:
    f = _function(args)
    z = complex(args.z)
    p = build_partition(f, ext(ctx.mpf(args.logR)), args.depth)
    it = compute_itinerary(f, z, p, args.steps)
    body = {"function": ser.function_json(f), "z": [ser.num(z.real), ser.num(z.imag)],
            "partition": _partition_json(p), "itinerary": _itinerary_json(it)}
    if args.tail_window:
        try:
            body["fast_escaping_tail"] = classify_fast_escaping(it, args.tail_window)
        except ValueError as exc:
            body["fast_escaping_tail"] = None
            body["note"] = str(exc)
    status = 0 if it.transition_rule_holds() else 2
    if args.logR2 is not None:
        p2 = build_partition(f, ext(ctx.mpf(args.logR2)), args.depth)
        it2 = compute_itinerary(f, z, p2, args.steps)
        body["itinerary_R2"] = _itinerary_json(it2)
        try:
            body["relabel_offset"] = relabel_offset(it, it2)
        except AnnularDynError as exc:
            body["relabel_offset"] = None
            body["relabel_error"] = str(exc)
            status = 2
    _emit(args, "itinerary", body)
    return status


# ---------------------------------------------------------------------------
# covering


def _pair(s: str) -> Annulus:
    a, b = s.split(",")
    return Annulus(ext(ctx.mpf(a)), ext(ctx.mpf(b)))


def cmd_covering(args) -> int:
    f = _function(args)
    body = {"function": ser.function_json(f), "test": args.test}
    status = 0
    if args.test == "annulus":
        cert = verify_annulus_covering(f, _pair(args.source), _pair(args.target), args.tol)
        body["certificate"] = ser.certificate_json(cert)
        status = 0 if cert.verdict == "covers" else 2
    elif args.test == "harnack":
        rep = harnack_analyze(f, ctx.mpf(args.t), args.k, _profile(args), tol=args.tol)
        body["harnack"] = {
            "t": ser.num(rep.t), "k": ser.num(rep.k), "delta": ser.num(rep.delta), "profile": rep.profile,
            "hypotheses": {"delta": rep.hyp_delta, "delta_c": rep.hyp_delta_c, "M_big": rep.hyp_mbig},
            "part_a_margin": ser.num(rep.part_a_margin),
            "logR_out": None if rep.logR_out is None else ser.ext_json(rep.logR_out),
            "K": ser.num(rep.K), "K_lower": ser.num(rep.K_lower),
            "outer_certificate": ser.certificate_json(rep.outer_cert), "inside_ok": rep.inside_ok,
        }
        hyp = rep.hyp_delta and rep.hyp_delta_c and rep.hyp_mbig
        ok = hyp and (rep.part_a_margin is None or rep.part_a_margin >= 0)
        if rep.outer_cert is not None:
            ok = ok and rep.outer_cert.verdict == "covers"
        status = 0 if ok else 2
    elif args.test == "bohr":
        rep = bohr_analyze(f, ctx.mpf(args.t), args.grid, args.C0, args.C1)
        body["bohr"] = {
            "t": ser.num(rep.t), "s_witness": ser.ext_json(rep.s_witness), "grid_size": rep.grid_size,
            "uncovered": [ser.point_json(z) for z in rep.uncovered],
            "indeterminate": [ser.point_json(z) for z in rep.indeterminate],
            "w1_estimate": ser.point_json(rep.w1_estimate),
            "eps_bound": ser.num(rep.eps_bound), "verdict": rep.verdict,
            "log_w_min": ser.num(rep.log_w_min), "log_w_max": ser.num(rep.log_w_max),
        }
        if args.uncovered_csv:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["log_abs_w", "arg_w"])
            for z in rep.uncovered:
                w.writerow([ext(z.log_abs()).to_str(15), ctx.nstr(z.argument(), 15)])
            Path(args.uncovered_csv).write_text(buf.getvalue(), encoding="utf-8")
        status = 0 if rep.verdict != "violation" else 2
    elif args.test == "zeros":
        body["zeros"] = count_zeros_annulus(f, _pair(args.source), args.tol)
    _emit(args, "covering", body)
    return status


# ---------------------------------------------------------------------------
# annuli


def cmd_annuli(args) -> int:
    f = _function(args)
    prof = _profile(args)
    t0 = ext(ctx.mpf(args.t0))
    try:
        if args.mode == "MC":
            chain = build_mc_chain(f, t0, args.n_max, prof)
        else:
            chain = build_Bn_sequence(f, t0, args.n_max, prof, prefer=args.prefer, allow_mc=args.allow_mc)
    except HypothesisFailed as exc:
        _emit(args, "annuli", {"function": ser.function_json(f), "profile": prof.as_dict(),
                               "error": "hypothesis-failed", "detail": str(exc)})
        return 2
    status = 0 if chain.all_cover() else 2
    try:
        al = align_partition(chain, f)
    except NoFeasibleR as exc:
        al = None
        status = 2
        note = str(exc)
    else:
        note = ""
    body = ser.chain_json(chain, f, al)
    body["profile_values"] = prof.as_dict()
    body["recurrence"] = [[ser.num(a), ser.num(b)] for a, b in recurrence_residuals(f, chain)]
    if note:
        body["alignment_note"] = note
    if args.mode == "MC":
        try:
            g = gap_annuli(chain, f)
            body["gap_annuli"] = [ser.annulus_json(a) for a in g.entries]
            body["interleaving_ok"] = g.interleaving_ok
            body["zero_locating"] = zero_locating_indices(f, g)
        except AnnularDynError as exc:
            body["gap_annuli"] = None
            body["gap_note"] = f"{type(exc).__name__}: {exc}"
            status = 2
    _emit(args, "annuli", body)
    return status


# ---------------------------------------------------------------------------
# synthesis


def _transition_system(args, chain):
    if chain is not None:
        return TransitionSystem(list(chain.n_j), [set(s) for s in chain.I_j], args.horizon, args.index_by)
    I = [set(_ints(x)) for x in args.I_j.split(";")] if args.I_j else []
    return TransitionSystem(_ints(args.n_j or ""), I, args.horizon, args.index_by)


def cmd_synthesize(args) -> int:
    chain, f, logR = _read_chain(args.chain) if args.chain else (None, None, None)
    ts = _transition_system(args, chain)
    body = {"kind": args.kind, "transition_system": {"n_j": ts.n_j, "I_j": [sorted(s) for s in ts.I_j],
                                                     "index_by": ts.index_by, "horizon": ts.horizon}}
    length = args.length
    try:
        if args.kind == "periodic":
            body["sequence"] = gen_periodic(ts, args.period, args.s_min, length)
        elif args.kind == "bounded":
            body["sequences"] = gen_bounded(ts, args.s_min, args.s_max, args.count, length)
        elif args.kind == "oscillating":
            osc = gen_oscillating(ts, args.s_min, _ints(args.peaks), length)
            body.update({"sequence": osc.seq, "peaks": osc.peaks, "returns": osc.returns,
                         "peaks_grow": osc.peaks_grow})
        elif args.kind == "count":
            body["count"] = count_admissible(ts, length, args.s0, args.cap)
        elif args.kind in ("slow", "plan", "branching"):
            if chain is None:
                raise UsageError(f"{args.kind} needs --chain")
            rate = _rate(args)
            mu_fn = lambda t: mu(f, t)
            body["rate"] = {"formula": rate.formula, "log_a": [ser.ext_json(v) for v in rate.log_a]}
            if args.kind == "slow":
                if logR is None:
                    raise UsageError("chain file has no aligned logR")
                part = build_partition(f, logR, length or len(chain.entries) + 1)
                se = gen_slow_escape(ts, rate, part, length)
                body.update({"sequence": se.seq, "loiter_lengths": se.loiter_lengths,
                             "first_loiter_end": se.first_loiter_end, "truncated": se.truncated})
            elif args.kind == "plan":
                plan = prescribed_rate_plan(rate, chain, args.mode, mu_fn, args.eps, length)
                body["plan"] = ser.plan_json(plan)
                if not plan.valid:
                    _emit(args, "synthesis", body)
                    return 2
            else:
                levels = None
                if logR is not None:
                    levels = build_partition(f, logR, len(chain.entries) + 1).levels
                prefixes = branching_witness(rate, args.depth, chain, args.mode, levels, length)
                body["prefixes"] = prefixes
                body["distinct"] = len({tuple(p) for p in prefixes})
    except Unrealizable as exc:
        body["unrealizable"] = {"message": str(exc), "witness": getattr(exc, "witness", None)}
        _emit(args, "synthesis", body)
        return 2
    _emit(args, "synthesis", body)
    return 0


# ---------------------------------------------------------------------------
# realization


def cmd_realize(args) -> int:
    chain, f, logR = _read_chain(args.chain)
    if args.logR is not None:
        logR = ext(ctx.mpf(args.logR))
    if logR is None:
        raise UsageError("chain file has no aligned logR; pass --logR")
    if not chain.all_cover():
        raise UsageError("chain has covering certificates that do not cover")
    seq = _ints(args.seq)
    try:
        r = realize_itinerary(f, chain, logR, seq, args.depth, seeds=args.seeds, tol=args.tol, strict=True)
    except RealizationFailed as exc:
        r = exc.partial
    _emit(args, "realization", ser.realization_json(r))
    return 0 if r.complete else 2


def cmd_prescribed(args) -> int:
    chain, f, logR = _read_chain(args.chain)
    if logR is None:
        raise UsageError("chain file has no aligned logR")
    rate = _rate(args)
    mu_fn = lambda t: mu(f, t)
    plan = prescribed_rate_plan(rate, chain, args.mode, mu_fn, args.eps)
    if not plan.valid:
        _emit(args, "prescribed", {"plan": ser.plan_json(plan), "error": "plan-invalid"})
        return 2
    res = realize_prescribed(f, chain, logR, plan, rate, args.depth, seeds=args.seeds, tol=args.tol)
    body = {
        "rate": {"formula": rate.formula, "log_a": [ser.ext_json(v) for v in rate.log_a]},
        "plan": ser.plan_json(plan),
        "realization": ser.realization_json(res.realization),
        "lower_margins": [ser.num(m) for m in res.lower_margins],
        "upper_checks": [{"n": c["n"], "log_abs": ser.ext_json(c["logmod"]), "bound": ser.ext_json(c["bound"]),
                          "ok": c["ok"]} for c in res.upper_checks],
        "bound_kind": res.bound_kind,
        "lower_ok": res.lower_ok,
        "upper_ok": res.upper_ok,
    }
    _emit(args, "prescribed", body)
    ok = res.realization.complete and res.lower_ok and res.upper_ok
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# parser


def build_parser():
    p = Parser(prog="annular-dyn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=Parser)
    subs = {}

    s = sub.add_parser("moduli", help="log M and log m on a grid of log-radii (CSV)")
    _common(s)
    _fn_opts(s)
    s.add_argument("--t-grid", default="0.5:6:0.5", help="a:b:step or comma list of log-radii")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--hadamard-k", help="comma list of k > 1: also run the growth checks")
    s.add_argument("--report", help="path for the growth-check JSON (default stderr)")
    s.set_defaults(func=cmd_moduli)
    subs["moduli"] = s

    s = sub.add_parser("partition", help="annular partition levels for log R")
    _common(s)
    _fn_opts(s)
    s.add_argument("--logR", required=False, default="1")
    s.add_argument("--depth", type=int, default=8)
    s.set_defaults(func=cmd_partition)
    subs["partition"] = s

    s = sub.add_parser("itinerary", help="annular itinerary of one point")
    _common(s)
    _fn_opts(s)
    s.add_argument("--z", default="1", help="starting point, e.g. 1+2j")
    s.add_argument("--logR", default="1")
    s.add_argument("--logR2", default=None, help="second log R: report the relabeling offset")
    s.add_argument("--depth", type=int, default=8)
    s.add_argument("--steps", type=int, default=8)
    s.add_argument("--tail-window", type=int, default=0)
    s.set_defaults(func=cmd_itinerary)
    subs["itinerary"] = s

    s = sub.add_parser("covering", help="covering certificates and theorem checks")
    _common(s)
    _fn_opts(s)
    _profile_opts(s)
    s.add_argument("--test", default="annulus", choices=("annulus", "harnack", "bohr", "zeros"))
    s.add_argument("--source", default="1,2", help="log-radii 'in,out' of the source annulus")
    s.add_argument("--target", default="0,3", help="log-radii 'in,out' of the target annulus")
    s.add_argument("--t", default="2", help="log r for the harnack and bohr tests")
    s.add_argument("--k", type=float, default=2.0)
    s.add_argument("--grid", type=int, default=64)
    s.add_argument("--C0", type=float, default=20.0)
    s.add_argument("--C1", type=float, default=50.0)
    s.add_argument("--uncovered-csv", help="bohr: write the uncovered grid values here")
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_covering)
    subs["covering"] = s

    s = sub.add_parser("annuli", help="chain of annuli, each covering the next (JSON)")
    _common(s)
    _fn_opts(s)
    _profile_opts(s)
    s.add_argument("--t0", default="2", help="log r_0")
    s.add_argument("--n-max", type=int, default=5)
    s.add_argument("--prefer", default="S", choices=("S", "T"))
    s.add_argument("--mode", default="noMC", choices=("noMC", "MC"))
    s.add_argument("--allow-mc", action="store_true")
    s.set_defaults(func=cmd_annuli)
    subs["annuli"] = s

    s = sub.add_parser("synthesize", help="admissible itineraries, rate plans and branching")
    _common(s)
    _rate_opts(s)
    s.add_argument("--chain", help="chain JSON from the annuli command")
    s.add_argument("--n-j", default=None, help="backjump indices when no chain is given")
    s.add_argument("--I-j", dest="I_j", default=None, help="exception sets, ';'-separated")
    s.add_argument("--index-by", default="state", choices=("time", "state"))
    s.add_argument("--horizon", type=int, default=64)
    s.add_argument("--kind", default="periodic",
                   choices=("periodic", "bounded", "oscillating", "count", "slow", "plan", "branching"))
    s.add_argument("--length", type=int, default=None)
    s.add_argument("--period", type=int, default=3)
    s.add_argument("--s-min", type=int, default=0)
    s.add_argument("--s-max", type=int, default=3)
    s.add_argument("--s0", type=int, default=0)
    s.add_argument("--cap", type=int, default=4)
    s.add_argument("--count", type=int, default=8)
    s.add_argument("--peaks", default="2,3,4")
    s.add_argument("--mode", default="noMC", choices=("noMC", "MC"))
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--depth", type=int, default=4)
    s.set_defaults(func=cmd_synthesize)
    subs["synthesize"] = s

    s = sub.add_parser("realize", help="point with a prescribed annulus sequence")
    _common(s)
    s.add_argument("--chain", required=False, help="chain JSON from the annuli command")
    s.add_argument("--seq", default="0,1,2,0,1,2")
    s.add_argument("--depth", type=int, default=None)
    s.add_argument("--logR", default=None)
    s.add_argument("--seeds", type=int, default=8)
    s.add_argument("--tol", type=float, default=1e-8)
    s.set_defaults(func=cmd_realize)
    subs["realize"] = s

    s = sub.add_parser("prescribed", help="point escaping at a prescribed rate")
    _common(s)
    _rate_opts(s)
    s.add_argument("--chain", required=False)
    s.add_argument("--mode", default="noMC", choices=("noMC", "MC"))
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--depth", type=int, default=4)
    s.add_argument("--seeds", type=int, default=8)
    s.add_argument("--tol", type=float, default=1e-8)
    s.set_defaults(func=cmd_prescribed)
    subs["prescribed"] = s
    return p, subs


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
        pre.add_argument("command", nargs="?")
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        if known.config and known.command in subs:
            _apply_config(subs[known.command], load_config(known.config))
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return 1
        if args.command in ("realize", "prescribed") and not args.chain:
            raise UsageError(f"{args.command} needs --chain")
        set_precision(args.prec)
        try:
            return args.func(args)
        except HypothesisFailed as exc:
            _emit(args, args.command, {"error": "hypothesis-failed", "detail": str(exc)})
            print(f"annular-dyn: hypothesis failed: {exc}", file=sys.stderr)
            return 2
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (AnnularDynError, ValueError, OSError) as exc:
        print(f"annular-dyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
