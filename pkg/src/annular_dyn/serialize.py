"""JSON encoding of reports and chains.

Extended reals are written twice: a readable decimal string and an exact
binary form ``[-]0x<mantissa>p<exponent>`` which round-trips at any
precision (decimal parsing of a value like exp(5.8e702) is not feasible).
Floats are rounded to 12 significant digits so that output is byte-stable.
"""

from __future__ import annotations

import json
import math
from typing import Any, Dict, Optional

from mpmath.libmp import from_man_exp

from .annuli import AnnuliChain, Alignment, ChainEntry
from .covering import Annulus, CoveringCertificate
from .functions import EntireFunction, make_affine_exp, make_monomial, make_series, get_function
from .numbers import ComplexPoint, ExtLogReal, ctx, ext

SCHEMA = "annular-dyn/1"
DIGITS = 17
FLOAT_DIGITS = 12


def num(x) -> Any:
    """A float rounded for stable output; non-finite values become strings."""
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    if isinstance(x, int):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{FLOAT_DIGITS}g}")


def mpf_exact(v) -> str:
    if not hasattr(v, "_mpf_"):
        v = ctx.mpf(v)
    if ctx.isinf(v):
        return "+inf" if v > 0 else "-inf"
    sign, man, exp, _ = v._mpf_
    if not man:
        return "0"
    return f"{'-' if sign else ''}0x{man:x}p{exp}"


def mpf_from_exact(s: str):
    if s in ("+inf", "inf"):
        return ctx.inf
    if s == "-inf":
        return -ctx.inf
    if s == "0":
        return ctx.mpf(0)
    neg = s.startswith("-")
    body = s[1:] if neg else s
    man_s, exp_s = body[2:].split("p")
    man = int(man_s, 16)
    return ctx.make_mpf(from_man_exp(-man if neg else man, int(exp_s)))


def _exact_bits(s: str) -> int:
    if not s.lstrip("-").startswith("0x"):
        return 0
    return int(s.lstrip("-")[2:].split("p")[0], 16).bit_length()


def _doc_bits(d) -> int:
    """Widest mantissa among the exact numbers of a JSON tree."""
    if isinstance(d, dict):
        return max([_doc_bits(v) for v in d.values()] + [0])
    if isinstance(d, list):
        return max([_doc_bits(v) for v in d] + [0])
    if isinstance(d, str):
        return _exact_bits(d)
    return 0


def ext_json(x) -> Dict[str, Any]:
    x = ext(x)
    if x.saturated:
        tag = "+sat" if x.value > 0 else "-sat"
        return {"dec": tag, "exact": tag}
    return {"dec": x.to_str(DIGITS), "exact": mpf_exact(x.value)}


def ext_from_json(d) -> ExtLogReal:
    if isinstance(d, (int, float, str)) and not isinstance(d, dict):
        return ext(ctx.mpf(d))
    tag = d["exact"]
    if tag == "+sat":
        return ExtLogReal.saturated_above()
    if tag == "-sat":
        return ExtLogReal.saturated_below()
    return ExtLogReal(mpf_from_exact(tag))


def mpf_json(v) -> Dict[str, Any]:
    return {"dec": ctx.nstr(v if hasattr(v, "_mpf_") else ctx.mpf(v), DIGITS), "exact": mpf_exact(v)}


def point_json(z: Optional[ComplexPoint]) -> Optional[Dict[str, Any]]:
    if z is None:
        return None
    out: Dict[str, Any] = {"log_abs": ext_json(z.log_abs())}
    a = z.argument()
    out["arg"] = None if a is None else mpf_json(a)
    if z.is_plain:
        out["re"] = mpf_json(z.z.real)
        out["im"] = mpf_json(z.z.imag)
    return out


def point_from_json(d) -> ComplexPoint:
    with ctx.workprec(max(ctx.prec, _doc_bits(d))):
        return _point_from_json(d)


def _point_from_json(d) -> ComplexPoint:
    if "re" in d:
        return ComplexPoint(z=ctx.mpc(mpf_from_exact(d["re"]["exact"]), mpf_from_exact(d["im"]["exact"])))
    arg = None if d.get("arg") is None else mpf_from_exact(d["arg"]["exact"])
    return ComplexPoint.from_polar(ext_from_json(d["log_abs"]).value, arg)


# ---------------------------------------------------------------------------
# functions


def function_json(f: EntireFunction) -> Dict[str, Any]:
    return {"id": f.id, "key": f.key, "params": {k: v for k, v in f.params}, "mc_declared": f.mc_declared}


def function_from_json(d) -> EntireFunction:
    fid, params = d["id"], dict(d.get("params", {}))
    if fid == "aexp_b":
        return make_affine_exp(complex(params.get("a", 1.0)), complex(params.get("b", 0.0)))
    if fid == "monomial":
        return make_monomial(int(params.get("d", 2)), complex(params.get("c", 1.0)))
    if fid == "series":
        return make_series([complex(c) for c in str(params["coeffs"]).split(";")])
    return get_function(fid)


# ---------------------------------------------------------------------------
# reports


def annulus_json(a: Annulus) -> Dict[str, Any]:
    out = {"t_in": ext_json(a.t_in), "t_out": ext_json(a.t_out)}
    if a.rel_width is not None:
        out["rel_width"] = mpf_json(a.rel_width)
    return out


def certificate_json(c: Optional[CoveringCertificate]) -> Optional[Dict[str, Any]]:
    if c is None:
        return None
    if isinstance(c, StoredCertificate):
        return dict(c.data)
    return {
        "source": annulus_json(c.source),
        "target": annulus_json(c.target),
        "inner_logM": None if c.inner_logM is None else ext_json(c.inner_logM),
        "outer_logm": None if c.outer_logm is None else ext_json(c.outer_logm),
        "margin": num(c.margin),
        "verdict": c.verdict,
        "method": c.method,
        "inner_exact": c.inner_exact,
        "note": c.note,
    }


def entry_json(e: ChainEntry) -> Dict[str, Any]:
    return {"t": ext_json(e.t), "k_minus_1": mpf_json(e.k_minus_1), "origin": e.origin,
            "t_outer": ext_json(e.t_outer)}


def chain_json(chain: AnnuliChain, f: EntireFunction, alignment: Optional[Alignment] = None) -> Dict[str, Any]:
    out = {
        "function": function_json(f),
        "profile": chain.profile,
        "mode": chain.mode,
        "terminal": chain.terminal,
        "entries": [entry_json(e) for e in chain.entries],
        "n_j": list(chain.n_j),
        "I_j": [sorted(s) for s in chain.I_j],
        "certificates": [certificate_json(c) for c in chain.certs],
        "all_cover": chain.all_cover(),
        "witnesses": [ext_json(w) for w in chain.witnesses],
        "past_coverage": [[certificate_json(c) for c in row] for row in chain.past_coverage],
    }
    if alignment is not None:
        out["alignment"] = alignment_json(alignment)
    return out


class StoredCertificate:
    """A certificate read back from JSON: the verdict plus the stored fields."""

    def __init__(self, data: Dict[str, Any]):
        self.data = data
        self.verdict = data["verdict"]


def chain_from_json(d) -> tuple:
    """(chain, function, logR or None) from chain_json output."""
    f = function_from_json(d["function"])
    with ctx.workprec(max(ctx.prec, _doc_bits(d))):
        return _chain_from_json(d, f)


def _chain_from_json(d, f) -> tuple:
    entries = [ChainEntry(ext_from_json(e["t"]), mpf_from_exact(e["k_minus_1"]["exact"]), e["origin"])
               for e in d["entries"]]
    chain = AnnuliChain(
        entries=entries,
        n_j=list(d.get("n_j", [])),
        I_j=[set(s) for s in d.get("I_j", [])],
        certs=[StoredCertificate(c) if c else None for c in d.get("certificates", [])],
        profile=d.get("profile", ""),
        fn_key=f.key,
        terminal=d.get("terminal", "budget"),
        witnesses=[ext_from_json(w) for w in d.get("witnesses", [])],
        past_coverage=[[StoredCertificate(c) for c in row] for row in d.get("past_coverage", [])],
        mode=d.get("mode", "noMC"),
    )
    logR = None
    if "alignment" in d:
        logR = ext_from_json(d["alignment"]["logR"])
    return chain, f, logR


def alignment_json(al: Alignment) -> Dict[str, Any]:
    return {"logR": ext_json(al.logR), "lower": ext_json(al.lower), "upper": ext_json(al.upper),
            "checked": list(al.checked)}


def realization_json(r) -> Dict[str, Any]:
    return {
        "point": point_json(r.point),
        "requested": list(r.requested),
        "verified_len": r.verified_len,
        "complete": r.complete,
        "residuals": [num(x) for x in r.residuals],
        "symbols": list(r.symbols),
        "orbit_log_abs": [ext(x).to_str(DIGITS) for x in r.orbit_logmods],
        "precision_bits": r.precision,
        "newton_stats": {k: r.newton_stats[k] for k in sorted(r.newton_stats)},
        "reason": r.reason,
    }


def plan_json(p) -> Dict[str, Any]:
    return {
        "targets": list(p.targets),
        "n_j": list(p.n_j_out),
        "bound_kind": p.bound_kind,
        "mode": p.mode,
        "eps": num(p.eps),
        "valid": p.valid,
        "lower_ok": list(p.lower_ok),
        "upper_ok": list(p.upper_ok),
        "least_ok": list(p.least_ok),
        "note": p.note,
    }


def document(kind: str, body: Dict[str, Any]) -> Dict[str, Any]:
    out = {"schema": SCHEMA, "kind": kind}
    out.update(body)
    return out


def dumps(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
