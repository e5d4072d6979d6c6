"""Certificates: replayable deduction steps, the independent verifier, and JSON I/O.

A certificate proves ``target >= 0`` for every real assignment of its FUNC and
SLACK variables satisfying the declared hypotheses.  Each step carries a
claimed polynomial that is nonnegative on that set; the verifier recomputes
every claim from the step's arguments and never trusts the stored value.

Step kinds (``claim`` is what the step asserts to be >= 0):

- ``SQUARE(poly)``: poly**2.
- ``HYPOTHESIS(name)``: a declared hypothesis polynomial.
- ``ADD(a, b)``, ``MUL(a, b)``, ``SCALAR_MUL(a, c > 0)``.
- ``SUBSTITUTE(a, table)``: variables replaced by polynomials; only allowed on
  *pure* steps (built from squares alone), which hold for all real values.
- ``DEFINE_AUX(var, K, R)``: introduces a fresh AUX variable as the nonnegative
  K-th root of R.  R must be nonzero with positive coefficients and even
  exponents, so the root exists and is positive off a thin set.  The claim is
  the equation var**K - R, which is not itself a usable fact.
- ``REWRITE(a, eqs)``: claim(a) + sum mult * (var**K - R) for defined vars.
- ``DIVIDE(a, d)``: claim(a) / d for d = c * monomial, c > 0, with AUX
  variables to any power and other variables to even powers.  d is positive
  on a dense subset of the admissible set and the quotient is continuous, so
  nonnegativity passes to the limit.
- ``CONCLUDE(S1, S2, from, eqs)``: checks
  S1 * target - S2 - claim(from) - sum mult * eq == 0  with S1, S2 weighted
  sums of squares and S1 containing a nonzero constant square (so S1 > 0).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .datum import BLDatum
from .exactalg import fmt_frac
from .polyring import (AUX, FUNC_ROOT, GADGET, SLACK, Polynomial, SosExpr, VarId,
                       parse_poly, parse_var)

KINDS = ("SQUARE", "HYPOTHESIS", "ADD", "MUL", "SCALAR_MUL", "SUBSTITUTE",
         "DEFINE_AUX", "REWRITE", "DIVIDE", "CONCLUDE")


class CertificateFormatError(ValueError):
    pass


@dataclass
class Step:
    kind: str
    args: dict
    claim: Polynomial

    def to_json(self) -> dict:
        return {"kind": self.kind, "args": _args_json(self.kind, self.args), "claim": self.claim.to_str()}


@dataclass
class Certificate:
    steps: list
    hypotheses: dict  # name -> Polynomial
    target: Polynomial
    s: int = 1
    s_list: tuple = ()
    p: tuple = ()
    datum_digest: str | None = None
    func_powers: tuple = ()
    slack_powers: tuple = ()
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "datum_digest": self.datum_digest,
            "s": self.s,
            "s_list": list(self.s_list),
            "p": [fmt_frac(Fraction(x)) for x in self.p],
            "func_powers": list(self.func_powers),
            "slack_powers": list(self.slack_powers),
            "hypotheses": [{"name": k, "poly": v.to_str()} for k, v in sorted(self.hypotheses.items())],
            "target": self.target.to_str(),
            "steps": [st.to_json() for st in self.steps],
            "meta": self.meta,
        }


def _args_json(kind: str, args: dict) -> dict:
    out = {}
    for k, v in args.items():
        if isinstance(v, Polynomial):
            out[k] = v.to_str()
        elif isinstance(v, SosExpr):
            out[k] = v.to_json()
        elif isinstance(v, Fraction):
            out[k] = fmt_frac(v)
        elif k == "table":
            out[k] = {str(var): poly.to_str() for var, poly in sorted(v.items(), key=lambda t: t[0].key())}
        elif k == "eqs":
            out[k] = [[str(var), poly.to_str()] for var, poly in v]
        elif isinstance(v, VarId):
            out[k] = str(v)
        else:
            out[k] = v
    return out


def serialize(cert: Certificate) -> bytes:
    return (json.dumps(cert.to_json(), sort_keys=True, indent=1) + "\n").encode()


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise CertificateFormatError(f"{where}: missing field {key!r}")
    return d[key]


def _parse_args(kind: str, raw: dict, where: str) -> dict:
    a: dict[str, Any] = {}
    try:
        if kind == "SQUARE":
            a["poly"] = parse_poly(_need(raw, "poly", where))
        elif kind == "HYPOTHESIS":
            a["name"] = str(_need(raw, "name", where))
        elif kind in ("ADD", "MUL"):
            a["a"], a["b"] = int(_need(raw, "a", where)), int(_need(raw, "b", where))
        elif kind == "SCALAR_MUL":
            a["a"], a["c"] = int(_need(raw, "a", where)), Fraction(_need(raw, "c", where))
        elif kind == "SUBSTITUTE":
            a["a"] = int(_need(raw, "a", where))
            a["table"] = {parse_var(k): parse_poly(v) for k, v in _need(raw, "table", where).items()}
        elif kind == "DEFINE_AUX":
            a["var"] = parse_var(_need(raw, "var", where))
            a["power"] = int(_need(raw, "power", where))
            a["defn"] = parse_poly(_need(raw, "defn", where))
        elif kind == "REWRITE":
            a["a"] = int(_need(raw, "a", where))
            a["eqs"] = [(parse_var(v), parse_poly(q)) for v, q in _need(raw, "eqs", where)]
        elif kind == "DIVIDE":
            a["a"] = int(_need(raw, "a", where))
            a["divisor"] = parse_poly(_need(raw, "divisor", where))
        elif kind == "CONCLUDE":
            a["s1"] = SosExpr.from_json(_need(raw, "s1", where))
            a["s2"] = SosExpr.from_json(_need(raw, "s2", where))
            src = raw.get("from")
            a["from"] = None if src is None else int(src)
            a["eqs"] = [(parse_var(v), parse_poly(q)) for v, q in raw.get("eqs", [])]
    except (ValueError, TypeError) as exc:
        raise CertificateFormatError(f"{where}: {exc}") from exc
    return a


def deserialize(data: bytes | str) -> Certificate:
    text = data.decode() if isinstance(data, bytes) else data
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateFormatError(
            f"malformed certificate at line {exc.lineno} col {exc.colno}: {exc.msg}; "
            "no CONCLUDE step could be read (truncated file?)") from exc
    if not isinstance(raw, dict):
        raise CertificateFormatError("certificate must be a JSON object")
    hyps = {}
    for h in raw.get("hypotheses", []):
        hyps[str(h["name"])] = parse_poly(h["poly"])
    steps_raw = _need(raw, "steps", "certificate")
    if not steps_raw or steps_raw[-1].get("kind") != "CONCLUDE":
        raise CertificateFormatError("certificate is missing its final CONCLUDE step")
    steps = []
    for i, st in enumerate(steps_raw):
        where = f"step {i}"
        kind = _need(st, "kind", where)
        if kind not in KINDS:
            raise CertificateFormatError(f"{where}: unknown kind {kind!r}")
        if kind == "CONCLUDE" and i != len(steps_raw) - 1:
            raise CertificateFormatError(f"{where}: CONCLUDE must be the last step")
        args = _parse_args(kind, _need(st, "args", where), where)
        for key in ("a", "b", "from"):
            ref = args.get(key)
            if ref is not None and not 0 <= ref < i:
                raise CertificateFormatError(f"{where}: reference {ref} does not point to an earlier step")
        if kind == "HYPOTHESIS" and args["name"] not in hyps:
            raise CertificateFormatError(f"{where}: undeclared hypothesis {args['name']!r}")
        try:
            claim = parse_poly(_need(st, "claim", where))
        except ValueError as exc:
            raise CertificateFormatError(f"{where}: {exc}") from exc
        steps.append(Step(kind, args, claim))
    try:
        target = parse_poly(_need(raw, "target", "certificate"))
    except ValueError as exc:
        raise CertificateFormatError(f"target: {exc}") from exc
    return Certificate(
        steps=steps, hypotheses=hyps, target=target,
        s=int(raw.get("s", 1)), s_list=tuple(raw.get("s_list", ())),
        p=tuple(Fraction(x) for x in raw.get("p", ())),
        datum_digest=raw.get("datum_digest"),
        func_powers=tuple(raw.get("func_powers", ())),
        slack_powers=tuple(raw.get("slack_powers", ())),
        meta=raw.get("meta", {}),
    )


# -- degree bound --------------------------------------------------------------

def degree_bound(n: int, m: int, s: int, s_list) -> int:
    """ceil(n^m m^(m/2)) + s * sum(s_j), computed exactly."""
    if m % 2 == 0:
        head = n ** m * m ** (m // 2)
    else:
        # ceil(a * sqrt(m)) = ceil(sqrt(a^2 m))
        a = n ** m * m ** ((m - 1) // 2)
        big = a * a * m
        head = 0 if big == 0 else math.isqrt(big - 1) + 1
    return head + s * sum(s_list)


@dataclass
class DegreeReport:
    max_degree: int
    per_step: list
    theorem_bound: int | None
    slack_factor: Fraction
    within_bound: bool | None

    def to_json(self) -> dict:
        return {"max_degree": self.max_degree, "theorem_bound": self.theorem_bound,
                "slack_factor": fmt_frac(Fraction(self.slack_factor)),
                "within_bound": self.within_bound, "steps": len(self.per_step)}


@dataclass
class Verdict:
    accepted: bool
    report: DegreeReport | None = None
    step: int | None = None
    reason: str = ""

    def to_json(self) -> dict:
        if self.accepted:
            return {"verdict": "ACCEPT", "degree": self.report.to_json()}
        return {"verdict": "REJECT", "step": self.step, "reason": self.reason}


# -- the datum's own inequality --------------------------------------------------

def func_var(j: int, y) -> VarId:
    return VarId(FUNC_ROOT, j, tuple(int(c) for c in y))


def slack_var(j: int) -> VarId:
    return VarId(SLACK, j)


def datum_target(datum: BLDatum, func_powers, slack_powers) -> tuple[Polynomial, dict]:
    """RHS^s - LHS^s of the datum with f_j = F_j^K_j and sup f_j = T_j^KT_j.

    Returns the target and the hypotheses T_j^KT_j - F_j(y)^K_j >= 0 for p_j = 0.
    """
    ev = datum.exponents
    s, sl = ev.s, ev.s_list
    rhs = Polynomial.const(1)
    hyps = {}
    for j in range(datum.m):
        k = func_powers[j]
        ys = datum.image_points(j)
        if datum.p[j] > 0:
            e = Fraction(k * s, sl[j])
            if e.denominator != 1:
                raise ValueError(f"func power {k} does not clear the exponent of f_{j}")
            rhs = rhs * sum((Polynomial.monomial(((func_var(j, y), int(e)),)) for y in ys), Polynomial()) ** sl[j]
        else:
            t = slack_var(j)
            rhs = rhs * Polynomial.monomial(((t, slack_powers[j] * s),))
            for y in ys:
                hyps[f"sup{j}[{','.join(str(int(c)) for c in y)}]"] = (
                    Polynomial.monomial(((t, slack_powers[j]),)) - Polynomial.monomial(((func_var(j, y), k),)))
    lhs = Polynomial()
    for x in datum.points():
        term = ()
        pairs = [(func_var(j, datum.image(j, x)), func_powers[j]) for j in range(datum.m)]
        lhs = lhs + Polynomial.monomial(tuple(sorted(pairs, key=lambda t: t[0].key())) if pairs else term)
    return rhs - lhs ** s, hyps


# -- verifier ----------------------------------------------------------------------

class _Reject(Exception):
    def __init__(self, step, reason):
        super().__init__(reason)
        self.step, self.reason = step, reason


def _check_divisor(d: Polynomial, defined: set, i: int):
    tm = d.as_monomial()
    if tm is None or tm[0] <= 0:
        raise _Reject(i, "divisor must be a positive multiple of a single monomial")
    for v, e in tm[1]:
        if v.family == AUX:
            if v not in defined:
                raise _Reject(i, f"divisor uses undefined auxiliary {v}")
        elif e % 2:
            raise _Reject(i, f"divisor has odd power of non-auxiliary {v}")


def _check_definition(var: VarId, k: int, defn: Polynomial, used: set, defined: set, i: int):
    if var.family != AUX:
        raise _Reject(i, f"{var} is not an auxiliary variable")
    if var in used:
        raise _Reject(i, f"auxiliary {var} is not fresh")
    if k < 1 or defn.is_zero():
        raise _Reject(i, "definition needs a positive power and a nonzero right side")
    for m, c in defn.terms.items():
        if c <= 0 or any(e % 2 for _, e in m):
            raise _Reject(i, "definition right side must have positive coefficients and even exponents")
        for v, _ in m:
            if v.family == GADGET or (v.family == AUX and v not in defined):
                raise _Reject(i, f"definition uses {v} before it is available")


def verify(cert: Certificate, datum: BLDatum | None = None, slack_factor=8) -> Verdict:
    try:
        report = _replay(cert, datum, Fraction(slack_factor))
    except _Reject as r:
        return Verdict(False, step=r.step, reason=r.reason)
    return Verdict(True, report=report)


def _replay(cert: Certificate, datum: BLDatum | None, slack_factor: Fraction) -> DegreeReport:
    target = cert.target
    if not target.is_integral():
        raise _Reject(None, "target has fractional exponents")
    if any(v.family in (AUX, GADGET) for v in target.variables()):
        raise _Reject(None, "target may only mention FUNC and SLACK variables")
    for name, h in cert.hypotheses.items():
        if any(v.family not in (FUNC_ROOT, SLACK) for v in h.variables()):
            raise _Reject(None, f"hypothesis {name} may only mention FUNC and SLACK variables")
    bound = None
    if datum is not None:
        if cert.datum_digest != datum.digest():
            raise _Reject(None, "datum digest does not match")
        try:
            expected, hyps = datum_target(datum, cert.func_powers, cert.slack_powers)
        except (ValueError, IndexError) as exc:
            raise _Reject(None, f"cannot rebuild the datum target: {exc}")
        if expected != target:
            raise _Reject(None, "target is not the datum's inequality; leading difference "
                          + (expected - target).leading_term())
        for name, h in cert.hypotheses.items():
            if hyps.get(name) != h:
                raise _Reject(None, f"hypothesis {name} is not a sup-norm bound of the datum")
        ev = datum.exponents
        bound = degree_bound(datum.n, datum.m, ev.s, ev.s_list)

    claims: list = []
    pure: list = []
    degs: list = []
    eqs: dict = {}
    defined: set = set()
    used = set(target.variables())
    for h in cert.hypotheses.values():
        used |= h.variables()

    def fact(i, ref):
        if claims[ref] is None:
            raise _Reject(i, f"step {ref} is a definition, not a fact")
        return claims[ref]

    def eq_sum(i, pairs):
        acc, deg = Polynomial(), 0
        for var, mult in pairs:
            if var not in eqs:
                raise _Reject(i, f"equation for undefined auxiliary {var}")
            term = mult * eqs[var]
            acc = acc + term
            deg = max(deg, term.degree())
        return acc, deg

    for i, st in enumerate(cert.steps):
        a = st.args
        if not st.claim.is_integral():
            raise _Reject(i, "claim has fractional exponents")
        if st.kind == "SQUARE":
            claim, is_pure, deg = a["poly"] * a["poly"], True, 2 * a["poly"].degree()
        elif st.kind == "HYPOTHESIS":
            if a["name"] not in cert.hypotheses:
                raise _Reject(i, f"undeclared hypothesis {a['name']}")
            claim = cert.hypotheses[a["name"]]
            is_pure, deg = False, claim.degree()
        elif st.kind == "ADD":
            claim = fact(i, a["a"]) + fact(i, a["b"])
            is_pure, deg = pure[a["a"]] and pure[a["b"]], max(degs[a["a"]], degs[a["b"]])
        elif st.kind == "MUL":
            claim = fact(i, a["a"]) * fact(i, a["b"])
            is_pure, deg = pure[a["a"]] and pure[a["b"]], degs[a["a"]] + degs[a["b"]]
        elif st.kind == "SCALAR_MUL":
            if a["c"] <= 0:
                raise _Reject(i, "scalar must be positive")
            claim, is_pure, deg = fact(i, a["a"]) * a["c"], pure[a["a"]], degs[a["a"]]
        elif st.kind == "SUBSTITUTE":
            if not pure[a["a"]]:
                raise _Reject(i, "substitution into a step that depends on hypotheses or definitions")
            claim = fact(i, a["a"]).substitute(a["table"])
            is_pure, deg = True, claim.degree()
        elif st.kind == "DEFINE_AUX":
            var, k, defn = a["var"], a["power"], a["defn"]
            _check_definition(var, k, defn, used, defined, i)
            claim = Polynomial.monomial(((var, k),)) - defn
            if claim != st.claim:
                raise _Reject(i, "stored definition equation does not match; leading difference "
                              + (claim - st.claim).leading_term())
            eqs[var] = claim
            defined.add(var)
            used.add(var)
            claims.append(None)
            pure.append(False)
            degs.append(claim.degree())
            continue
        elif st.kind == "REWRITE":
            extra, edeg = eq_sum(i, a["eqs"])
            claim = fact(i, a["a"]) + extra
            is_pure, deg = False, max(degs[a["a"]], edeg)
        elif st.kind == "DIVIDE":
            _check_divisor(a["divisor"], defined, i)
            src = fact(i, a["a"])
            if st.claim * a["divisor"] != src:
                raise _Reject(i, "claim times divisor does not reproduce the source; leading difference "
                              + (st.claim * a["divisor"] - src).leading_term())
            claim, is_pure, deg = st.claim, False, degs[a["a"]]
        elif st.kind == "CONCLUDE":
            s1, s2 = a["s1"], a["s2"]
            if not s1.has_positive_constant():
                raise _Reject(i, "S1 must contain a nonzero constant square")
            residual = s1.expand() * target - s2.expand()
            deg = max(s1.degree() + target.degree(), s2.degree())
            if a["from"] is not None:
                residual = residual - fact(i, a["from"])
                deg = max(deg, degs[a["from"]])
            extra, edeg = eq_sum(i, a["eqs"])
            residual = residual - extra
            deg = max(deg, edeg)
            if not residual.is_zero():
                raise _Reject(i, "S1*target - S2 - facts is not identically zero; leading term "
                              + residual.leading_term())
            claims.append(Polynomial())
            pure.append(False)
            degs.append(deg)
            break
        else:
            raise _Reject(i, f"unknown step kind {st.kind}")
        if claim != st.claim:
            raise _Reject(i, "claimed polynomial does not match recomputation; leading difference "
                          + (claim - st.claim).leading_term())
        used |= claim.variables()
        claims.append(claim)
        pure.append(is_pure)
        degs.append(deg)
    else:
        raise _Reject(len(cert.steps), "certificate does not end with CONCLUDE")

    max_deg = max(degs, default=0)
    within = None if bound is None else max_deg <= slack_factor * bound
    return DegreeReport(int(max_deg), degs, bound, slack_factor, within)


def recompute_degrees(cert: Certificate) -> list:
    """Per-step degrees from the accumulation rules, independent of the verifier's replay."""
    out = []
    for st in cert.steps:
        a = st.args
        k = st.kind
        if k == "SQUARE":
            d = 2 * a["poly"].degree()
        elif k == "HYPOTHESIS":
            d = cert.hypotheses[a["name"]].degree()
        elif k == "ADD":
            d = max(out[a["a"]], out[a["b"]])
        elif k == "MUL":
            d = out[a["a"]] + out[a["b"]]
        elif k in ("SCALAR_MUL", "DIVIDE"):
            d = out[a["a"]]
        elif k in ("SUBSTITUTE", "DEFINE_AUX"):
            d = st.claim.degree()
        elif k == "REWRITE":
            d = out[a["a"]]
            for var, mult in a["eqs"]:
                eq = next(s.claim for s in cert.steps if s.kind == "DEFINE_AUX" and s.args["var"] == var)
                d = max(d, (mult * eq).degree())
        else:
            d = max(a["s1"].degree() + cert.target.degree(), a["s2"].degree())
            if a["from"] is not None:
                d = max(d, out[a["from"]])
            for var, mult in a["eqs"]:
                eq = next(s.claim for s in cert.steps if s.kind == "DEFINE_AUX" and s.args["var"] == var)
                d = max(d, (mult * eq).degree())
        out.append(d)
    return out
