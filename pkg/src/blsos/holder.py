"""Leaf inequalities: Cauchy-Schwarz, weighted AM-GM, Holder and power means.

Standalone certificates are stated for the datum with identity maps on the
points 0..k-1 of a line, so they can be checked against that datum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .builder import (Bound, ProofBuilder, P, amgm_sos, finish_datum, func_atom, posy)
from .certificate import Certificate, Step
from .datum import BLDatum, validate
from .polyring import ONE, Polynomial, SosExpr, mono_mul, mono_pow, mono_str

MAX_DENOMINATOR = 64


class HolderError(ValueError):
    pass


def identity_datum(weights, size: int) -> BLDatum:
    return validate({"n": 1, "maps": [[[1]] for _ in weights],
                     "p": [str(Fraction(w)) for w in weights], "domain": {"box": size}})


def prove_amgm_binary(s1: int, s2: int) -> SosExpr:
    """Exact SoS for s1 A^(2s) + s2 B^(2s) - s A^(2 s1) B^(2 s2) in the gadget variables G0, G1."""
    return amgm_sos(s1, s2)


def prove_cauchy_schwarz(f_terms, g_terms) -> Certificate:
    """(sum f^2)(sum g^2) - (sum f g)^2 as the Lagrange sum of squares."""
    f_terms, g_terms = list(f_terms), list(g_terms)
    if len(f_terms) != len(g_terms):
        raise HolderError(f"index mismatch: {len(f_terms)} f terms, {len(g_terms)} g terms")
    ff = sum((f * f for f in f_terms), Polynomial())
    gg = sum((g * g for g in g_terms), Polynomial())
    fg = sum((f * g for f, g in zip(f_terms, g_terms)), Polynomial())
    squares = [f_terms[i] * g_terms[k] - f_terms[k] * g_terms[i]
               for i in range(len(f_terms)) for k in range(i + 1, len(f_terms))]
    conclude = Step("CONCLUDE", {"s1": SosExpr([Polynomial.const(1)]), "s2": SosExpr(squares),
                                 "from": None, "eqs": []}, Polynomial())
    return Certificate(steps=[conclude], hypotheses={}, target=ff * gg - fg * fg, s=2, s_list=(1, 1),
                       p=(Fraction(1, 2), Fraction(1, 2)), meta={"path": "cauchy_schwarz"})


def _cs_for_datum(datum: BLDatum, f_terms, g_terms) -> Certificate:
    cert = prove_cauchy_schwarz([P(t) for t in f_terms], [P(t) for t in g_terms])
    cert.datum_digest = datum.digest()
    cert.func_powers = (1, 1)
    cert.slack_powers = (0, 0)
    return cert


@dataclass
class HolderTask:
    p: Fraction
    q: Fraction
    size: int = 2
    path: str | None = None  # "fast", "general" or None for automatic

    def __post_init__(self):
        self.p, self.q = Fraction(self.p), Fraction(self.q)
        if not (0 < self.p <= 1 and 0 < self.q <= 1) or self.p + self.q != 1:
            raise HolderError("need p, q in (0, 1] with p + q = 1")
        if self.size < 1:
            raise HolderError("index set must be nonempty")

    @property
    def s(self) -> int:
        return max(self.p.denominator, self.q.denominator)


def is_dyadic(s: int) -> bool:
    return s & (s - 1) == 0


def holder_fast(b: ProofBuilder, values, weights, chain=None) -> Bound:
    """sum_x prod_k u_kx^w_k <= prod_k nu_k^w_k by repeated Cauchy-Schwarz (dyadic weights).

    ``values[k]`` are the f_k values and u_k = f_k^(1/p_k); ``weights`` starts at (p_k).
    Splitting X = u_k^(1/2) Y off the largest weight doubles every other weight.
    """
    ps = [Fraction(w) for w in weights]

    def us(k):
        return [mono_pow(v, 1 / ps[k]) for v in values[k]]

    def norm_b(k):
        return b.norm_bound(values[k], ps[k])

    def go(w):
        if chain is not None:
            chain.append(tuple(w))
        for k, wk in enumerate(w):
            if wk == 1:
                return norm_b(k)
        k = max(range(len(w)), key=lambda i: (w[i], -i))
        nxt = [2 * wi - 1 if i == k else 2 * wi for i, wi in enumerate(w)]
        inner = go(nxt)
        ys = []
        for x in range(len(values[0])):
            m = ONE
            for i, wi in enumerate(nxt):
                m = mono_mul(m, mono_pow(us(i)[x], wi))
            ys.append(m)
        return b.holder2(us(k), ys, norm_b(k), inner, 1, 1)

    return go(ps)


def holder_general(b: ProofBuilder, values, weights) -> Bound:
    ps = [Fraction(w) for w in weights]
    terms = [[mono_pow(v, 1 / ps[k]) for v in values[k]] for k in range(len(ps))]
    bounds = [b.norm_bound(values[k], ps[k]) for k in range(len(ps))]
    return b.holder_multi(terms, bounds, ps)


def _relabel_norms(b: ProofBuilder, bound: Bound, values, weights) -> Bound:
    hi = Polynomial.const(1)
    for vals, w in zip(values, weights):
        hi = hi * b.norm(vals, w)
    if bound.hi != hi:
        raise HolderError("Holder bound does not end at the product of norms")
    return bound


def _factor_label(ws, ps) -> str:
    names = [("f", "g")[k] if len(ws) == 2 else f"h{k}" for k in range(len(ws))]
    parts = []
    for name, w, p in zip(names, ws, ps):
        e = w / p
        if e == 0:
            continue
        parts.append(name if e == 1 else f"{name}^{e}" if e.denominator == 1 else f"{name}^({e})")
    return "*".join(parts)


def prove_holder_pair(task: HolderTask, min_func=None) -> Certificate:
    """sum f g <= ||f||_(1/p) ||g||_(1/q), homogenized to the power s."""
    if task.s > MAX_DENOMINATOR:
        raise HolderError(f"denominator {task.s} exceeds the cap {MAX_DENOMINATOR}")
    datum = identity_datum((task.p, task.q), task.size)
    pts = datum.image_points(0)
    f = [func_atom(0, y) for y in pts]
    g = [func_atom(1, y) for y in pts]
    path = task.path or ("fast" if is_dyadic(task.s) else "general")
    if task.p == task.q and path != "general":
        cert = _cs_for_datum(datum, f, g)
        cert.meta["exponent_chain"] = [["1/2", "1/2"], ["0/1", "1/1"]]
        return cert
    if path == "fast" and not is_dyadic(task.s):
        raise HolderError("the fast path needs a power-of-two denominator")
    b = ProofBuilder()
    ws = (task.p, task.q)
    if path == "fast":
        chain: list = []
        bound = holder_fast(b, [f, g], ws, chain)
        b.meta["exponent_chain"] = [[_fmt(w) for w in c] for c in chain]
        b.meta["intermediate_factors"] = [_factor_label(c, ws) for c in chain[1:]]
    else:
        bound = holder_general(b, [f, g], ws)
    bound = _relabel_norms(b, bound, [f, g], ws)
    b.meta["path"] = path
    return finish_datum(b, bound, datum, min_func=min_func)


def _fmt(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def prove_holder_multi(weights, size: int = 2) -> Certificate:
    """sum prod h_i <= prod ||h_i||_(1/theta_i) by folding pair inequalities."""
    ws = [Fraction(w) for w in weights]
    if len(ws) < 2:
        raise HolderError("need at least two factors")
    if any(not 0 < w <= 1 for w in ws) or sum(ws) != 1:
        raise HolderError("weights must lie in (0, 1] and sum to 1")
    datum = identity_datum(ws, size)
    pts = datum.image_points(0)
    values = [[func_atom(k, y) for y in pts] for k in range(len(ws))]
    if len(ws) == 2:
        return prove_holder_pair(HolderTask(ws[0], ws[1], size))
    b = ProofBuilder()
    bound = _relabel_norms(b, holder_general(b, values, ws), values, ws)
    b.meta["path"] = "fold"
    return finish_datum(b, bound, datum)


def norm_monotone(b: ProofBuilder, values, p) -> Bound:
    """sum f <= (sum f^(1/p))^p for p > 1, via u_y <= nu and u_y^(p-1) <= nu^(p-1)."""
    p = Fraction(p)
    if p <= 1:
        raise HolderError("norm monotonicity needs p > 1")
    lo = posy(values)
    if len(values) == 1:
        return b.trivial(lo)
    nb = b.norm_bound(values, p)
    _, mu = nb.hi.as_monomial()
    us = [mono_pow(v, 1 / p) for v in values]
    parts = []
    for y, u in enumerate(us):
        others = posy(us[:y] + us[y + 1:])
        single = Bound(b.add(nb.step, b.nonneg(others)), P(u), P(mu))
        pw = b.power(single, p - 1)
        parts.append(b.scale(pw, u))
    total = b.add_bounds(parts)
    # mu^(p-1) * sum u  ->  mu^p  using mu = sum u
    step = b.rewrite(total.step, [(mu[0][0], P(mono_pow(mu, p - 1)))])
    return Bound(step, total.lo, P(mono_pow(mu, p)))


def prove_norm_monotone(p, size: int = 2) -> Certificate:
    p = Fraction(p)
    if p <= 1:
        raise HolderError("norm monotonicity needs p > 1")
    datum = identity_datum((p,), size)
    values = [func_atom(0, y) for y in datum.image_points(0)]
    b = ProofBuilder()
    bound = norm_monotone(b, values, p)
    if bound.hi != b.norm(values, p):
        raise HolderError("monotone bound does not end at the norm")
    b.meta["path"] = "norm_monotone"
    return finish_datum(b, bound, datum)
