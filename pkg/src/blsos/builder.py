"""Step-by-step construction of certificates.

While a proof is being built every quantity is a monomial in nonnegative
atoms (function values, sup-norm slacks and defined auxiliaries) whose
exponents may be arbitrary positive rationals.  ``finish`` clears all
denominators with the ring map v -> v**K_v, chosen so every exponent the
verifier needs to be even is even, and emits an integer-exponent certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .certificate import Certificate, Step
from .datum import lcm_all
from .polyring import (AUX, GADGET, ONE, Polynomial, SosExpr, VarId, mono, mono_mul, mono_pow)


class BuildError(RuntimeError):
    """An internal invariant of proof construction failed."""


def P(m: tuple, c=1) -> Polynomial:
    return Polynomial.monomial(m, c)


def posy(monos) -> Polynomial:
    acc = Polynomial()
    for m in monos:
        acc = acc + P(m)
    return acc


def mono_div(a: tuple, b: tuple) -> tuple:
    out = mono_mul(a, mono_pow(b, -1))
    if any(e < 0 for _, e in out):
        raise BuildError("monomial division left a negative exponent")
    return out


def poly_div(p: Polynomial, c: Fraction, m: tuple) -> Polynomial:
    acc = Polynomial()
    for t, v in p.terms.items():
        acc = acc + P(mono_div(t, m), v / c)
    return acc


def amgm_sos(s1: int, s2: int) -> SosExpr:
    """SoS form of s1*A^(2s) + s2*B^(2s) - s*A^(2 s1)*B^(2 s2), s = s1 + s2.

    With x = A^2, y = B^2 the form equals (x - y)^2 * sum_k c_k x^k y^(s-2-k).
    """
    if s1 < 1 or s2 < 1:
        raise ValueError("weights must be positive integers")
    s = s1 + s2
    a, b = Polynomial.var(VarId(GADGET, 0)), Polynomial.var(VarId(GADGET, 1))
    diff = a * a - b * b
    out = []
    for k in range(s - 1):
        c = (k + 1) * s2 if k < s1 else s1 * (s - 1 - k)
        out.append((Fraction(c), a ** k * b ** (s - 2 - k) * diff))
    return SosExpr(out)


@dataclass
class Bound:
    """Certified  lo <= hi  (the claim of ``step`` is hi - lo)."""
    step: int
    lo: Polynomial
    hi: Polynomial


class ProofBuilder:
    def __init__(self):
        self.steps: list = []  # [kind, args, claim]
        self.hyps: dict = {}
        self.aux: list = []
        self.aux_def: dict = {}
        self.aux_by_flat: dict = {}
        self._sq: dict = {}
        self._gadget: dict = {}
        self._zero = None
        self.meta: dict = {}

    # -- raw steps -----------------------------------------------------------

    def emit(self, kind, args, claim) -> int:
        self.steps.append((kind, args, claim))
        return len(self.steps) - 1

    def claim(self, i) -> Polynomial:
        return self.steps[i][2]

    def square(self, q: Polynomial) -> int:
        return self.emit("SQUARE", {"poly": q}, q * q)

    def zero(self) -> int:
        if self._zero is None:
            self._zero = self.square(Polynomial())
        return self._zero

    def add(self, a, b) -> int:
        return self.emit("ADD", {"a": a, "b": b}, self.claim(a) + self.claim(b))

    def add_all(self, idx) -> int:
        idx = list(idx)
        if not idx:
            return self.zero()
        acc = idx[0]
        for i in idx[1:]:
            acc = self.add(acc, i)
        return acc

    def mul(self, a, b) -> int:
        return self.emit("MUL", {"a": a, "b": b}, self.claim(a) * self.claim(b))

    def scalar(self, a, c) -> int:
        c = Fraction(c)
        if c == 1:
            return a
        if c <= 0:
            raise BuildError("scalar must be positive")
        return self.emit("SCALAR_MUL", {"a": a, "c": c}, self.claim(a) * c)

    def hypothesis(self, name, poly) -> int:
        self.hyps[name] = poly
        return self.emit("HYPOTHESIS", {"name": name}, poly)

    def nonneg(self, p: Polynomial) -> int:
        """p >= 0 for a posynomial, from squares of half-power monomials."""
        parts = []
        for m, c in p.sorted_terms():
            if c <= 0:
                raise BuildError("nonneg() needs positive coefficients")
            if m not in self._sq:
                self._sq[m] = self.square(P(mono_pow(m, Fraction(1, 2))))
            parts.append(self.scalar(self._sq[m], c))
        return self.add_all(parts)

    def divide(self, a, c, m) -> int:
        c = Fraction(c)
        return self.emit("DIVIDE", {"a": a, "divisor": P(m, c)}, poly_div(self.claim(a), c, m))

    def rewrite(self, a, eqs) -> int:
        eqs = [(v, q) for v, q in eqs if not q.is_zero()]
        if not eqs:
            return a
        claim = self.claim(a)
        for v, q in eqs:
            claim = claim + q * (P(((v, 1),)) - self.aux_def[v])
        return self.emit("REWRITE", {"a": a, "eqs": eqs}, claim)

    def gadget(self, s1: int, s2: int) -> int:
        if (s1, s2) not in self._gadget:
            sos = amgm_sos(s1, s2)
            parts = [self.scalar(self.square(q), w) for w, q in sos.squares]
            self._gadget[(s1, s2)] = self.add_all(parts)
        return self._gadget[(s1, s2)]

    def substitute(self, a, table) -> int:
        return self.emit("SUBSTITUTE", {"a": a, "table": table}, self.claim(a).substitute(table))

    # -- auxiliaries -----------------------------------------------------------

    def flatten(self, p: Polynomial):
        """p = flat + sum mults[v] * (v - R_v), eliminating integer powers of aux."""
        mults: dict = {}
        for v in reversed(self.aux):
            r = self.aux_def[v]
            vp = P(((v, 1),))
            # group terms by their integer power of v, so each power is expanded once
            by_k: dict = {}
            out: dict = {}
            for m, c in p.terms.items():
                k = dict(m).get(v)
                if k is None or not isinstance(k, int):
                    out[m] = out.get(m, 0) + c
                    continue
                rest = tuple((w, e) for w, e in m if w != v)
                by_k.setdefault(k, {})[rest] = c
            if not by_k:
                continue
            mult: dict = {}
            for k, rest_terms in sorted(by_k.items()):
                rest = Polynomial(rest_terms)
                rpow = [Polynomial.const(1)]
                for _ in range(k):
                    rpow.append(rpow[-1] * r)
                tele: dict = {}
                for i in range(k):
                    (vp ** i * rpow[k - 1 - i]).add_into(tele)
                (rest * Polynomial.from_terms(tele)).add_into(mult)
                (rest * rpow[k]).add_into(out)
            mults[v] = mults.get(v, Polynomial()) + Polynomial.from_terms(mult)
            p = Polynomial({m: c for m, c in out.items() if c})
        return p, mults

    def define(self, r: Polynomial) -> VarId:
        v = VarId(AUX, len(self.aux))
        self.aux.append(v)
        self.aux_def[v] = r
        self.emit("DEFINE_AUX", {"var": v, "power": 1, "defn": r}, P(((v, 1),)) - r)
        return v

    def norm(self, values, p) -> Polynomial:
        """(sum v^(1/p))^p as a monomial: a single value, 1 for p = 0, else aux^p."""
        p = Fraction(p)
        if p == 0:
            if any(v != ONE for v in values):
                raise BuildError("sup norm of a nonconstant function inside the recursion")
            return P(ONE)
        if len(values) == 1:
            return P(values[0])
        return P(mono(((self.norm_aux(values, p), p),)))

    def norm_aux(self, values, p) -> VarId:
        r = posy(mono_pow(v, 1 / Fraction(p)) for v in values)
        flat, _ = self.flatten(r)
        if flat not in self.aux_by_flat:
            self.aux_by_flat[flat] = self.define(r)
        return self.aux_by_flat[flat]

    def eq_eqs(self, old: Polynomial, new: Polynomial):
        """Multipliers turning ``old`` into ``new`` when both flatten to the same value."""
        fo, mo = self.flatten(old)
        fn, mn = self.flatten(new)
        if fo != fn:
            raise BuildError("rewrite between expressions of different value")
        return [(v, mn.get(v, Polynomial()) - mo.get(v, Polynomial())) for v in self.aux]

    def relabel(self, b: Bound, lo=None, hi=None) -> Bound:
        eqs: dict = {}
        if hi is not None and hi != b.hi:
            for v, q in self.eq_eqs(b.hi, hi):
                eqs[v] = eqs.get(v, Polynomial()) + q
        if lo is not None and lo != b.lo:
            for v, q in self.eq_eqs(b.lo, lo):
                eqs[v] = eqs.get(v, Polynomial()) - q
        step = self.rewrite(b.step, [(v, eqs[v]) for v in self.aux if v in eqs])
        return Bound(step, b.lo if lo is None else lo, b.hi if hi is None else hi)

    # -- bounds ------------------------------------------------------------------

    def trivial(self, x: Polynomial) -> Bound:
        return Bound(self.zero(), x, x)

    def equal(self, old: Polynomial, new: Polynomial) -> Bound:
        return self.relabel(self.trivial(old), hi=new)

    def norm_bound(self, values, p) -> Bound:
        """sum v^(1/p) <= aux with aux^p the norm (p > 0)."""
        p = Fraction(p)
        lo = posy(mono_pow(v, 1 / p) for v in values)
        if len(values) == 1:
            return self.trivial(lo)
        return self.equal(lo, P(((self.norm_aux(values, p), 1),)))

    def chain(self, a: Bound, b: Bound) -> Bound:
        if a.hi != b.lo:
            raise BuildError("chain of bounds does not meet")
        return Bound(self.add(a.step, b.step), a.lo, b.hi)

    def add_bounds(self, bs) -> Bound:
        bs = list(bs)
        return Bound(self.add_all(b.step for b in bs),
                     sum((b.lo for b in bs), Polynomial()), sum((b.hi for b in bs), Polynomial()))

    def scale(self, b: Bound, m: tuple) -> Bound:
        if m == ONE:
            return b
        return Bound(self.mul(b.step, self.nonneg(P(m))), b.lo * P(m), b.hi * P(m))

    def mul_bounds(self, a: Bound, b: Bound) -> Bound:
        # hi_a hi_b - lo_a lo_b = (hi_a - lo_a) hi_b + lo_a (hi_b - lo_b)
        left = self.mul(a.step, self.nonneg(b.hi))
        if a.lo.is_zero():
            return Bound(left, Polynomial(), a.hi * b.hi)
        right = self.mul(self.nonneg(a.lo), b.step)
        return Bound(self.add(left, right), a.lo * b.lo, a.hi * b.hi)

    def power(self, b: Bound, r) -> Bound:
        """x <= y  =>  x^r <= y^r for monomials x, y and rational r > 0."""
        r = Fraction(r)
        (_, x), (_, y) = b.lo.as_monomial(), b.hi.as_monomial()
        k, frac_part = int(r), r - int(r)
        parts = []
        if k == 1:
            parts.append(b)
        elif k > 1:
            tele = sum((P(mono_pow(y, i)) * P(mono_pow(x, k - 1 - i)) for i in range(k)), Polynomial())
            parts.append(Bound(self.mul(b.step, self.nonneg(tele)), P(mono_pow(x, k)), P(mono_pow(y, k))))
        if frac_part:
            a_, q = frac_part.numerator, frac_part.denominator
            g = self.gadget(a_, q - a_)
            sub = self.substitute(g, {VarId(GADGET, 0): P(mono_pow(x, Fraction(1, 2 * q))),
                                      VarId(GADGET, 1): P(mono_pow(y, Fraction(1, 2 * q)))})
            # a x + (q-a) y - q x^r y^(1-r)  plus  a (y - x)
            tot = self.add(sub, self.scalar(b.step, a_))
            step = self.divide(tot, q, mono_pow(y, 1 - frac_part))
            parts.append(Bound(step, P(mono_pow(x, frac_part)), P(mono_pow(y, frac_part))))
        out = parts[0]
        for extra in parts[1:]:
            out = self.mul_bounds(out, extra)
        return out

    def holder2(self, a_terms, b_terms, ba: Bound, bb: Bound, s1: int, s2: int) -> Bound:
        """sum a <= A, sum b <= B  =>  sum a^t b^(1-t) <= A^t B^(1-t), t = s1/(s1+s2)."""
        s = s1 + s2
        th = Fraction(s1, s)
        (_, A), (_, B) = ba.hi.as_monomial(), bb.hi.as_monomial()
        g = self.gadget(s1, s2)
        subs, lo = [], []
        for a, b in zip(a_terms, b_terms):
            ga = P(mono_pow(mono_mul(a, B), Fraction(1, 2 * s)))
            gb = P(mono_pow(mono_mul(b, A), Fraction(1, 2 * s)))
            subs.append(self.substitute(g, {VarId(GADGET, 0): ga, VarId(GADGET, 1): gb}))
            lo.append(mono_mul(mono_pow(a, th), mono_pow(b, 1 - th)))
        t1 = self.mul(ba.step, self.nonneg(P(B, s1)))
        t2 = self.mul(bb.step, self.nonneg(P(A, s2)))
        tot = self.add_all(subs + [t1, t2])
        step = self.divide(tot, s, mono_mul(mono_pow(A, 1 - th), mono_pow(B, th)))
        hi = P(mono_mul(mono_pow(A, th), mono_pow(B, 1 - th)))
        out = Bound(step, posy(lo), hi)
        if self.claim(step) != out.hi - out.lo:
            raise BuildError("Holder step does not have the expected claim")
        return out

    def holder_multi(self, term_lists, bounds, weights) -> Bound:
        """Left fold of ``holder2``: sum_x prod a_ix^w_i <= prod A_i^w_i."""
        weights = [Fraction(w) for w in weights]
        if len(weights) == 1:
            return bounds[0]
        w0 = weights[0]
        rest_w = [w / (1 - w0) for w in weights[1:]]
        rest = self.holder_multi(term_lists[1:], bounds[1:], rest_w)
        rest_terms = []
        for x in range(len(term_lists[0])):
            m = ONE
            for w, terms in zip(rest_w, term_lists[1:]):
                m = mono_mul(m, mono_pow(terms[x], w))
            rest_terms.append(m)
        self.meta.setdefault("holder_folds", []).append([str(w0), str(1 - w0)])
        s = lcm_all([w0.denominator])
        return self.holder2(term_lists[0], rest_terms, bounds[0], rest, int(w0 * s), int((1 - w0) * s))

    def homogenize(self, b: Bound, s: int) -> Bound:
        if s == 1:
            return b
        tele = sum((b.hi ** i * b.lo ** (s - 1 - i) for i in range(s)), Polynomial())
        return Bound(self.mul(b.step, self.nonneg(tele)), b.lo ** s, b.hi ** s)

    # -- emission -----------------------------------------------------------------

    def conclude(self, b: Bound, target: Polynomial) -> int:
        flat, mults = self.flatten(b.hi - b.lo)
        if flat != target:
            raise BuildError("final fact does not flatten to the target")
        eqs = [(v, -mults[v]) for v in self.aux if v in mults and not mults[v].is_zero()]
        return self.emit("CONCLUDE", {"s1": SosExpr([P(ONE)]), "s2": SosExpr([]), "from": b.step, "eqs": eqs},
                         Polynomial())

    def _scales(self, target):
        need: dict = {}

        def note(poly, half=False, skip_aux=False):
            for m in poly.terms:
                for v, e in m:
                    if v.family == GADGET or (skip_aux and v.family == AUX):
                        continue
                    d = Fraction(e / 2 if half else e).denominator
                    need[v] = lcm_all([need.get(v, 1), d])

        note(target)
        for h in self.hyps.values():
            note(h)
        for kind, args, claim in self.steps:
            note(claim)
            for k, val in args.items():
                if isinstance(val, Polynomial):
                    note(val)
                elif isinstance(val, SosExpr):
                    for _, q in val.squares:
                        note(q)
                elif k == "table":
                    for q in val.values():
                        note(q)
                elif k == "eqs":
                    for _, q in val:
                        note(q)
            if kind == "DEFINE_AUX":
                note(args["defn"], half=True)
            elif kind == "DIVIDE":
                note(args["divisor"], half=True, skip_aux=True)
        return need

    def finish(self, b: Bound, target: Polynomial, unify=None, **fields) -> Certificate:
        """CONCLUDE ``target`` from ``b`` and clear exponent denominators.

        ``unify`` maps a variable to a group key; variables in one group share a scale.
        """
        self.conclude(b, target)
        need = self._scales(target)
        if unify is not None:
            groups: dict = {}
            for v, k in need.items():
                key = unify(v)
                if key is not None:
                    groups[key] = lcm_all([groups.get(key, 1), k])
            for v in need:
                key = unify(v)
                if key is not None:
                    need[v] = groups[key]
        else:
            groups = {}

        def mp(q):
            return q.map_exponents(need)

        steps = []
        for kind, args, claim in self.steps:
            new = {}
            for k, val in args.items():
                if isinstance(val, Polynomial):
                    new[k] = mp(val)
                elif isinstance(val, SosExpr):
                    new[k] = SosExpr([(w, mp(q)) for w, q in val.squares])
                elif k == "table":
                    new[k] = {v: mp(q) for v, q in val.items()}
                elif k == "eqs":
                    new[k] = [(v, mp(q)) for v, q in val]
                else:
                    new[k] = val
            if kind == "DEFINE_AUX":
                new["power"] = need.get(args["var"], 1)
            steps.append(Step(kind, new, mp(claim)))
        cert = Certificate(steps=steps, hypotheses={k: mp(v) for k, v in self.hyps.items()},
                           target=mp(target), meta=self.meta, **fields)
        cert.meta = dict(self.meta)
        self.scales = need
        self.groups = groups
        return cert


# -- whole-instance helpers ------------------------------------------------------

def func_atom(j: int, y) -> tuple:
    from .certificate import func_var
    return ((func_var(j, y), 1),)


def slack_atom(j: int) -> tuple:
    from .certificate import slack_var
    return ((slack_var(j), 1),)


def instance_target(datum, phis, slacks=None) -> Polynomial:
    """RHS^s - LHS^s with f_j(y) = phis[j][y] and sup f_j = slacks[j] for p_j = 0."""
    ev = datum.exponents
    s = ev.s
    rhs = Polynomial.const(1)
    for j, pj in enumerate(datum.p):
        if pj > 0:
            vals = [phis[j][y] for y in datum.image_points(j)]
            rhs = rhs * posy(mono_pow(v, 1 / pj) for v in vals) ** ev.s_list[j]
        else:
            rhs = rhs * P(mono_pow(slacks[j], s))
    lhs = Polynomial()
    for x in datum.points():
        m = ONE
        for j in range(datum.m):
            m = mono_mul(m, phis[j][datum.image(j, x)])
        lhs = lhs + P(m)
    return rhs - lhs ** s


def _family_key(v: VarId):
    if v.family in ("F", "T"):
        return (v.family, v.index)
    return None


def finish_datum(builder: ProofBuilder, bound: Bound, datum, min_func=None) -> Certificate:
    """Homogenize a bound LHS <= RHS of the datum's instance and emit its certificate."""
    phis = [{y: func_atom(j, y) for y in datum.image_points(j)} for j in range(datum.m)]
    slacks = [slack_atom(j) for j in range(datum.m)]
    ev = datum.exponents
    top = builder.homogenize(bound, ev.s)
    target = instance_target(datum, phis, slacks)
    cert = builder.finish(top, target, unify=_family_key, datum_digest=datum.digest(),
                          s=ev.s, s_list=ev.s_list, p=datum.p)
    # the target may cancel (single-point norms), so f^(1/p_j) must clear on its own
    need = dict(min_func or {})
    for j, sj in enumerate(ev.s_list):
        if sj:
            need[j] = lcm_all([need.get(j, 1), Fraction(ev.s, sj).denominator])
    min_func = need
    if min_func:
        cert = _rescale(builder, cert, min_func)
    groups = builder.groups
    cert.func_powers = tuple(groups.get(("F", j), 1) for j in range(datum.m))
    cert.slack_powers = tuple(groups.get(("T", j), 1) if datum.p[j] == 0 else 0 for j in range(datum.m))
    return cert


def _rescale(builder: ProofBuilder, cert: Certificate, min_func) -> Certificate:
    """Raise FUNC scales to a common multiple with ``min_func`` (still a ring map)."""
    extra = {}
    for j, want in min_func.items():
        k = builder.groups.get(("F", j), 1)
        new = lcm_all([k, want])
        extra[("F", j)] = new // k
        builder.groups[("F", j)] = new
    scale = {}
    for st in cert.steps:
        for v in st.claim.variables():
            key = _family_key(v)
            if key in extra:
                scale[v] = extra[key]
    for poly in [cert.target] + list(cert.hypotheses.values()):
        for v in poly.variables():
            key = _family_key(v)
            if key in extra:
                scale[v] = extra[key]

    def mp(q):
        return q.map_exponents(scale)

    steps = []
    for st in cert.steps:
        new = {}
        for k, val in st.args.items():
            if isinstance(val, Polynomial):
                new[k] = mp(val)
            elif isinstance(val, SosExpr):
                new[k] = SosExpr([(w, mp(q)) for w, q in val.squares])
            elif k == "table":
                new[k] = {v: mp(q) for v, q in val.items()}
            elif k == "eqs":
                new[k] = [(v, mp(q)) for v, q in val]
            else:
                new[k] = val
        steps.append(Step(st.kind, new, mp(st.claim)))
    cert.steps = steps
    cert.target = mp(cert.target)
    cert.hypotheses = {k: mp(v) for k, v in cert.hypotheses.items()}
    return cert
