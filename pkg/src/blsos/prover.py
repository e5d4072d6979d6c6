"""The proof pipeline: clip, interpolate between polytope vertices, split along
critical subspaces and close with the {0,1} and single-point base cases."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .builder import (Bound, BuildError, P, ProofBuilder, finish_datum, func_atom, posy,
                      slack_atom, mono_div)
from .certificate import Certificate
from .datum import (BLDatum, DomainSpec, ExponentVector, is_feasible, slack, subspace_candidates)
from .exactalg import (DimensionError, Subspace, full_space, restrict_and_quotient, split_coords)
from .holder import MAX_DENOMINATOR, holder_fast, holder_general, is_dyadic, norm_monotone, _cs_for_datum
from .polyring import ONE, mono_mul, mono_pow
from .polytope import build_p, build_q, clip_exponents, decompose_convex, enumerate_vertices


class ProverError(RuntimeError):
    def __init__(self, status: str, message: str, witness=None):
        super().__init__(message)
        self.status = status  # INFEASIBLE | UNKNOWN | CAP | PROPOSITION | INJECTIVITY | SPLIT
        self.witness = witness


class SplitError(ValueError):
    pass


@dataclass
class SplitData:
    w: Subspace
    u: Subspace
    datum_w: BLDatum
    datum_q: BLDatum
    point_of: dict          # (a, b) -> x
    inner_y: list           # per j: (b, z) -> y in V_j
    cosets: list            # per j: c -> sorted points of V_j over c
    quotient_key: list      # per j: b -> c
    aux_vars: dict = field(default_factory=dict)


def _points_datum(n, maps, exponents, points) -> BLDatum:
    return BLDatum(n, tuple(maps), exponents, DomainSpec("points", n, explicit=tuple(sorted(points))))


def split_datum(datum: BLDatum, w: Subspace) -> SplitData:
    """Split the domain along W and a complement U; the domain must be a product."""
    eff = datum.span_of_differences()
    if w.dim == 0 or eff.is_subspace_of(w):
        raise SplitError("W must be a nonzero proper subspace of the span of the domain")
    n = datum.n
    v = full_space(n)
    rqs = [restrict_and_quotient(b, w, v) for b in datum.maps]
    u = rqs[0].u if rqs else v
    point_of = {}
    for x in datum.points():
        point_of[split_coords(x, w, u)] = x
    a_pts = sorted({a for a, _ in point_of})
    b_pts = sorted({b for _, b in point_of})
    if len(a_pts) * len(b_pts) != len(point_of):
        raise SplitError("domain not product-decomposable along W")
    inner_y, cosets, qkey = [], [], []
    for j, rq in enumerate(rqs):
        cos: dict = {}
        for y in datum.image_points(j):
            cos.setdefault(rq.split_codomain(y)[1], []).append(y)
        iy, qk = {}, {}
        for b in b_pts:
            c = rq.quotient(b)
            ys = set()
            for a in a_pts:
                y = datum.image(j, point_of[(a, b)])
                z = rq.restricted(a)
                if iy.setdefault((b, z), y) != y:
                    raise SplitError("restricted map is inconsistent with the domain")
                ys.add(y)
            if ys != set(cos.get(c, ())):
                raise SplitError("domain not product-decomposable along W (coset images differ)")
            qk[b] = c
        inner_y.append(iy)
        cosets.append({c: sorted(ys) for c, ys in cos.items()})
        qkey.append(qk)
    dw = _points_datum(w.dim, [rq.restricted for rq in rqs], datum.exponents, a_pts)
    dq = _points_datum(u.dim, [rq.quotient for rq in rqs], datum.exponents, b_pts)
    return SplitData(w, u, dw, dq, point_of, inner_y, cosets, qkey)


def critical_subspaces(datum: BLDatum, p, candidates):
    eff = datum.span_of_differences().dim
    for w in candidates:
        if 0 < w.dim < eff and slack(datum, w, p) == 0:
            yield w


def find_critical_subspace(datum: BLDatum, p, candidates=None):
    if candidates is None:
        candidates = subspace_candidates(datum)
    return next(critical_subspaces(datum, tuple(Fraction(x) for x in p), candidates), None)


def _fmt_space(w: Subspace) -> str:
    return "span(" + ";".join(",".join(str(c) for c in r) for r in w.basis) + ")"


def _fmt_p(p) -> list:
    return [f"{q.numerator}/{q.denominator}" for q in p]


class _Run:
    def __init__(self, budget: int = 3):
        self.b = ProofBuilder()
        self.budget = budget
        self.trace: list = []
        self._geo: dict = {}

    def geometry(self, d: BLDatum):
        if d not in self._geo:
            cands = subspace_candidates(d, self.budget)
            q = build_q(d, cands)
            self._geo[d] = (cands, q, enumerate_vertices(q))
        return self._geo[d]

    def lo_terms(self, d: BLDatum, phis):
        out = []
        for x in d.points():
            m = ONE
            for j in range(d.m):
                m = mono_mul(m, phis[j][d.image(j, x)])
            out.append(m)
        return out

    def values(self, d: BLDatum, phis, j):
        return [phis[j][y] for y in d.image_points(j)]

    def expected_hi(self, d: BLDatum, phis, p):
        hi = P(ONE)
        for j in range(d.m):
            hi = hi * self.b.norm(self.values(d, phis, j), p[j])
        return hi

    # -- recursion -------------------------------------------------------------

    def point(self, d: BLDatum, p, phis, depth=0) -> Bound:
        """sum_x prod f_j(B_j x) <= prod ||f_j||_(1/p_j) for the given values."""
        keep, c = [], ONE
        for j in range(d.m):
            vals = self.values(d, phis, j)
            if p[j] == 0:
                if any(v != ONE for v in vals):
                    raise BuildError("zero exponent on a nonconstant function")
            elif len(vals) == 1:
                c = mono_mul(c, vals[0])
            else:
                keep.append(j)
        dk = BLDatum(d.n, tuple(d.maps[j] for j in keep), ExponentVector(tuple(p[j] for j in keep)), d.domain)
        pk = dk.p
        phk = [phis[j] for j in keep]
        npts = len(d.points())
        if not keep:
            if npts != 1:
                raise ProverError("INFEASIBLE", "constant functions on several points cannot satisfy the bound")
            bound = self.b.trivial(P(ONE))
        else:
            cands, q, verts = self.geometry(dk)
            bad = q.violated(pk)
            if bad is not None:
                raise ProverError("INFEASIBLE", f"exponents leave the polytope at {bad.tag}")
            if any(v.p == pk for v in verts):
                bound = self.vertex(dk, pk, phk, depth)
            else:
                comb = decompose_convex(pk, verts, q)
                self.trace.append({"depth": depth, "step": "interpolate", "p": _fmt_p(pk),
                                   "vertices": [_fmt_p(v.p) for v in comb.vertices],
                                   "weights": _fmt_p(comb.weights)})
                terms, bounds, weights = [], [], []
                for vx, th in zip(comb.vertices, comb.weights):
                    if th == 0:
                        continue
                    phv = [{y: mono_pow(m, vx.p[j] / pk[j]) for y, m in phk[j].items()} for j in range(dk.m)]
                    bounds.append(self.point(dk, vx.p, phv, depth + 1))
                    terms.append(self.lo_terms(dk, phv))
                    weights.append(th)
                bound = self.b.holder_multi(terms, bounds, weights)
        bound = self.b.scale(bound, c)
        lo = posy(self.lo_terms(d, phis))
        hi = self.expected_hi(d, phis, p)
        if bound.lo != lo or bound.hi != hi:
            raise BuildError("subproof does not match its instance")
        return bound

    def vertex(self, d: BLDatum, p, phis, depth) -> Bound:
        if all(x in (0, 1) for x in p):
            return self.zero_one(d, p, phis, depth)
        cands, _, _ = self.geometry(d)
        for w in critical_subspaces(d, p, cands):
            try:
                sd = split_datum(d, w)
            except SplitError:
                continue
            self.trace.append({"depth": depth, "step": "split", "p": _fmt_p(p), "W": _fmt_space(w),
                               "dim": w.dim})
            return self.split(d, p, phis, sd, depth)
        raise ProverError("PROPOSITION", f"Proposition violated: vertex {_fmt_p(p)} has no usable "
                          "critical subspace and is not in {0,1}^m")

    def split(self, d: BLDatum, p, phis, sd: SplitData, depth) -> Bound:
        b = self.b
        h = []
        for j in range(d.m):
            hj = {}
            for c, ys in sd.cosets[j].items():
                hj[c] = b.norm([phis[j][y] for y in ys], p[j]).as_monomial()[1]
            h.append(hj)
        for j in range(d.m):
            for c, ys in sd.cosets[j].items():
                m = h[j][c]
                if len(m) == 1 and m[0][0].family == "A":
                    sd.aux_vars[(j, c)] = m[0][0]
        inner = []
        for bq in sd.datum_q.points():
            php = [{z: phis[j][y] for (bb, z), y in sd.inner_y[j].items() if bb == bq} for j in range(d.m)]
            ib = self.point(sd.datum_w, p, php, depth + 1)
            want = P(ONE)
            for j in range(d.m):
                want = want * P(h[j][sd.quotient_key[j][bq]])
            if ib.hi != want:
                raise BuildError("inner bound does not end at the coset norms")
            inner.append(ib)
        total = b.add_bounds(inner)
        qb = self.point(sd.datum_q, p, h, depth + 1)
        return b.chain(total, qb)

    def zero_one(self, d: BLDatum, p, phis, depth) -> Bound:
        ones = [j for j in range(d.m) if p[j] == 1]
        keys = [tuple(d.image(j, x) for j in ones) for x in d.points()]
        if len(set(keys)) != len(keys):
            raise ProverError("INJECTIVITY", "joint map of the exponent-one maps is not injective on the domain")
        self.trace.append({"depth": depth, "step": "zero_one", "p": _fmt_p(p)})
        b = self.b
        lo = posy(self.lo_terms(d, phis))
        prod = P(ONE)
        for j in range(d.m):
            prod = prod * posy(self.values(d, phis, j)) if p[j] == 1 else prod
        left = prod - lo
        if any(c < 0 for c in left.terms.values()):
            raise BuildError("leftover of the {0,1} case has a negative coefficient")
        bound = Bound(b.nonneg(left), lo, prod)
        return b.relabel(bound, hi=self.expected_hi(d, phis, p))


def _holder_shape(datum: BLDatum) -> bool:
    npts = len(datum.points())
    return (datum.m == 2 and sum(datum.p) == 1 and all(0 < q < 1 for q in datum.p)
            and all(len(datum.image_points(j)) == npts for j in range(2)))


def _prove_holder_datum(datum: BLDatum) -> Certificate:
    pts = datum.points()
    f = [func_atom(0, datum.image(0, x)) for x in pts]
    g = [func_atom(1, datum.image(1, x)) for x in pts]
    if datum.p[0] == datum.p[1]:
        cert = _cs_for_datum(datum, f, g)
        cert.meta["trace"] = [{"depth": 0, "step": "cauchy_schwarz"}]
        return cert
    b = ProofBuilder()
    if is_dyadic(datum.exponents.s):
        bound = holder_fast(b, [f, g], datum.p)
        b.meta["path"] = "fast"
    else:
        bound = holder_general(b, [f, g], datum.p)
        b.meta["path"] = "general"
    b.meta["trace"] = [{"depth": 0, "step": "holder"}]
    return finish_datum(b, bound, datum)


def _check_ready(datum: BLDatum, budget: int, force: bool):
    if datum.exponents.s > MAX_DENOMINATOR:
        raise ProverError("CAP", f"exponent denominator {datum.exponents.s} exceeds the cap {MAX_DENOMINATOR}")
    feas = is_feasible(datum, subspace_candidates(datum, budget))
    if feas.status == "INFEASIBLE":
        raise ProverError("INFEASIBLE", "exponents violate the dimension condition", feas.witness)
    if feas.status == "UNKNOWN" and not force:
        raise ProverError("UNKNOWN", "subspace search hit its budget; rerun with force to try anyway")


def prove(datum: BLDatum, budget: int = 3, force: bool = False, shortcut: bool = True) -> Certificate:
    """Certificate for  sum_x prod_j f_j(B_j x) <= prod_j ||f_j||_(1/p_j)."""
    _check_ready(datum, budget, force)
    if shortcut and _holder_shape(datum):
        return _prove_holder_datum(datum)
    run = _Run(budget)
    b = run.b
    m = datum.m
    phis = [{y: func_atom(j, y) for y in datum.image_points(j)} for j in range(m)]
    zeros = [j for j in range(m) if datum.p[j] == 0]
    live = [j for j in range(m) if datum.p[j] > 0]
    clipped_p, clipped = clip_exponents(datum.p)
    red = BLDatum(datum.n, tuple(datum.maps[j] for j in live),
                  ExponentVector(tuple(clipped_p[j] for j in live)), datum.domain)
    bound = run.point(red, red.p, [phis[j] for j in live])
    # norms of clipped indices grow back from ||f||_1 to ||f||_(1/p)
    for j in clipped:
        vals = run.values(datum, phis, j)
        if len(vals) == 1:
            continue
        one = b.norm(vals, 1)
        mono = b.relabel(norm_monotone(b, vals, datum.p[j]), lo=one)
        rest = mono_div(bound.hi.as_monomial()[1], one.as_monomial()[1])
        bound = b.chain(bound, b.scale(mono, rest))
        run.trace.append({"depth": 0, "step": "norm_monotone", "index": j, "p": _fmt_p([datum.p[j]])})
    if zeros:
        bound = _attach_slacks(run, datum, phis, zeros, live, bound)
    b.meta["trace"] = run.trace
    return finish_datum(b, bound, datum)


def _attach_slacks(run: _Run, datum, phis, zeros, live, bound: Bound) -> Bound:
    """f_j(y) <= t_j for p_j = 0 turns the reduced bound into one with prod t_j."""
    b = run.b
    hyp = {}
    for j in zeros:
        for y in datum.image_points(j):
            name = f"sup{j}[{','.join(str(int(c)) for c in y)}]"
            hyp[(j, y)] = b.hypothesis(name, P(slack_atom(j)) - P(phis[j][y]))
    parts = []
    lo_full = []
    for x in datum.points():
        rest = ONE
        for j in live:
            rest = mono_mul(rest, phis[j][datum.image(j, x)])
        a = [phis[j][datum.image(j, x)] for j in zeros]
        full = rest
        for m in a:
            full = mono_mul(full, m)
        lo_full.append(full)
        for i, j in enumerate(zeros):
            coef = rest
            for m in a[:i]:
                coef = mono_mul(coef, m)
            for k in zeros[i + 1:]:
                coef = mono_mul(coef, slack_atom(k))
            parts.append(b.mul(hyp[(j, datum.image(j, x))], b.nonneg(P(coef))))
    tprod = ONE
    for j in zeros:
        tprod = mono_mul(tprod, slack_atom(j))
    scaled = b.scale(bound, tprod)
    step = b.add(b.add_all(parts), scaled.step)
    run.trace.append({"depth": 0, "step": "sup_slack", "indices": zeros})
    return Bound(step, posy(lo_full), scaled.hi)


def prove_vertex(datum: BLDatum, p=None, budget: int = 3) -> Certificate:
    """Certificate at a vertex of Q(V) or of the simplex P(V)."""
    p = datum.p if p is None else tuple(Fraction(x) for x in p)
    d = datum.with_exponents(p)
    cands = subspace_candidates(d, budget)
    verts = {v.p for v in enumerate_vertices(build_q(d, cands))}
    verts |= {v.p for v in enumerate_vertices(build_p(d.m))}
    if d.p not in verts:
        raise ProverError("PROPOSITION", f"{_fmt_p(d.p)} is not a vertex")
    return prove(d, budget, shortcut=False)


def prove_zero_one(datum: BLDatum, p=None, budget: int = 3) -> Certificate:
    p = datum.p if p is None else tuple(Fraction(x) for x in p)
    if any(x not in (0, 1) for x in p):
        raise ProverError("PROPOSITION", "prove_zero_one needs p in {0,1}^m")
    d = datum.with_exponents(p)
    ones = [j for j in range(d.m) if p[j] == 1]
    keys = [tuple(d.image(j, x) for j in ones) for x in d.points()]
    if len(set(keys)) != len(keys):
        raise ProverError("INJECTIVITY", "joint map of the exponent-one maps is not injective on the domain")
    return prove(d, budget, shortcut=False)
