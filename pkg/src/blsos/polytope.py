"""Exponent polytopes P(V), Q(V): constraint systems, exact vertices, convex decompositions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .datum import BLDatum, image_dims
from .exactalg import fmt_frac, rank, solve


class PolytopeError(ValueError):
    pass


class OutsideHull(PolytopeError):
    def __init__(self, msg, row=None):
        super().__init__(msg)
        self.row = row


@dataclass(frozen=True)
class Row:
    coeffs: tuple
    bound: Fraction
    tag: str

    def value(self, p) -> Fraction:
        return sum((c * x for c, x in zip(self.coeffs, p)), Fraction(0))

    def holds(self, p) -> bool:
        return self.value(p) <= self.bound

    def tight(self, p) -> bool:
        return self.value(p) == self.bound

    def to_json(self):
        return {"coeffs": [fmt_frac(c) for c in self.coeffs], "bound": fmt_frac(self.bound), "tag": self.tag}


@dataclass(frozen=True)
class ConstraintSystem:
    """Rows  coeffs . p <= bound  describing a bounded polytope in [0,1]^m."""
    dim: int
    rows: tuple

    def contains(self, p) -> bool:
        return all(r.holds(p) for r in self.rows)

    def violated(self, p):
        return next((r for r in self.rows if not r.holds(p)), None)


@dataclass(frozen=True)
class Vertex:
    p: tuple
    active: tuple

    def to_json(self):
        return {"p": [fmt_frac(x) for x in self.p], "active": list(self.active)}


@dataclass(frozen=True)
class ConvexCombination:
    vertices: tuple
    weights: tuple

    def point(self):
        m = len(self.vertices[0].p)
        return tuple(sum((w * v.p[k] for w, v in zip(self.weights, self.vertices)), Fraction(0))
                     for k in range(m))


def _unit(m, j, c=1):
    return tuple(Fraction(c) if k == j else Fraction(0) for k in range(m))


def _box_rows(m):
    rows = []
    for j in range(m):
        rows.append(Row(_unit(m, j, -1), Fraction(0), f"BOX_LOWER {j}"))
        rows.append(Row(_unit(m, j, 1), Fraction(1), f"BOX_UPPER {j}"))
    return rows


def _dedupe(rows):
    seen, out = set(), []
    for r in rows:
        if all(c == 0 for c in r.coeffs) and r.bound >= 0:
            continue
        key = (r.coeffs, r.bound)
        if key not in seen:
            seen.add(key)
            out.append(r)
    return tuple(out)


def build_q(datum: BLDatum, candidates) -> ConstraintSystem:
    m = datum.m
    rows = _box_rows(m)
    for w in candidates:
        dims = image_dims(datum, w)
        # dim W <= sum_j dim(B_j W) p_j, written in <= sense
        rows.append(Row(tuple(Fraction(-d) for d in dims), Fraction(-w.dim),
                        "SUBSPACE " + ";".join(",".join(str(c) for c in r) for r in w.basis)))
    return ConstraintSystem(m, _dedupe(rows))


def build_p(m: int) -> ConstraintSystem:
    rows = [Row(_unit(m, j, -1), Fraction(0), f"BOX_LOWER {j}") for j in range(m)]
    ones = tuple(Fraction(1) for _ in range(m))
    rows.append(Row(ones, Fraction(1), "SIMPLEX_SUM"))
    rows.append(Row(tuple(-c for c in ones), Fraction(-1), "SIMPLEX_SUM"))
    return ConstraintSystem(m, _dedupe(rows))


def build_systems(datum: BLDatum, candidates) -> tuple[ConstraintSystem, ConstraintSystem]:
    return build_q(datum, candidates), build_p(datum.m)


def enumerate_vertices(system: ConstraintSystem, cap: int = 8) -> list[Vertex]:
    """All basic feasible solutions, by scanning every m-subset of rows."""
    m = system.dim
    if m > cap:
        raise PolytopeError(f"m = {m} exceeds the vertex enumeration cap {cap}")
    if m == 0:
        return [Vertex((), ())]
    found = {}
    for idx in itertools.combinations(range(len(system.rows)), m):
        a = [system.rows[i].coeffs for i in idx]
        if rank(a, m) < m:
            continue
        x = solve(a, [system.rows[i].bound for i in idx])
        if x is None or x in found or not system.contains(x):
            continue
        found[x] = tuple(i for i, r in enumerate(system.rows) if r.tight(x))
    return [Vertex(p, found[p]) for p in sorted(found)]


def decompose_convex(p: Sequence, vertices: Sequence[Vertex],
                     system: ConstraintSystem | None = None) -> ConvexCombination:
    """Exact Caratheodory decomposition; first feasible vertex subset in index order."""
    p = tuple(Fraction(x) for x in p)
    if system is not None:
        bad = system.violated(p)
        if bad is not None:
            raise OutsideHull(f"p violates {bad.tag}", bad)
    m = len(p)
    for size in range(1, m + 2):
        for idx in itertools.combinations(range(len(vertices)), size):
            vs = [vertices[i].p for i in idx]
            a = [[v[k] for v in vs] for k in range(m)] + [[Fraction(1)] * size]
            if rank(a, size) < size:
                continue
            th = solve(a, list(p) + [Fraction(1)])
            if th is None or any(t < 0 for t in th):
                continue
            check = [sum((t * v[k] for t, v in zip(th, vs)), Fraction(0)) for k in range(m)]
            if tuple(check) != p or sum(th) != 1:
                continue
            return ConvexCombination(tuple(vertices[i] for i in idx), tuple(th))
    raise OutsideHull("p is outside the convex hull of the vertices")


def clip_exponents(p: Sequence) -> tuple[tuple, list]:
    p = tuple(Fraction(x) for x in p)
    if any(x < 0 for x in p):
        raise ValueError("exponents must be non-negative")
    return tuple(min(x, Fraction(1)) for x in p), [j for j, x in enumerate(p) if x > 1]


def hadamard_bound(n: int, m: int) -> float:
    """n^m m^(m/2), the bound on vertex denominators from Cramer's rule."""
    return float(n) ** m * float(m) ** (m / 2)
