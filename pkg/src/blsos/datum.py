"""Brascamp-Lieb data: validation, JSON I/O and the subspace candidate search."""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactalg import (LinearMap, Subspace, canonicalize, fmt_frac, frac, full_space,
                       intersect, kernel_image, span_sum, vec, zero_space)


class DatumError(ValueError):
    pass


def lcm_all(xs) -> int:
    out = 1
    for x in xs:
        out = out * x // math.gcd(out, x)
    return out


@dataclass(frozen=True)
class ExponentVector:
    p: tuple

    @property
    def s(self) -> int:
        return lcm_all(q.denominator for q in self.p)

    @property
    def s_list(self) -> tuple:
        return tuple(int(q * self.s) for q in self.p)


@dataclass(frozen=True)
class DomainSpec:
    kind: str  # "box" or "points"
    n: int
    side: int = 0
    explicit: tuple = ()

    def points(self) -> list:
        if self.kind == "box":
            return [tuple(Fraction(c) for c in pt) for pt in itertools.product(range(self.side), repeat=self.n)]
        return list(self.explicit)

    def to_json(self):
        if self.kind == "box":
            return {"box": self.side}
        return {"points": [[_num(c) for c in pt] for pt in self.explicit]}


def _num(q: Fraction):
    return q.numerator if q.denominator == 1 else fmt_frac(q)


@dataclass(frozen=True)
class BLDatum:
    n: int
    maps: tuple  # LinearMap per j
    exponents: ExponentVector
    domain: DomainSpec
    scales: tuple = field(default=(), compare=False)

    @property
    def m(self) -> int:
        return len(self.maps)

    @property
    def p(self) -> tuple:
        return self.exponents.p

    def with_exponents(self, p) -> "BLDatum":
        return BLDatum(self.n, self.maps, ExponentVector(tuple(frac(x) for x in p)), self.domain, self.scales)

    def points(self) -> list:
        return self.domain.points()

    def image(self, j: int, x) -> tuple:
        return self.maps[j](x)

    def image_points(self, j: int) -> list:
        return sorted({self.maps[j](x) for x in self.points()})

    def span_of_differences(self) -> Subspace:
        pts = self.points()
        x0 = pts[0]
        return canonicalize([tuple(a - b for a, b in zip(x, x0)) for x in pts[1:]], self.n)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "maps": [[[fmt_frac(c) for c in row] for row in b.matrix] for b in self.maps],
            "p": [fmt_frac(q) for q in self.p],
            "domain": self.domain.to_json(),
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def validate(raw) -> BLDatum:
    """Check a raw (JSON-like) datum and normalize it to integer maps and points."""
    try:
        n = int(raw["n"])
        maps_raw = raw["maps"]
        p = tuple(frac(x) for x in raw["p"])
        dom = raw["domain"]
    except (KeyError, TypeError) as exc:
        raise DatumError(f"malformed datum: {exc}") from exc
    if n < 0:
        raise DatumError("n must be non-negative")
    if len(p) != len(maps_raw):
        raise DatumError(f"{len(maps_raw)} maps but {len(p)} exponents")
    for j, q in enumerate(p):
        if q < 0:
            raise DatumError(f"negative exponent p_{j + 1} = {q}")
    maps, map_scales = [], []
    for j, rows in enumerate(maps_raw):
        rows = [vec(r) for r in rows]
        if any(len(r) != n for r in rows):
            raise DatumError(f"map {j + 1}: rows must have length n = {n}")
        c = lcm_all(x.denominator for r in rows for x in r)
        b = LinearMap(tuple(tuple(x * c for x in r) for r in rows), n, len(rows))
        if b.rank < b.codomain_dim:
            raise DatumError(f"map {j + 1} is not surjective: rank {b.rank} < {b.codomain_dim} "
                             f"(deficit {b.codomain_dim - b.rank})")
        maps.append(b)
        map_scales.append(c)
    if "box" in dom:
        k = int(dom["box"])
        if k < 1:
            raise DatumError("empty domain")
        domain = DomainSpec("box", n, side=k)
        pscale = 1
    elif "points" in dom:
        pts = [vec(pt) for pt in dom["points"]]
        if not pts:
            raise DatumError("empty domain")
        if any(len(pt) != n for pt in pts):
            raise DatumError("domain points must have length n")
        if len(set(pts)) != len(pts):
            raise DatumError("domain points must be distinct")
        pscale = lcm_all(x.denominator for pt in pts for x in pt)
        domain = DomainSpec("points", n, explicit=tuple(tuple(x * pscale for x in pt) for pt in pts))
    else:
        raise DatumError("domain must be {'box': k} or {'points': [...]}")
    return BLDatum(n, tuple(maps), ExponentVector(p), domain, (tuple(map_scales), pscale))


def load_datum(path) -> BLDatum:
    with open(path) as fh:
        return validate(json.load(fh))


# -- subspace candidates ----------------------------------------------------

@dataclass
class Candidates:
    spaces: list
    truncated: bool

    def __iter__(self):
        return iter(self.spaces)

    def __len__(self):
        return len(self.spaces)


def subspace_candidates(datum: BLDatum, budget: int = 3) -> Candidates:
    """Seed family closed under sum and intersection for at most ``budget`` rounds.

    Every space is intersected with the span of the domain differences, so only
    subspaces of V itself are considered.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    n = datum.n
    eff = datum.span_of_differences()
    seeds = {zero_space(n), full_space(n), eff}
    for b in datum.maps:
        seeds.add(kernel_image(b)[0])
    for r in range(1, n + 1):
        for cols in itertools.combinations(range(n), r):
            seeds.add(canonicalize([[int(i == c) for i in range(n)] for c in cols], n))
    family = {intersect(s, eff) for s in seeds}
    truncated = True
    for _ in range(budget):
        cur = sorted(family, key=Subspace.sort_key)
        new = set()
        for a, b in itertools.combinations(cur, 2):
            for c in (span_sum(a, b), intersect(a, b)):
                if c not in family:
                    new.add(c)
        if not new:
            truncated = False
            break
        family |= new
    return Candidates(sorted(family, key=Subspace.sort_key), truncated)


def image_dims(datum: BLDatum, w: Subspace) -> tuple:
    return tuple(kernel_image(b, w)[1].dim for b in datum.maps)


def slack(datum: BLDatum, w: Subspace, p=None) -> Fraction:
    """sum_j p_j dim(B_j W) - dim W; negative means W violates the condition."""
    p = datum.p if p is None else p
    return sum((q * d for q, d in zip(p, image_dims(datum, w))), Fraction(0)) - w.dim


@dataclass(frozen=True)
class Feasibility:
    status: str  # FEASIBLE | INFEASIBLE | UNKNOWN
    witness: Subspace | None = None

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.witness is not None:
            out["witness"] = [[fmt_frac(c) for c in r] for r in self.witness.basis]
            out["witness_dim"] = self.witness.dim
        return out


def is_feasible(datum: BLDatum, candidates: Candidates | None = None) -> Feasibility:
    if candidates is None:
        candidates = subspace_candidates(datum)
    worst, worst_gap = None, Fraction(0)
    for w in candidates:
        gap = slack(datum, w)
        if gap < worst_gap:
            worst, worst_gap = w, gap
    if worst is not None:
        # most violated candidate; ties keep the earliest in canonical order
        return Feasibility("INFEASIBLE", worst)
    return Feasibility("UNKNOWN" if candidates.truncated else "FEASIBLE")
