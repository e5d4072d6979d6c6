"""Exact rational linear algebra over ``fractions.Fraction``.

Subspaces are stored in reduced row echelon form with unit pivots, so two
spanning sets of the same space compare equal structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple  # tuple of Fraction


class DimensionError(ValueError):
    pass


def frac(x) -> Fraction:
    """Parse an int, Fraction or ``"a/b"`` string into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as a rational")


def fmt_frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def vec(xs: Iterable) -> Vector:
    return tuple(frac(x) for x in xs)


def rref(rows: Sequence[Sequence[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; zero rows dropped. Returns (rows, pivot columns)."""
    m = [list(map(frac, r)) for r in rows]
    for r in m:
        if len(r) != ncols:
            raise DimensionError(f"row of length {len(r)} in a {ncols}-column system")
    pivots: list[int] = []
    lead = 0
    for col in range(ncols):
        piv = next((i for i in range(lead, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[lead], m[piv] = m[piv], m[lead]
        inv = 1 / m[lead][col]
        m[lead] = [v * inv for v in m[lead]]
        for i in range(len(m)):
            if i != lead and m[i][col] != 0:
                c = m[i][col]
                m[i] = [a - c * b for a, b in zip(m[i], m[lead])]
        pivots.append(col)
        lead += 1
        if lead == len(m):
            break
    return m[:lead], pivots


def rank(rows: Sequence[Sequence[Fraction]], ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[Vector]:
    """Basis of {x : rows @ x = 0}."""
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, pc in zip(red, pivots):
            x[pc] = -r[f]
        basis.append(tuple(x))
    return basis


def solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Vector | None:
    """One exact solution of rows @ x = rhs (free variables set to 0), or None."""
    ncols = len(rows[0]) if rows else 0
    aug = [list(r) + [frac(b)] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for r, pc in zip(red, pivots):
        x[pc] = r[ncols]
    return tuple(x)


def mat_vec(matrix: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    return tuple(sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in matrix)


@dataclass(frozen=True)
class Subspace:
    ambient_dim: int
    basis: tuple  # rows of the RREF basis

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(next(i for i, v in enumerate(r) if v != 0) for r in self.basis)

    def contains(self, v: Sequence[Fraction]) -> bool:
        return rank(list(self.basis) + [list(v)], self.ambient_dim) == self.dim

    def coords(self, v: Sequence[Fraction]) -> Vector:
        """Coordinates of v in the RREF basis (read off at pivot columns)."""
        v = vec(v)
        c = tuple(v[p] for p in self.pivots)
        back = tuple(sum((ci * r[k] for ci, r in zip(c, self.basis)), Fraction(0))
                     for k in range(self.ambient_dim))
        if back != v:
            raise DimensionError("vector is not in the subspace")
        return c

    def from_coords(self, c: Sequence[Fraction]) -> Vector:
        return tuple(sum((ci * r[k] for ci, r in zip(c, self.basis)), Fraction(0))
                     for k in range(self.ambient_dim))

    def is_subspace_of(self, other: "Subspace") -> bool:
        return all(other.contains(r) for r in self.basis)

    def sort_key(self):
        # smaller dimension first, then e1 before e2 before e3 ...
        return (self.dim, tuple(tuple(-x for x in r) for r in self.basis))

    def __repr__(self):
        rows = ["(" + ",".join(str(x) for x in r) + ")" for r in self.basis]
        return f"Subspace({self.ambient_dim}; " + " ".join(rows) + ")"


def canonicalize(vectors: Iterable[Sequence], ambient_dim: int) -> Subspace:
    vs = [vec(v) for v in vectors]
    for v in vs:
        if len(v) != ambient_dim:
            raise DimensionError(f"vector of length {len(v)} in ambient dimension {ambient_dim}")
    red, _ = rref(vs, ambient_dim)
    return Subspace(ambient_dim, tuple(tuple(r) for r in red))


def zero_space(n: int) -> Subspace:
    return Subspace(n, ())


def full_space(n: int) -> Subspace:
    return canonicalize([[int(i == k) for k in range(n)] for i in range(n)], n)


def _check_ambient(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim:
        raise DimensionError(f"ambient mismatch {a.ambient_dim} vs {b.ambient_dim}")


def span_sum(a: Subspace, b: Subspace) -> Subspace:
    _check_ambient(a, b)
    return canonicalize(a.basis + b.basis, a.ambient_dim)


def intersect(a: Subspace, b: Subspace) -> Subspace:
    _check_ambient(a, b)
    if a.dim == 0 or b.dim == 0:
        return zero_space(a.ambient_dim)
    # x = sum c_i a_i = sum d_k b_k  <=>  [A^T | -B^T] (c, d) = 0
    n = a.ambient_dim
    rows = [[a.basis[i][k] for i in range(a.dim)] + [-b.basis[j][k] for j in range(b.dim)]
            for k in range(n)]
    sols = nullspace(rows, a.dim + b.dim)
    return canonicalize([a.from_coords(s[:a.dim]) for s in sols], n)


def lattice_ops(a: Subspace, b: Subspace, op: str) -> Subspace:
    if op == "sum":
        return span_sum(a, b)
    if op == "intersect":
        return intersect(a, b)
    raise ValueError(f"unknown lattice op {op!r}")


@dataclass(frozen=True)
class LinearMap:
    matrix: tuple  # codomain_dim rows of domain_dim entries
    domain_dim: int
    codomain_dim: int

    def __post_init__(self):
        if len(self.matrix) != self.codomain_dim or any(len(r) != self.domain_dim for r in self.matrix):
            raise DimensionError("matrix shape does not match codomain_dim x domain_dim")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], domain_dim: int | None = None) -> "LinearMap":
        m = tuple(vec(r) for r in rows)
        if domain_dim is None:
            if not m:
                raise DimensionError("empty matrix needs an explicit domain_dim")
            domain_dim = len(m[0])
        return cls(m, domain_dim, len(m))

    def __call__(self, v: Sequence[Fraction]) -> Vector:
        if len(v) != self.domain_dim:
            raise DimensionError("vector length does not match domain")
        return mat_vec(self.matrix, v)

    @property
    def rank(self) -> int:
        return rank(self.matrix, self.domain_dim)


def kernel_image(bmap: LinearMap, restrict_to: Subspace | None = None) -> tuple[Subspace, Subspace]:
    n = bmap.domain_dim
    if restrict_to is None:
        restrict_to = full_space(n)
    if restrict_to.ambient_dim != n:
        raise DimensionError("restriction ambient does not match map domain")
    ker = intersect(canonicalize(nullspace(bmap.matrix, n), n), restrict_to)
    img = canonicalize([bmap(r) for r in restrict_to.basis], bmap.codomain_dim)
    return ker, img


def complement(w: Subspace, v: Subspace) -> Subspace:
    """Deterministic complement of w inside v: the v-basis rows at non-pivot coordinates of w."""
    _check_ambient(w, v)
    if not w.is_subspace_of(v):
        raise DimensionError("W is not contained in V")
    wc = [v.coords(r) for r in w.basis]
    _, piv = rref(wc, v.dim)
    return canonicalize([v.basis[k] for k in range(v.dim) if k not in piv], v.ambient_dim)


def split_coords(x: Sequence[Fraction], a: Subspace, b: Subspace) -> tuple[Vector, Vector]:
    """Coordinates (in the RREF bases) of x = a_part + b_part for a direct sum a + b."""
    cols = list(a.basis) + list(b.basis)
    rows = [[c[k] for c in cols] for k in range(a.ambient_dim)]
    sol = solve(rows, vec(x)) if cols else ()
    if sol is None:
        raise DimensionError("vector is not in the direct sum")
    if cols and mat_vec(rows, sol) != vec(x):
        raise DimensionError("vector is not in the direct sum")
    if not cols and any(vec(x)):
        raise DimensionError("vector is not in the direct sum")
    return tuple(sol[:a.dim]), tuple(sol[a.dim:])


@dataclass(frozen=True)
class RestrictQuotient:
    """Factorization of a map B along V = W + U and B(V) = B(W) + C."""
    restricted: LinearMap  # W coords -> B(W) coords
    quotient: LinearMap    # U coords -> C coords
    w: Subspace
    u: Subspace
    image_w: Subspace
    c: Subspace
    bmap: LinearMap = field(repr=False)

    def split_domain(self, x) -> tuple[Vector, Vector]:
        return split_coords(x, self.w, self.u)

    def split_codomain(self, y) -> tuple[Vector, Vector]:
        return split_coords(y, self.image_w, self.c)


def restrict_and_quotient(bmap: LinearMap, w: Subspace, v: Subspace) -> RestrictQuotient:
    if not w.is_subspace_of(v):
        raise DimensionError("W is not contained in V")
    u = complement(w, v)
    _, img_w = kernel_image(bmap, w)
    _, img_v = kernel_image(bmap, v)
    c = complement(img_w, img_v)
    r_cols = [img_w.coords(bmap(b)) for b in w.basis]
    restricted = LinearMap(tuple(tuple(col[i] for col in r_cols) for i in range(img_w.dim)),
                           w.dim, img_w.dim)
    q_cols = [split_coords(bmap(b), img_w, c)[1] for b in u.basis]
    quotient = LinearMap(tuple(tuple(col[i] for col in q_cols) for i in range(c.dim)),
                         u.dim, c.dim)
    return RestrictQuotient(restricted, quotient, w, u, img_w, c, bmap)
