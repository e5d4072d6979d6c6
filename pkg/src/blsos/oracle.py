"""Brute-force checks that never look at a certificate.

Function values are sampled as L-th powers u^L with L = lcm(s_j), so every
fractional norm raised to the power s is an exact integer.
"""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .datum import BLDatum, lcm_all
from .exactalg import fmt_frac


@dataclass
class Assignment:
    """f_j(y) = u_j(y)^L for every y in V_j."""
    roots: list  # per j: dict y -> nonnegative Fraction u
    power: int

    def value(self, j, y) -> Fraction:
        return self.roots[j][y] ** self.power

    def to_json(self) -> dict:
        return {"power": self.power,
                "tables": [[{"y": [fmt_frac(c) for c in y], "f": fmt_frac(self.value(j, y))}
                            for y in sorted(t)] for j, t in enumerate(self.roots)]}


def root_power(datum: BLDatum) -> int:
    return lcm_all([sj for sj in datum.exponents.s_list if sj] or [1])


class _Layout:
    """Image points per map and, for each x in V, the index of B_j x in them."""

    def __init__(self, datum: BLDatum):
        self.images = [datum.image_points(j) for j in range(datum.m)]
        pos = [{y: i for i, y in enumerate(ys)} for ys in self.images]
        self.rows = [tuple(pos[j][datum.image(j, x)] for j in range(datum.m)) for x in datum.points()]


_LAYOUTS: dict = {}


def _layout(datum: BLDatum) -> _Layout:
    key = datum.digest()
    if key not in _LAYOUTS:
        _LAYOUTS[key] = _Layout(datum)
    return _LAYOUTS[key]


def sides(datum: BLDatum, a: Assignment) -> tuple:
    """(LHS^s, RHS^s) computed exactly."""
    ev = datum.exponents
    s, L = ev.s, a.power
    lay = _layout(datum)
    us = [[a.roots[j][y] for y in ys] for j, ys in enumerate(lay.images)]
    rhs = Fraction(1)
    for j, sj in enumerate(ev.s_list):
        if sj == 0:
            rhs *= max(us[j]) ** (L * s)
        else:
            # f^(s/s_j) = u^(L s / s_j), an integer power because s_j | L
            rhs *= sum(u ** (L * s // sj) for u in us[j]) ** sj
    fs = [[u ** L for u in row] for row in us]
    lhs = 0
    for idx in lay.rows:
        t = 1
        for j, i in enumerate(idx):
            t *= fs[j][i]
            if not t:
                break
        lhs += t
    return Fraction(lhs) ** s, rhs


def gap(datum: BLDatum, a: Assignment) -> Fraction:
    lhs, rhs = sides(datum, a)
    return rhs - lhs


def constant_assignment(datum: BLDatum, value=1) -> Assignment:
    return Assignment([{y: Fraction(value) for y in datum.image_points(j)} for j in range(datum.m)],
                      root_power(datum))


def random_assignment(datum: BLDatum, rng: random.Random, top: int = 3) -> Assignment:
    return Assignment([{y: rng.randint(0, top) for y in ys} for ys in _layout(datum).images],
                      root_power(datum))


@dataclass
class CheckReport:
    trials: int
    violations: int
    min_gap: Fraction | None
    witness: Assignment | None = None

    def to_json(self) -> dict:
        out = {"trials": self.trials, "violations": self.violations,
               "min_gap": None if self.min_gap is None else fmt_frac(self.min_gap)}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def _chunk(datum: BLDatum, seed: int, start: int, stop: int):
    viol, best, first = 0, None, None
    for t in range(start, stop):
        a = random_assignment(datum, random.Random(f"{seed}:{t}"))
        g = gap(datum, a)
        if best is None or g < best:
            best = g
        if g < 0:
            viol += 1
            if first is None:
                first = a
    return viol, best, first


def random_check(datum: BLDatum, trials: int = 1000, seed: int = 0, workers: int = 1) -> CheckReport:
    """Sample exact random assignments and count violations of LHS^s <= RHS^s."""
    bounds = [(k * trials // max(workers, 1), (k + 1) * trials // max(workers, 1)) for k in range(max(workers, 1))]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_chunk, *zip(*[(datum, seed, a, b) for a, b in bounds])))
    else:
        parts = [_chunk(datum, seed, a, b) for a, b in bounds]
    viol = sum(p[0] for p in parts)
    gaps = [p[1] for p in parts if p[1] is not None]
    first = next((p[2] for p in parts if p[2] is not None), None)
    return CheckReport(trials, viol, min(gaps) if gaps else None, first)


def _indicator(datum: BLDatum, subset) -> Assignment:
    roots = []
    for j in range(datum.m):
        hit = {datum.image(j, x) for x in subset}
        roots.append({y: int(y in hit) for y in datum.image_points(j)})
    return Assignment(roots, root_power(datum))


def scaling_family(datum: BLDatum):
    """Indicators of the sub-boxes of side k = 2, 4, 8, 16 anchored at the domain minimum."""
    pts = datum.points()
    lows = [min(x[i] for x in pts) for i in range(datum.n)]
    seen = set()
    for k in (2, 4, 8, 16):
        sub = tuple(x for x in pts if all(lows[i] <= x[i] < lows[i] + k for i in range(datum.n)))
        if sub and sub not in seen:
            seen.add(sub)
            yield k, _indicator(datum, sub)


def find_violation(datum: BLDatum, seed: int = 0, trials: int = 200, steps: int = 20) -> Assignment | None:
    """Scaling family first, then seeded random restarts with greedy local moves."""
    for _, a in scaling_family(datum):
        if gap(datum, a) < 0:
            return a
    rng = random.Random(seed)
    keys = [(j, y) for j, ys in enumerate(_layout(datum).images) for y in ys]
    for _ in range(trials):
        a = random_assignment(datum, rng)
        g = gap(datum, a)
        for _ in range(steps):
            if g < 0:
                return a
            j, y = rng.choice(keys)
            old = a.roots[j][y]
            a.roots[j][y] = rng.randint(0, 3)
            g2 = gap(datum, a)
            if g2 <= g:
                g = g2
            else:
                a.roots[j][y] = old
        if g < 0:
            return a
    return None


# -- pseudo-expectations -----------------------------------------------------------

class IncompleteTable(KeyError):
    pass


@dataclass
class MomentTable:
    """Values of a linear functional on monomials; monomials are sorted (name, exp) tuples."""
    degree: int
    values: dict
    variables: tuple = ()

    def __post_init__(self):
        if not self.variables:
            self.variables = tuple(sorted({v for m in self.values for v, _ in m}))

    def get(self, m):
        if m not in self.values:
            name = "*".join(f"{v}^{e}" for v, e in m) or "1"
            raise IncompleteTable(f"missing moment for monomial {name}")
        return Fraction(self.values[m])


def monomials_upto(variables, d: int) -> list:
    out = []
    for deg in range(d + 1):
        for combo in itertools.combinations_with_replacement(variables, deg):
            acc: dict = {}
            for v in combo:
                acc[v] = acc.get(v, 0) + 1
            out.append(tuple(sorted(acc.items())))
    return out


def mono_product(a, b):
    acc = dict(a)
    for v, e in b:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted(acc.items()))


def table_from_distribution(support, probs, variables, d: int) -> MomentTable:
    """Moments of a finitely supported distribution over assignments (dicts var -> value)."""
    vals = {}
    for m in monomials_upto(variables, d):
        tot = Fraction(0)
        for point, pr in zip(support, probs):
            t = Fraction(pr)
            for v, e in m:
                t *= Fraction(point[v]) ** e
            tot += t
        vals[m] = tot
    return MomentTable(d, vals, tuple(variables))


def uniform_cube_table(nvars: int, d: int) -> MomentTable:
    names = [f"x{i + 1}" for i in range(nvars)]
    support = [dict(zip(names, bits)) for bits in itertools.product((0, 1), repeat=nvars)]
    return table_from_distribution(support, [Fraction(1, len(support))] * len(support), names, d)


@dataclass
class PseudoResult:
    status: str  # PASS | FAIL
    axiom: str | None = None
    witness: tuple | None = None
    pivot_index: int | None = None  # 1-based position in the moment basis
    pivot_value: Fraction | None = None

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.status == "FAIL":
            out["axiom"] = self.axiom
            if self.witness is not None:
                out["witness"] = [fmt_frac(c) for c in self.witness]
            if self.pivot_index is not None:
                out["pivot_index"] = self.pivot_index
                out["pivot_value"] = fmt_frac(self.pivot_value)
        return out


def ldl_psd(mat):
    """Exact LDL^T with symmetric (largest diagonal) pivoting.

    Returns None when the matrix is positive semidefinite, else
    (witness v with v^T M v < 0, 1-based pivot position, pivot value).
    """
    n = len(mat)
    a = [[Fraction(x) for x in row] for row in mat]
    perm = list(range(n))
    lower = [[Fraction(int(i == k)) for k in range(n)] for i in range(n)]
    for k in range(n):
        piv = max(range(k, n), key=lambda i: (a[i][i], -i))
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            for row in a:
                row[k], row[piv] = row[piv], row[k]
            perm[k], perm[piv] = perm[piv], perm[k]
            for c in range(k):
                lower[k][c], lower[piv][c] = lower[piv][c], lower[k][c]
        d = a[k][k]
        if d < 0:
            return _witness(lower, perm, k, {k: Fraction(1)}), k + 1, d
        if d == 0:
            off = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if off is not None:
                # [[0, b], [b, c]] is indefinite: (t, 1) with t = -(c + 1) / (2b) gives -1
                b, c = a[off][k], a[off][off]
                vec = {k: -(c + 1) / (2 * b), off: Fraction(1)}
                return _witness(lower, perm, k, vec), k + 1, Fraction(-1)
            continue
        for i in range(k + 1, n):
            lower[i][k] = a[i][k] / d
        for i in range(k + 1, n):
            for c in range(k + 1, n):
                a[i][c] -= lower[i][k] * a[k][c]
        for i in range(k + 1, n):
            a[i][k] = a[k][i] = Fraction(0)
    return None


def _witness(lower, perm, k, local):
    """v with (L^T P v) supported on ``local``, mapped back to original coordinates."""
    n = len(lower)
    w = [Fraction(0)] * n
    for i, val in local.items():
        w[i] = val
    # back substitution for L^T z = w restricted to the first rows
    z = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        z[i] = w[i] - sum((lower[r][i] * z[r] for r in range(i + 1, n)), Fraction(0))
    v = [Fraction(0)] * n
    for i in range(n):
        v[perm[i]] = z[i]
    lead = next((x for x in v if x != 0), Fraction(1))
    if lead < 0:
        v = [-x for x in v]
    return tuple(v)


def check_pseudo_expectation(table: MomentTable, d: int | None = None) -> PseudoResult:
    d = table.degree if d is None else d
    one = table.get(())
    if one != 1:
        return PseudoResult("FAIL", "normalization", pivot_value=one)
    basis = monomials_upto(table.variables, d // 2)
    mat = [[table.get(mono_product(a, b)) for b in basis] for a in basis]
    res = ldl_psd(mat)
    if res is None:
        return PseudoResult("PASS")
    v, idx, val = res
    return PseudoResult("FAIL", "positivity", v, idx, val)


def quad_form(mat, v) -> Fraction:
    return sum((Fraction(v[i]) * mat[i][k] * v[k] for i in range(len(v)) for k in range(len(v))), Fraction(0))
