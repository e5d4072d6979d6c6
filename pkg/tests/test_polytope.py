import itertools
import random
from fractions import Fraction

import pytest
from scipy.optimize import linprog

from blsos.datum import is_feasible, subspace_candidates
from blsos.polytope import (ConstraintSystem, OutsideHull, Row, build_p, build_q, clip_exponents,
                            decompose_convex, enumerate_vertices, hadamard_bound)

from conftest import lw

F = Fraction
HALF = F(1, 2)


def lw_q():
    d = lw(["1/2"] * 3)
    return build_q(d, subspace_candidates(d))


def points(verts):
    return {v.p for v in verts}


def test_lw_q_rows():
    rows = {(r.coeffs, r.bound) for r in lw_q().rows}
    for a, b in ((1, 2), (0, 2), (0, 1)):
        c = [F(0)] * 3
        c[a] = c[b] = F(-1)
        assert (tuple(c), F(-1)) in rows
    assert ((F(-2), F(-2), F(-2)), F(-3)) in rows


def test_lw_vertices():
    vs = points(enumerate_vertices(lw_q()))
    assert {(HALF, HALF, HALF), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)} <= vs
    assert [v for v in vs if any(x not in (0, 1) for x in v)] == [(HALF, HALF, HALF)]


def test_lw_binary_vertices_feasible():
    d = lw(["1/2"] * 3)
    for v in enumerate_vertices(lw_q()):
        if all(x in (0, 1) for x in v.p):
            assert is_feasible(d.with_exponents(v.p)).status == "FEASIBLE"


def _lw_hand_q(p):
    # dimension table of the eight candidates, written out by hand
    p1, p2, p3 = p
    return (all(0 <= x <= 1 for x in p) and p2 + p3 >= 1 and p1 + p3 >= 1 and p1 + p2 >= 1
            and 2 * (p1 + p2 + p3) >= 3)


def test_lw_vertices_brute_force_hull():
    grid = [F(k, 12) for k in range(13)]
    dirs = [d for d in itertools.product((-1, 0, 1), repeat=3) if any(d)]
    extreme = set()
    for p in itertools.product(grid, repeat=3):
        if not _lw_hand_q(p):
            continue
        step = F(1, 12)
        if not any(_lw_hand_q(tuple(x + step * c for x, c in zip(p, d))) and
                   _lw_hand_q(tuple(x - step * c for x, c in zip(p, d))) for d in dirs):
            extreme.add(p)
    assert extreme == points(enumerate_vertices(lw_q()))


def test_m1_identity_q():
    from blsos.datum import validate
    d = validate({"n": 1, "maps": [[[1]]], "p": ["1"], "domain": {"box": 3}})
    assert points(enumerate_vertices(build_q(d, subspace_candidates(d)))) == {(1,)}


def test_p_simplex():
    assert points(enumerate_vertices(build_p(2))) == {(0, 1), (1, 0)}
    assert points(enumerate_vertices(build_p(3))) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}


def test_degenerate_duplicates_merged():
    rows = (Row((F(1),), F(1), "a"), Row((F(1),), F(1), "b"), Row((F(-1),), F(0), "c"))
    assert points(enumerate_vertices(ConstraintSystem(1, rows))) == {(0,), (1,)}


def test_decompose_vertex_and_midpoint():
    vs = enumerate_vertices(lw_q())
    c = decompose_convex((HALF, HALF, HALF), vs)
    assert c.weights == (1,) and c.vertices[0].p == (HALF, HALF, HALF)
    c = decompose_convex((1, HALF, HALF), vs)
    assert c.point() == (1, HALF, HALF)
    assert sorted(c.weights) == [HALF, HALF]


def test_decompose_interpolation_point():
    q = lw_q()
    c = decompose_convex((F(3, 4), F(3, 4), HALF), enumerate_vertices(q), q)
    assert c.point() == (F(3, 4), F(3, 4), HALF)
    assert sum(c.weights) == 1 and all(w > 0 for w in c.weights)
    # first feasible subset in index order uses three binary vertices
    assert [v.p for v in c.vertices] == [(0, 1, 1), (1, 0, 1), (1, 1, 0)]
    assert c.weights == (F(1, 4), F(1, 4), HALF)
    # restricted to the {(1/2,1/2,1/2), (1,1,0), (1,1,1)} family the weights are forced
    fam = [v for v in enumerate_vertices(q) if v.p in {(HALF, HALF, HALF), (1, 1, 0), (1, 1, 1)}]
    c = decompose_convex((F(3, 4), F(3, 4), HALF), fam, q)
    assert dict(zip((v.p for v in c.vertices), c.weights)) == {
        (HALF, HALF, HALF): HALF, (1, 1, 0): F(1, 4), (1, 1, 1): F(1, 4)}


def test_decompose_outside_hull():
    q = lw_q()
    with pytest.raises(OutsideHull) as exc:
        decompose_convex((F(1, 4),) * 3, enumerate_vertices(q), q)
    assert exc.value.row is not None and not exc.value.row.holds((F(1, 4),) * 3)


def test_clip_examples():
    assert clip_exponents((2, HALF)) == ((1, HALF), [0])
    assert clip_exponents((HALF, HALF)) == ((HALF, HALF), [])
    assert clip_exponents((F(3, 2), F(3, 2))) == ((1, 1), [0, 1])


def test_row_permutation_invariance():
    q = lw_q()
    rows = list(q.rows)
    random.Random(5).shuffle(rows)
    assert points(enumerate_vertices(ConstraintSystem(3, tuple(rows)))) == points(enumerate_vertices(q))


def test_vertex_denominators_within_hadamard():
    for v in enumerate_vertices(lw_q()):
        assert all(F(x).denominator <= hadamard_bound(3, 3) for x in v.p)


def _random_system(rng, m):
    rows = []
    for j in range(m):
        e = [F(0)] * m
        e[j] = F(-1)
        rows.append(Row(tuple(e), F(0), "lo"))
        e = [F(0)] * m
        e[j] = F(1)
        rows.append(Row(tuple(e), F(1), "hi"))
    for _ in range(rng.randint(1, 3)):
        rows.append(Row(tuple(F(rng.randint(-3, 3)) for _ in range(m)), F(rng.randint(-3, 3)), "r"))
    return ConstraintSystem(m, tuple(rows))


def test_random_systems_against_lp():
    rng = random.Random(2024)
    for _ in range(100):
        m = rng.randint(1, 4)
        sysm = _random_system(rng, m)
        verts = enumerate_vertices(sysm)
        for v in verts:
            assert sysm.contains(v.p)
        a = [[float(c) for c in r.coeffs] for r in sysm.rows]
        b = [float(r.bound) for r in sysm.rows]
        for _ in range(3):
            c = [rng.randint(-5, 5) for _ in range(m)]
            res = linprog([-x for x in c], A_ub=a, b_ub=b, bounds=[(None, None)] * m, method="highs")
            if res.status == 2:
                assert verts == []
                break
            best = max(sum(ci * x for ci, x in zip(c, v.p)) for v in verts)
            assert abs(float(best) + res.fun) < 1e-7
