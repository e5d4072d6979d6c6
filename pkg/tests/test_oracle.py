import itertools
import random
from fractions import Fraction

import pytest

from blsos.datum import validate
from blsos.oracle import (Assignment, IncompleteTable, MomentTable, check_pseudo_expectation,
                          constant_assignment, find_violation, gap, ldl_psd, monomials_upto, quad_form,
                          random_check, sides, table_from_distribution, uniform_cube_table)

from conftest import holder, lw

F = Fraction


def test_lw_random_check_clean():
    rep = random_check(lw(["1/2"] * 3), trials=2000, seed=1)
    assert rep.violations == 0 and rep.min_gap >= 0 and rep.witness is None


def test_random_check_deterministic_and_parallel_merge():
    d = lw(["1/2"] * 3)
    a = random_check(d, 300, seed=7)
    assert a.to_json() == random_check(d, 300, seed=7).to_json()
    assert a.to_json() == random_check(d, 300, seed=7, workers=2).to_json()


def test_constant_assignment_equality_on_lw():
    d = lw(["1/2"] * 3)
    a = constant_assignment(d)
    lhs, rhs = sides(d, a)
    # s = 2: LHS = 8, RHS = 4^(3/2) = 8, so both squared are 64
    assert lhs == rhs == 64
    assert gap(d, a) == 0


def test_holder_proportional_equality():
    d = holder()
    rng = random.Random(3)
    u = {y: rng.randint(0, 5) for y in d.image_points(0)}
    a = Assignment([dict(u), dict(u)], 2)
    assert gap(d, a) == 0


def test_sides_match_direct_formula():
    d = holder(("1/3", "2/3"))
    # s = 3, s_j = (1, 2), L = 2: f = u^2, g = w^2
    a = Assignment([{(0,): 2, (1,): 1}, {(0,): 1, (1,): 3}], 2)
    lhs, rhs = sides(d, a)
    assert lhs == (4 * 1 + 1 * 9) ** 3
    # ||f||_3 ^3 = sum u^6, ||g||_(3/2) ^3 = (sum w^3)^2
    assert rhs == (2 ** 6 + 1) * (1 + 3 ** 3) ** 2


def test_quarter_lw_violation_at_k2():
    d = lw(["1/4"] * 3)
    a = find_violation(d)
    assert a is not None
    lhs, rhs = sides(d, a)
    assert lhs > rhs
    # the first member of the scaling family is the indicator of the whole box: 8^4 vs 4^3
    assert (lhs, rhs) == (4096, 64)


def test_no_violation_when_feasible():
    assert find_violation(lw(["1/2"] * 3), trials=30) is None
    ident = validate({"n": 1, "maps": [[[1]]], "p": ["1"], "domain": {"box": 4}})
    assert find_violation(ident, trials=30) is None


def test_assignment_json_shape():
    d = lw(["1/4"] * 3)
    js = find_violation(d).to_json()
    assert js["power"] == 1 and len(js["tables"]) == 3


def test_pseudo_uniform_cube_all_degrees():
    for nv in (1, 2, 3):
        for deg in range(0, 7):
            assert check_pseudo_expectation(uniform_cube_table(nv, deg)).status == "PASS"


def test_pseudo_random_distributions_pass():
    rng = random.Random(11)
    for _ in range(5):
        support = [{"x": rng.randint(-2, 2), "y": F(rng.randint(-3, 3), rng.randint(1, 3))} for _ in range(4)]
        w = [rng.randint(1, 5) for _ in support]
        probs = [F(x, sum(w)) for x in w]
        assert check_pseudo_expectation(table_from_distribution(support, probs, ["x", "y"], 6)).status == "PASS"


def test_pseudo_normalization():
    res = check_pseudo_expectation(MomentTable(0, {(): F(2)}))
    assert res.status == "FAIL" and res.axiom == "normalization"


def test_pseudo_indefinite_pair():
    table = MomentTable(2, {(): F(1), (("x", 1),): F(2), (("x", 2),): F(1)})
    res = check_pseudo_expectation(table)
    assert res.status == "FAIL" and res.axiom == "positivity"
    assert res.witness == (2, -1) and res.pivot_index == 2 and res.pivot_value == -3
    mat = [[1, 2], [2, 1]]
    assert quad_form(mat, res.witness) < 0


def test_pseudo_incomplete_names_monomial():
    table = MomentTable(2, {(): F(1), (("x", 1),): F(0)})
    with pytest.raises(IncompleteTable, match=r"x\^2"):
        check_pseudo_expectation(table)


def test_ldl_zero_diagonal_and_random_matrices():
    v, _, _ = ldl_psd([[0, 1], [1, 0]])
    assert quad_form([[0, 1], [1, 0]], v) < 0
    assert ldl_psd([[0, 0], [0, 0]]) is None
    rng = random.Random(5)
    for _ in range(40):
        n = rng.randint(1, 4)
        a = [[F(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)]
        gram = [[sum(a[k][i] * a[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        assert ldl_psd(gram) is None
        sym = [[a[i][j] + a[j][i] for j in range(n)] for i in range(n)]
        res = ldl_psd(sym)
        if res is not None:
            assert quad_form(sym, res[0]) < 0


def test_monomial_basis_size():
    assert len(monomials_upto(["x", "y"], 2)) == 6
    assert len(monomials_upto(["x", "y", "z"], 3)) == 20
