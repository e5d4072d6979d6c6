import random
import re
from fractions import Fraction
from pathlib import Path

import pytest

from blsos.certificate import (Certificate, CertificateFormatError, Step, degree_bound, deserialize,
                               recompute_degrees, serialize, verify)
from blsos.holder import identity_datum, prove_cauchy_schwarz
from blsos.polyring import Polynomial, SosExpr, VarId

from certfuzz import mutations
from conftest import holder, lw

GOLDEN = Path(__file__).parent / "golden"
F = Fraction


def fv(j, y):
    return Polynomial.var(VarId("F", j, (y,)))


def aux(k):
    return VarId("A", k)


def golden(name):
    return deserialize((GOLDEN / name).read_bytes())


GOLDEN_SET = [
    ("cs.cert", lambda: holder()),
    ("lw.cert", lambda: lw(["1/2"] * 3)),
    ("holder_3_8.cert", lambda: identity_datum((F(3, 8), F(5, 8)), 2)),
]


def test_cs_two_points_residual():
    a, b, c, d = fv(0, 0), fv(0, 1), fv(1, 0), fv(1, 1)
    cert = prove_cauchy_schwarz([a, b], [c, d])
    (w, sq), = cert.steps[-1].args["s2"].squares
    assert w == 1 and sq * sq == (a * d - b * c) ** 2
    v = verify(cert)
    assert v.accepted and v.report.max_degree == 4


def test_cs_single_point_is_equality():
    cert = prove_cauchy_schwarz([fv(0, 0)], [fv(1, 0)])
    assert cert.target.is_zero() and cert.steps[-1].args["s2"].squares == []
    assert verify(cert).accepted


def test_cs_index_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        prove_cauchy_schwarz([fv(0, 0)], [fv(1, 0), fv(1, 1)])


def test_cs_perturbed_rejected_at_conclude():
    cert = golden("cs.cert")
    sq = cert.steps[-1].args["s2"].squares
    w, p = sq[0]
    terms = dict(p.terms)
    mono = next(iter(terms))
    terms[mono] += 1
    sq[0] = (w, Polynomial(terms))
    v = verify(cert, holder())
    assert not v.accepted and cert.steps[v.step].kind == "CONCLUDE"
    assert "leading term" in v.reason


def test_lw_golden_within_bound():
    v = verify(golden("lw.cert"), lw(["1/2"] * 3))
    assert v.accepted and v.report.theorem_bound == 147 and v.report.within_bound


def test_degree_bound_examples():
    assert degree_bound(3, 3, 2, (1, 1, 1)) == 147
    assert degree_bound(1, 2, 2, (1, 1)) == 6
    assert degree_bound(1, 1, 1, (1,)) == 2
    assert degree_bound(1, 1, 1, (3,)) == 4


def test_round_trip_bytes():
    for name, _ in GOLDEN_SET:
        blob = (GOLDEN / name).read_bytes()
        assert serialize(deserialize(blob)) == blob


def test_truncated_file_names_conclude():
    blob = (GOLDEN / "lw.cert").read_bytes()
    with pytest.raises(CertificateFormatError, match="CONCLUDE"):
        deserialize(blob[: len(blob) // 2])


def test_missing_conclude_step():
    cert = golden("cs.cert")
    cert.steps = [Step("SQUARE", {"poly": fv(0, 0)}, fv(0, 0) ** 2)]
    with pytest.raises(CertificateFormatError, match="CONCLUDE"):
        deserialize(serialize(cert))


def test_undeclared_hypothesis():
    cert = Certificate(steps=[Step("HYPOTHESIS", {"name": "h"}, fv(0, 0)),
                              Step("CONCLUDE", {"s1": SosExpr([Polynomial.const(1)]), "s2": SosExpr(),
                                                "from": 0, "eqs": []}, Polynomial())],
                       hypotheses={}, target=fv(0, 0))
    with pytest.raises(CertificateFormatError, match="undeclared hypothesis"):
        deserialize(serialize(cert))


def test_bad_back_reference():
    text = re.sub(r'"a": \d+', '"a": 9999', (GOLDEN / "lw.cert").read_text(), count=1)
    with pytest.raises(CertificateFormatError, match="earlier step"):
        deserialize(text)


@pytest.mark.parametrize("name,make", GOLDEN_SET)
def test_golden_fuzz_all_rejected(name, make):
    cert, datum = golden(name), make()
    assert verify(cert, datum).accepted
    rejected = sum(not verify(m, datum).accepted for m in mutations(cert, 100, seed=17))
    assert rejected == 100


@pytest.mark.parametrize("name,make", GOLDEN_SET)
def test_degree_report_matches_recomputation(name, make):
    cert = golden(name)
    v = verify(cert, make())
    assert v.report.per_step == recompute_degrees(cert)
    assert v.report.max_degree == max(recompute_degrees(cert))


@pytest.mark.parametrize("name,make", GOLDEN_SET)
def test_accepted_targets_nonnegative_at_random_points(name, make):
    cert = golden(name)
    rng = random.Random(99)
    vars_ = sorted(cert.target.variables(), key=lambda v: v.key())
    for _ in range(100):
        pt = {v: F(rng.randint(-9, 9), rng.randint(1, 5)) for v in vars_}
        assert cert.target.evaluate(pt) >= 0


def test_verify_is_pure():
    cert, d = golden("lw.cert"), lw(["1/2"] * 3)
    assert verify(cert, d).to_json() == verify(cert, d).to_json()


def test_wrong_datum_rejected():
    v = verify(golden("lw.cert"), lw(["3/4", "3/4", "1/2"]))
    assert not v.accepted and "digest" in v.reason


def _conclude(frm, eqs=()):
    return Step("CONCLUDE", {"s1": SosExpr([Polynomial.const(1)]), "s2": SosExpr(), "from": frm,
                             "eqs": list(eqs)}, Polynomial())


def test_small_handmade_certificate():
    x = fv(0, 0)
    cert = Certificate([Step("SQUARE", {"poly": x - 1}, (x - 1) ** 2), _conclude(0)], {}, (x - 1) ** 2)
    assert verify(cert).accepted


def test_s1_needs_constant_square():
    x = fv(0, 0)
    st = Step("CONCLUDE", {"s1": SosExpr([x]), "s2": SosExpr([x]), "from": None, "eqs": []}, Polynomial())
    v = verify(Certificate([st], {}, Polynomial.const(1)))
    assert not v.accepted and "constant square" in v.reason


def test_substitute_on_hypothesis_rejected():
    x = fv(0, 0)
    steps = [Step("HYPOTHESIS", {"name": "h"}, x),
             Step("SUBSTITUTE", {"a": 0, "table": {VarId("F", 0, (0,)): Polynomial.const(-1)}},
                  Polynomial.const(-1)),
             _conclude(1)]
    v = verify(Certificate(steps, {"h": x}, Polynomial.const(-1)))
    assert not v.accepted and v.step == 1


def test_aux_must_be_fresh():
    x = fv(0, 0)
    a = Polynomial.var(aux(0))
    steps = [Step("SQUARE", {"poly": a}, a * a),
             Step("DEFINE_AUX", {"var": aux(0), "power": 2, "defn": x * x}, a * a - x * x),
             _conclude(0)]
    v = verify(Certificate(steps, {}, Polynomial()))
    assert not v.accepted and "fresh" in v.reason


def test_aux_definition_needs_even_exponents():
    x = fv(0, 0)
    a = Polynomial.var(aux(0))
    steps = [Step("DEFINE_AUX", {"var": aux(0), "power": 1, "defn": x}, a - x), _conclude(None)]
    v = verify(Certificate(steps, {}, Polynomial()))
    assert not v.accepted and "even exponents" in v.reason


def test_divide_rejects_odd_power():
    x = fv(0, 0)
    steps = [Step("SQUARE", {"poly": x * x}, x ** 4),
             Step("DIVIDE", {"a": 0, "divisor": x}, x ** 3), _conclude(1)]
    v = verify(Certificate(steps, {}, x ** 3))
    assert not v.accepted and "odd power" in v.reason


def test_divide_with_aux_accepted():
    # A^2 = x^2 + y^2, so x^2 + y^2 >= 0 rewrites to A^2 >= 0; dividing by A gives A >= 0
    x, y = fv(0, 0), fv(0, 1)
    a = Polynomial.var(aux(0))
    eq = a * a - x * x - y * y
    steps = [Step("SQUARE", {"poly": x}, x * x),
             Step("SQUARE", {"poly": y}, y * y),
             Step("ADD", {"a": 0, "b": 1}, x * x + y * y),
             Step("DEFINE_AUX", {"var": aux(0), "power": 2, "defn": x * x + y * y}, eq),
             Step("REWRITE", {"a": 2, "eqs": [(aux(0), Polynomial.const(1))]}, a * a),
             Step("DIVIDE", {"a": 4, "divisor": a}, a),
             Step("MUL", {"a": 5, "b": 5}, a * a),
             _conclude(6, [(aux(0), Polynomial.const(-1))])]
    v = verify(Certificate(steps, {}, x * x + y * y))
    assert v.accepted, v.reason


def test_goldens_regenerate_byte_identical():
    from blsos.holder import HolderTask, prove_holder_pair
    from blsos.prover import prove
    assert serialize(prove(holder())) == (GOLDEN / "cs.cert").read_bytes()
    assert serialize(prove(lw(["1/2"] * 3))) == (GOLDEN / "lw.cert").read_bytes()
    assert serialize(prove_holder_pair(HolderTask(F(3, 8), F(5, 8)))) == (GOLDEN / "holder_3_8.cert").read_bytes()
