"""Command-line front end. Every verb prints one JSON document on stdout."""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .blconst import BLConstError, bl_constant
from .certificate import CertificateFormatError, deserialize, serialize, verify
from .datum import DatumError, image_dims, is_feasible, subspace_candidates, validate
from .exactalg import fmt_frac
from .oracle import (IncompleteTable, MomentTable, check_pseudo_expectation, find_violation,
                     random_check, sides)
from .polytope import PolytopeError, build_q, enumerate_vertices
from .prover import ProverError, prove

EXIT_OK, EXIT_REJECT, EXIT_INFEASIBLE, EXIT_UNKNOWN = 0, 1, 2, 3
EXIT_USAGE, EXIT_PARSE, EXIT_INTERNAL = 64, 65, 70


class UsageError(Exception):
    pass


class ParseError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _threads() -> int:
    raw = os.environ.get("BLSOS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"BLSOS_THREADS must be an integer, got {raw!r}") from None


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_json(path: str):
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None


def _datum(path: str):
    try:
        return validate(_load_json(path))
    except DatumError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _emit(obj, out=None):
    text = json.dumps(obj, sort_keys=True, indent=1) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rational(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None
    if q <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return q


# -- verbs ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    d = _datum(args.input)
    dims = [b.codomain_dim for b in d.maps]
    _emit({"status": "VALID", "datum": d.to_json(), "digest": d.digest(), "m": d.m,
           "image_dims": dims, "domain_size": len(d.points()), "s": d.exponents.s,
           "s_list": list(d.exponents.s_list)})
    return EXIT_OK


def cmd_feasibility(args) -> int:
    d = _datum(args.input)
    cands = subspace_candidates(d, args.budget)
    feas = is_feasible(d, cands)
    out = feas.to_json()
    out["candidates"] = len(cands)
    out["truncated"] = cands.truncated
    if feas.witness is not None:
        out["witness_image_dims"] = list(image_dims(d, feas.witness))
    _emit(out)
    return EXIT_OK


def cmd_vertices(args) -> int:
    d = _datum(args.input)
    cands = subspace_candidates(d, args.budget)
    q = build_q(d, cands)
    verts = enumerate_vertices(q)
    _emit({"m": d.m, "rows": len(q.rows), "truncated": cands.truncated,
           "vertices": [dict(v.to_json(), binary=all(x in (0, 1) for x in v.p)) for v in verts]})
    return EXIT_OK


def cmd_prove(args) -> int:
    d = _datum(args.input)
    try:
        cert = prove(d, budget=args.budget, force=args.force)
    except ProverError as exc:
        err = {"status": exc.status, "message": str(exc)}
        if exc.witness is not None:
            err["witness"] = [[fmt_frac(c) for c in r] for r in exc.witness.basis]
        _emit(err)
        return EXIT_INFEASIBLE if exc.status == "INFEASIBLE" else EXIT_UNKNOWN
    verdict = verify(cert, d, args.slack_factor)
    if not verdict.accepted:
        # the prover only hands out checked certificates
        print(f"internal error: generated certificate rejected: {verdict.reason}", file=sys.stderr)
        return EXIT_INTERNAL
    blob = serialize(cert)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(blob)
        _emit({"status": "PROVED", "certificate": args.output, "steps": len(cert.steps),
               "degree": verdict.report.to_json(), "trace": cert.meta.get("trace", [])})
    else:
        sys.stdout.write(blob.decode())
    return EXIT_OK


def cmd_verify(args) -> int:
    text = _read(args.input)
    try:
        cert = deserialize(text)
    except CertificateFormatError as exc:
        raise ParseError(f"{args.input}: {exc}") from None
    d = _datum(args.datum) if args.datum else None
    verdict = verify(cert, d, args.slack_factor)
    _emit(verdict.to_json())
    return EXIT_OK if verdict.accepted else EXIT_REJECT


def cmd_refute(args) -> int:
    d = _datum(args.input)
    a = find_violation(d, seed=args.seed)
    if a is not None:
        lhs, rhs = sides(d, a)
        _emit({"result": "violation", "assignment": a.to_json(), "s": d.exponents.s,
               "lhs_pow_s": fmt_frac(lhs), "rhs_pow_s": fmt_frac(rhs)})
        return EXIT_OK
    report = random_check(d, args.trials, args.seed, workers=_threads())
    _emit({"result": "none", "random_check": report.to_json()})
    return EXIT_OK


def _parse_monomial(text: str):
    text = text.strip()
    if text in ("", "1"):
        return ()
    acc: dict = {}
    for part in text.split("*"):
        name, _, exp = part.strip().partition("^")
        if not name.isidentifier():
            raise ParseError(f"bad monomial {text!r}")
        try:
            e = int(exp) if exp else 1
        except ValueError:
            raise ParseError(f"bad exponent in monomial {text!r}") from None
        if e < 0:
            raise ParseError(f"negative exponent in monomial {text!r}")
        if e:
            acc[name] = acc.get(name, 0) + e
    return tuple(sorted(acc.items()))


def load_moment_table(raw) -> MomentTable:
    """{"degree": d, "moments": {"1": "1", "x": "1/2", "x^2*y": "1/4", ...}}"""
    try:
        d = int(raw["degree"])
        moments = raw["moments"]
        values = {_parse_monomial(k): Fraction(v) for k, v in moments.items()}
    except (KeyError, TypeError, AttributeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"malformed moment table: {exc}") from None
    return MomentTable(d, values, tuple(raw.get("variables", ())))


def cmd_pseudocheck(args) -> int:
    table = load_moment_table(_load_json(args.input))
    try:
        res = check_pseudo_expectation(table, args.degree)
    except IncompleteTable as exc:
        raise ParseError(exc.args[0]) from None
    _emit(res.to_json())
    return EXIT_OK


def cmd_blconstant(args) -> int:
    d = _datum(args.input)
    map_scales = d.scales[0] if d.scales else [1] * d.m
    mats = [[[float(x) / c for x in row] for row in b.matrix] for b, c in zip(d.maps, map_scales)]
    try:
        res = bl_constant(mats, [float(x) for x in d.p], args.epsilon, args.max_iters)
    except BLConstError as exc:
        raise ParseError(str(exc)) from None
    out = res.to_json()
    if res.status == "DIVERGENT":
        out["C"] = "DIVERGENT"
    _emit(out)
    return EXIT_OK


VERBS = {
    "validate": cmd_validate, "feasibility": cmd_feasibility, "vertices": cmd_vertices,
    "prove": cmd_prove, "verify": cmd_verify, "refute": cmd_refute,
    "pseudocheck": cmd_pseudocheck, "blconstant": cmd_blconstant,
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="blsos", description="Exact SoS certificates for discrete Brascamp-Lieb inequalities.")
    sub = ap.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb in VERBS:
        sp = sub.add_parser(verb)
        sp.add_argument("input")
        sp.add_argument("-o", "--output")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--trials", type=int, default=1000)
        sp.add_argument("--budget", type=int, default=3)
        sp.add_argument("--epsilon", type=float, default=1e-12)
        sp.add_argument("--max-iters", type=int, default=1000)
        sp.add_argument("--slack-factor", type=_rational, default=Fraction(8))
        sp.add_argument("--force", action="store_true")
        sp.add_argument("--datum")
        sp.add_argument("--degree", type=int)
    return ap


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.seed < 0 or args.seed >= 2 ** 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if args.trials < 0 or args.budget < 1 or args.max_iters < 1:
            raise UsageError("--trials must be >= 0, --budget and --max-iters >= 1")
        return VERBS[args.verb](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PolytopeError, DatumError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except Exception as exc:  # noqa: BLE001 - anything else is a bug
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
