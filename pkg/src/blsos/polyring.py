"""Sparse multivariate polynomials with rational coefficients.

Monomials are sorted tuples of ``(VarId, exponent)`` pairs.  Exponents are
normally positive ints; the proof builder temporarily allows positive
Fractions (Puiseux monomials) and clears denominators before a certificate is
emitted, so everything the verifier sees has integer exponents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .exactalg import fmt_frac

FUNC_ROOT, AUX, SLACK, GADGET = "F", "A", "T", "G"
_FAMILY_ORDER = {FUNC_ROOT: 0, SLACK: 1, AUX: 2, GADGET: 3}


@dataclass(frozen=True)
class VarId:
    """A certificate variable.

    ``F{j}[y]`` is the root variable of f_j(y); ``T{j}`` is the sup-norm slack of
    f_j; ``A{k}`` is the k-th auxiliary (defined) variable; ``G{k}`` are free
    variables of reusable gadget identities.
    """
    family: str
    index: int
    point: tuple = ()
    tag: str = ""

    def __post_init__(self):
        k = (_FAMILY_ORDER[self.family], self.index, self.point, self.tag)
        object.__setattr__(self, "_key", k)
        object.__setattr__(self, "_hash", hash(k))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, VarId) and self._key == other._key

    def key(self):
        return self._key

    def __lt__(self, other):
        return self.key() < other.key()

    def __str__(self):
        s = f"{self.family}{self.index}"
        if self.family == FUNC_ROOT:
            s += "[" + ",".join(str(c) for c in self.point) + "]"
        if self.tag:
            s += "{" + self.tag + "}"
        return s


_VAR_RE = re.compile(r"^([FTAG])(\d+)(?:\[([^\]]*)\])?(?:\{([^}]*)\})?$")


def parse_var(text: str) -> VarId:
    m = _VAR_RE.match(text)
    if not m:
        raise ValueError(f"bad variable name {text!r}")
    fam, idx, pt, tag = m.groups()
    point = tuple(int(c) for c in pt.split(",")) if pt else ()
    return VarId(fam, int(idx), point, tag or "")


def _norm_exp(e):
    if isinstance(e, Fraction) and e.denominator == 1:
        return int(e)
    return e


# -- monomials -------------------------------------------------------------

ONE = ()


def mono(pairs: Mapping | Iterable) -> tuple:
    items = pairs.items() if isinstance(pairs, Mapping) else pairs
    acc: dict = {}
    for v, e in items:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted(((v, _norm_exp(e)) for v, e in acc.items() if e != 0), key=lambda t: t[0].key()))


def mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        ka, kb = a[i][0].key(), b[j][0].key()
        if ka == kb:
            e = _norm_exp(a[i][1] + b[j][1])
            if e != 0:
                out.append((a[i][0], e))
            i += 1
            j += 1
        elif ka < kb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_pow(a: tuple, k) -> tuple:
    if k == 0:
        return ONE
    return tuple((v, _norm_exp(e * k)) for v, e in a)


def mono_deg(a: tuple):
    return _norm_exp(sum((e for _, e in a), 0))


def mono_str(a: tuple) -> str:
    parts = []
    for v, e in a:
        if e == 1:
            parts.append(str(v))
        elif isinstance(e, int):
            parts.append(f"{v}^{e}")
        else:
            parts.append(f"{v}^({fmt_frac(e)})")
    return "*".join(parts)


def _sort_key(m: tuple):
    return (-mono_deg(m), tuple((v.key(), e) for v, e in m))


# -- polynomials -----------------------------------------------------------

class Polynomial:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping | None = None):
        t = {}
        if terms:
            for m, c in terms.items():
                if c != 0:
                    t[m] = Fraction(c)
        self.terms = t
        self._hash = None

    @classmethod
    def const(cls, c) -> "Polynomial":
        return cls({ONE: Fraction(c)})

    @classmethod
    def var(cls, v: VarId) -> "Polynomial":
        return cls({((v, 1),): Fraction(1)})

    @classmethod
    def monomial(cls, m: tuple, c=1) -> "Polynomial":
        return cls({m: Fraction(c)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m, 0) + c
            if v:
                t[m] = v
            else:
                t.pop(m, None)
        out = Polynomial()
        out.terms = t
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Polynomial()
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = Fraction(other)
            out = Polynomial()
            out.terms = {m: v * c for m, v in self.terms.items()} if c else {}
            return out
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                v = t.get(m, 0) + c1 * c2
                if v:
                    t[m] = v
                else:
                    t.pop(m, None)
        out = Polynomial()
        out.terms = t
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers need a non-negative integer")
        result = Polynomial.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other)
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def degree(self):
        """Maximum total degree; the zero polynomial has degree 0."""
        return max((mono_deg(m) for m in self.terms), default=0)

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _sort_key(t[0]))

    def leading_term(self) -> str:
        if not self.terms:
            return "0"
        m, c = self.sorted_terms()[0]
        return Polynomial.monomial(m, c).to_str()

    def is_integral(self) -> bool:
        return all(isinstance(e, int) for m in self.terms for _, e in m)

    def exponents(self):
        for m in self.terms:
            yield from m

    def as_monomial(self):
        """(coefficient, monomial) if this is a single term, else None."""
        if len(self.terms) != 1:
            return None
        (m, c), = self.terms.items()
        return c, m

    @classmethod
    def from_terms(cls, t: dict) -> "Polynomial":
        """Wrap a term dict that already has no zero coefficients."""
        out = cls()
        out.terms = t
        return out

    def add_into(self, t: dict, coeff=1) -> None:
        """In-place t += coeff * self on a raw term dict."""
        for m, c in self.terms.items():
            v = t.get(m, 0) + c * coeff
            if v:
                t[m] = v
            else:
                t.pop(m, None)

    def map_exponents(self, scale: Mapping) -> "Polynomial":
        """Replace each variable v by v**scale[v]: a ring map on Puiseux monomials."""
        out = Polynomial()
        out.terms = {tuple((v, _norm_exp(e * scale.get(v, 1))) for v, e in m): c
                     for m, c in self.terms.items()}
        return out

    def substitute(self, table: Mapping) -> "Polynomial":
        """Replace variables by polynomials (integer exponents on replaced variables)."""
        t: dict = {}
        cache: dict = {}
        for m, c in self.terms.items():
            acc = Polynomial.const(c)
            rest = []
            for v, e in m:
                if v in table:
                    if not isinstance(e, int):
                        raise ValueError(f"cannot substitute into fractional power of {v}")
                    key = (v, e)
                    if key not in cache:
                        cache[key] = table[v] ** e
                    acc = acc * cache[key]
                else:
                    rest.append((v, e))
            (acc * Polynomial.monomial(tuple(rest))).add_into(t)
        return Polynomial.from_terms(t)

    def evaluate(self, values: Mapping, one=Fraction(1)):
        total = one * 0
        for m, c in self.terms.items():
            t = one * c
            for v, e in m:
                t = t * values[v] ** e
            total = total + t
        return total

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for m, c in self.sorted_terms():
            out.append(fmt_frac(c) + ("*" + mono_str(m) if m else ""))
        return " + ".join(out)

    __str__ = to_str

    def __repr__(self):
        return f"Polynomial({self.to_str()!r})"


def parse_poly(text: str) -> Polynomial:
    text = text.strip()
    if text == "0":
        return Polynomial()
    terms: dict = {}
    for chunk in text.split(" + "):
        factors = chunk.split("*")
        c = Fraction(factors[0])
        pairs = []
        for f in factors[1:]:
            if "^" in f:
                name, e = f.split("^", 1)
                e = Fraction(e.strip("()"))
            else:
                name, e = f, 1
            pairs.append((parse_var(name), e))
        m = mono(pairs)
        if m in terms:
            raise ValueError(f"repeated monomial in {chunk!r}")
        if c == 0:
            raise ValueError(f"zero coefficient in {chunk!r}")
        terms[m] = c
    return Polynomial(terms)


def total_degree(p: Polynomial):
    return p.degree()


def poly_arith(a: Polynomial, b, op: str):
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "pow":
        return a ** b
    if op == "eq":
        return a == b
    raise ValueError(f"unknown op {op!r}")


class SosExpr:
    """A weighted sum of squares  sum_i w_i * q_i**2  with w_i > 0."""

    def __init__(self, squares: Iterable = ()):
        items = []
        for item in squares:
            w, q = item if isinstance(item, tuple) else (Fraction(1), item)
            w = Fraction(w)
            if w <= 0:
                raise ValueError("SoS weights must be positive")
            items.append((w, q))
        self.squares = items

    def expand(self) -> Polynomial:
        acc = Polynomial()
        for w, q in self.squares:
            acc = acc + (q * q) * w
        return acc

    def degree(self):
        return max((2 * q.degree() for _, q in self.squares), default=0)

    def has_positive_constant(self) -> bool:
        return any(q.variables() == set() and not q.is_zero() for _, q in self.squares)

    def to_json(self):
        return [[fmt_frac(w), q.to_str()] for w, q in self.squares]

    @classmethod
    def from_json(cls, data) -> "SosExpr":
        return cls((Fraction(w), parse_poly(q)) for w, q in data)
