"""Single-coefficient mutations of certificates, shared by the fuzz tests."""

import copy
import random
from fractions import Fraction

from blsos.polyring import Polynomial, SosExpr


def _sites(cert):
    """(getter, setter) pairs for every polynomial or rational that carries coefficients."""
    out = []

    def poly_site(get, put):
        out.append(("poly", get, put))

    def frac_site(get, put):
        out.append(("frac", get, put))

    poly_site(lambda c: c.target, lambda c, v: setattr(c, "target", v))
    for name in sorted(cert.hypotheses):
        poly_site(lambda c, n=name: c.hypotheses[n], lambda c, v, n=name: c.hypotheses.__setitem__(n, v))
    for i, st in enumerate(cert.steps):
        poly_site(lambda c, i=i: c.steps[i].claim, lambda c, v, i=i: setattr(c.steps[i], "claim", v))
        for key, val in st.args.items():
            if isinstance(val, Polynomial):
                poly_site(lambda c, i=i, k=key: c.steps[i].args[k],
                          lambda c, v, i=i, k=key: c.steps[i].args.__setitem__(k, v))
            elif isinstance(val, Fraction):
                frac_site(lambda c, i=i, k=key: c.steps[i].args[k],
                          lambda c, v, i=i, k=key: c.steps[i].args.__setitem__(k, v))
            elif isinstance(val, SosExpr):
                for t in range(len(val.squares)):
                    def put_sq(c, v, i=i, k=key, t=t):
                        sq = c.steps[i].args[k].squares
                        sq[t] = (sq[t][0], v)

                    def put_w(c, v, i=i, k=key, t=t):
                        sq = c.steps[i].args[k].squares
                        sq[t] = (v, sq[t][1])
                    poly_site(lambda c, i=i, k=key, t=t: c.steps[i].args[k].squares[t][1], put_sq)
                    frac_site(lambda c, i=i, k=key, t=t: c.steps[i].args[k].squares[t][0], put_w)
            elif key == "table":
                for var in sorted(val, key=lambda x: x.key()):
                    poly_site(lambda c, i=i, var=var: c.steps[i].args["table"][var],
                              lambda c, v, i=i, var=var: c.steps[i].args["table"].__setitem__(var, v))
            elif key == "eqs":
                for t in range(len(val)):
                    def put_eq(c, v, i=i, t=t):
                        eqs = c.steps[i].args["eqs"]
                        eqs[t] = (eqs[t][0], v)
                    poly_site(lambda c, i=i, t=t: c.steps[i].args["eqs"][t][1], put_eq)
    return out


def _bump(c: Fraction) -> Fraction:
    return c + 1 if c + 1 != 0 else c + 2


def mutations(cert, count: int, seed: int):
    """Yield ``count`` certificates, each with exactly one coefficient changed."""
    rng = random.Random(seed)
    sites = _sites(cert)
    made = 0
    while made < count:
        kind, get, put = rng.choice(sites)
        val = get(cert)
        if kind == "poly":
            if val.is_zero():
                continue
            mono = rng.choice(sorted(val.terms, key=str))
            terms = dict(val.terms)
            terms[mono] = _bump(terms[mono])
            new = Polynomial(terms)
        else:
            new = _bump(val)
        mutant = copy.deepcopy(cert)
        put(mutant, new)
        made += 1
        yield mutant
