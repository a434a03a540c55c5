"""Random problem builders shared by the unit and acceptance suites."""

from __future__ import annotations

import random

from centra.equivariance import centralizer_up_to
from centra.errors import ValidationError
from centra.exactla import QMatrix, Rational
from centra.liealg import bracket_closure
from centra.superposition import Coefficient, EDESystem, close_family

# positive spectra: the centralizer is finite and has nonlinear fields in degree 2 or 3
SPECTRA = [(1, 2), (1, 3), (1, 2, 3), (1, 1, 2), (1, 2, 4), (2, 1, 3), (1, 3, 2), (1, 1, 3)]
RATES = [Rational(0), Rational(1), Rational(-1), Rational(1, 2)]


def random_system(rng: random.Random, autonomous: bool):
    """Returns (algebra, family, system, y) with seeds of degree <= 3 in dimension <= 3."""
    while True:
        sigma = rng.choice(SPECTRA)
        m = bracket_closure([QMatrix.diag(sigma)])
        g = centralizer_up_to(m, 3)
        pool = [(k, g.per_degree[k]) for k in (2, 3) if g.per_degree[k]]
        if not pool:
            continue
        seeds = []
        for _ in range(rng.randint(1, 2)):
            k, basis = rng.choice(pool)
            f = None
            for b in basis:
                c = rng.randint(-2, 2)
                if c:
                    f = b.scale(c) if f is None else f + b.scale(c)
            if f is not None and not f.is_zero():
                seeds.append(f)
        if not seeds:
            continue
        try:
            family = close_family(m, seeds)
        except ValidationError:
            continue
        coefs = []
        for _ in family.seeds:
            if autonomous:
                coefs.append(Coefficient((Rational(rng.choice([-2, -1, 1, 2])),), Rational(0)))
            else:
                sig = tuple(Rational(rng.randint(-2, 2)) for _ in range(rng.randint(1, 2)))
                if not any(sig):
                    sig = (Rational(1),)
                coefs.append(Coefficient(sig, rng.choice(RATES)))
        if not autonomous and all(len(c.sigma) == 1 and c.alpha == 0 for c in coefs):
            # make sure the time-dependent branch really depends on t
            coefs[0] = Coefficient((coefs[0].sigma[0], Rational(1)), coefs[0].alpha)
        y = [Rational(rng.randint(-2, 2), rng.randint(1, 2)) for _ in sigma]
        return m, family, EDESystem(tuple(family.seeds), tuple(coefs)), y
