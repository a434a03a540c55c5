"""Polynomial invariants and relative invariants of a linear Lie algebra.

The general route is a kernel computation on homogeneous polynomials of one
degree. For diagonal (or triangular) algebras the monomial route reads the
answer off exponent vectors, and :func:`resonance_lattice` enumerates the
nonnegative integer relations ``m . sigma = 0`` of a single spectrum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .errors import InternalInconsistency
from .exactla import ZERO, QMatrix, SparseOperator, as_rational, format_rational, joint_kernel
from .liealg import DiagonalProfile, LieAlgebra
from .polyalg import Poly, lie_derivative, monomial_index, monomials


class DerivationOperator(SparseOperator):
    """phi -> X_B(phi) - shift * phi on degree-k polynomials."""

    def __init__(self, b: QMatrix, shift, n: int, k: int):
        self.n = n
        self.shift = as_rational(shift)
        self.key = (b.entries, self.shift, n, k)
        self.mons = monomials(n, k)
        self.idx = monomial_index(n, k)
        self.nz = [(i, j, b[i, j]) for i in range(n) for j in range(n) if b[i, j]]

    def column(self, col: int) -> dict:
        r = self.mons[col]
        out: dict = {}
        # X_B(x^r) = sum_ij r_i B_ij x^(r - e_i + e_j)
        for i, j, v in self.nz:
            ri = r[i]
            if not ri:
                continue
            if i == j:
                s = r
            else:
                s = list(r)
                s[i] -= 1
                s[j] += 1
                s = tuple(s)
            t = self.idx[s]
            out[t] = out.get(t, ZERO) + ri * v
        if self.shift:
            out[col] = out.get(col, ZERO) - self.shift
        return out


def derivation_operator_rows(matrices: Sequence[QMatrix], shifts: Sequence, n: int, k: int) -> list[dict]:
    """Stacked rows of phi -> X_B(phi) - shift_B * phi on degree-k polynomials."""
    size = len(monomials(n, k))
    rows = []
    for b, shift in zip(matrices, shifts):
        rows.extend(DerivationOperator(b, shift, n, k).rows(size))
    return rows


def _poly_from_vector(n: int, k: int, vec: dict) -> Poly:
    mons = monomials(n, k)
    return Poly(n, {mons[i]: c for i, c in vec.items()})


def relative_invariant_space(m: LieAlgebra, alpha: Sequence, k: int) -> list[Poly]:
    """Basis of degree-k polynomials phi with X_B(phi) = alpha(B) phi for each basis B."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    alpha = [as_rational(a) for a in alpha]
    if len(alpha) != m.dim:
        raise ValueError(f"linear form has {len(alpha)} values, algebra has dimension {m.dim}")
    size = len(monomials(m.n, k))
    ops = [DerivationOperator(b, a, m.n, k) for b, a in zip(m.basis, alpha)]
    basis = [_poly_from_vector(m.n, k, v) for v in joint_kernel(ops, size)]
    for phi in basis:
        for b, a in zip(m.basis, alpha):
            if lie_derivative(b, phi) != phi.scale(a):
                raise InternalInconsistency(f"{phi} fails the eigen-equation for {b}")
    return basis


def invariant_space(m: LieAlgebra, k: int) -> list[Poly]:
    return relative_invariant_space(m, [ZERO] * m.dim, k)


def monomial_relative_invariants(profile: DiagonalProfile, alpha: Sequence, k: int) -> list[tuple]:
    """Exponent vectors d with |d| = k and sum_i d_i rho_i = alpha on every basis element.

    For a triangular (non-diagonal) profile each candidate is re-checked with
    the full matrices, since off-diagonal entries can spoil the eigen-equation.
    """
    alpha = [as_rational(a) for a in alpha]
    n = profile.n
    r = len(profile.basis)
    if len(alpha) != r:
        raise ValueError(f"linear form has {len(alpha)} values, algebra has dimension {r}")
    out = []
    for d in monomials(n, k):
        if all(sum((d[i] * profile.forms[i][j] for i in range(n)), ZERO) == alpha[j] for j in range(r)):
            if profile.triangular:
                psi = Poly.monomial(d)
                if not all(lie_derivative(b, psi) == psi.scale(a) for b, a in zip(profile.basis, alpha)):
                    continue
            out.append(d)
    return out


@dataclass(frozen=True)
class ResonanceLattice:
    spectrum: tuple
    degree_bound: int
    solutions: tuple
    primitive_generator: tuple | None
    simple: bool

    def to_json(self) -> dict:
        return {
            "spectrum": [format_rational(s) for s in self.spectrum],
            "degree_bound": self.degree_bound,
            "solutions": [list(s) for s in self.solutions],
            "primitive_generator": list(self.primitive_generator) if self.primitive_generator else None,
            "simple": self.simple,
        }


def _is_multiple(m, g) -> bool:
    ratio = None
    for a, b in zip(m, g):
        if b == 0:
            if a != 0:
                return False
            continue
        if a % b:
            return False
        q = a // b
        if ratio is None:
            ratio = q
        elif q != ratio:
            return False
    return True


def resonance_lattice(sigma: Sequence, degree_bound: int) -> ResonanceLattice:
    """All nonzero m >= 0 with |m| <= degree_bound and m . sigma = 0."""
    if degree_bound < 1:
        raise ValueError("degree bound must be at least 1")
    sigma = tuple(as_rational(s) for s in sigma)
    n = len(sigma)
    sols = []
    for k in range(1, degree_bound + 1):
        for m in monomials(n, k):
            if sum((mi * si for mi, si in zip(m, sigma)), ZERO) == 0:
                sols.append(m)
    if not sols:
        return ResonanceLattice(sigma, degree_bound, (), None, True)
    # the lowest-degree solution is componentwise minimal when the set is a ray
    gen = sols[0]
    simple = all(_is_multiple(m, gen) for m in sols)
    return ResonanceLattice(sigma, degree_bound, tuple(sols), gen if simple else None, simple)


def invariant_monomials(profile: DiagonalProfile, max_degree: int) -> list[tuple]:
    out = []
    for k in range(1, max_degree + 1):
        out.extend(monomial_relative_invariants(profile, [ZERO] * len(profile.basis), k))
    return out


def divisible_pairs(monos: Sequence[tuple]) -> list[tuple]:
    """Pairs (a, b) with a exponentwise >= b, a != b: then x^a / x^b is a polynomial."""
    return [(a, b) for a, b in itertools.permutations(monos, 2) if all(x >= y for x, y in zip(a, b))]
