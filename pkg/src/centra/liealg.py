"""Matrix Lie algebras: bracket closure, structure constants, derived series."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import CapExceeded, UnsupportedInput
from .exactla import QMatrix, Span, ZERO


def _flat(m: QMatrix) -> dict:
    return {i: v for i, v in enumerate(m.entries) if v}


@dataclass(frozen=True)
class LieAlgebra:
    """A Lie algebra of n x n matrices given by a linearly independent basis.

    ``structure_constants[i][j][k]`` is the coefficient of ``basis[k]`` in the
    matrix commutator ``[basis[i], basis[j]]``.
    """

    n: int
    basis: tuple
    structure_constants: tuple

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coordinates(self, m: QMatrix):
        """Coordinates of a matrix in the basis, or None if outside the span."""
        span = Span()
        for b in self.basis:
            span.add(_flat(b))
        return span.coordinates(_flat(m))

    def element(self, coeffs: Sequence) -> QMatrix:
        out = QMatrix.zeros(self.n)
        for c, b in zip(coeffs, self.basis):
            if c:
                out = out + b.scale(c)
        return out

    def is_abelian(self) -> bool:
        return all(not c for row in self.structure_constants for col in row for c in col)


def _structure_constants(basis: list[QMatrix]) -> tuple:
    span = Span()
    for b in basis:
        span.add(_flat(b))
    table = []
    for a in basis:
        row = []
        for b in basis:
            coords = span.coordinates(_flat(a.commutator(b)))
            if coords is None:
                raise ValueError("basis is not closed under the commutator")
            row.append(tuple(coords))
        table.append(tuple(row))
    return tuple(table)


def from_basis(basis: Sequence[QMatrix]) -> LieAlgebra:
    """Wrap an already independent, bracket-closed basis."""
    basis = list(basis)
    n = basis[0].rows if basis else 0
    return LieAlgebra(n, tuple(basis), _structure_constants(basis))


def bracket_closure(generators: Sequence[QMatrix], cap: int = 200, n: int | None = None) -> LieAlgebra:
    """Smallest commutator-closed subspace containing the generators.

    Generators need not be independent; a spanning subset is kept in
    first-seen order and commutators are appended as they are discovered.
    """
    gens = list(generators)
    if n is None:
        if not gens:
            raise ValueError("need at least one generator or an explicit dimension")
        n = gens[0].rows
    for g in gens:
        if g.rows != n or g.cols != n:
            raise ValueError(f"generator of shape {g.rows}x{g.cols}, expected {n}x{n}")
    span = Span()
    basis: list[QMatrix] = []
    for g in gens:
        if span.add(_flat(g)):
            basis.append(g)
            if len(basis) > cap:
                raise CapExceeded(f"Lie algebra dimension exceeds cap {cap}", basis)
    i = 0
    while i < len(basis):
        for j in range(i):
            c = basis[j].commutator(basis[i])
            if span.add(_flat(c)):
                basis.append(c)
                if len(basis) > cap:
                    raise CapExceeded(f"Lie algebra dimension exceeds cap {cap}", basis)
        i += 1
    return LieAlgebra(n, tuple(basis), _structure_constants(basis))


def derived_algebra(m: LieAlgebra) -> LieAlgebra:
    span = Span()
    basis = []
    for i in range(m.dim):
        for j in range(i + 1, m.dim):
            c = m.basis[i].commutator(m.basis[j])
            if span.add(_flat(c)):
                basis.append(c)
    return LieAlgebra(m.n, tuple(basis), _structure_constants(basis))


def derived_series(m: LieAlgebra) -> list[int]:
    """Dimensions along M, [M,M], [[M,M],[M,M]], ... until it stabilizes."""
    dims = [m.dim]
    cur = m
    while cur.dim:
        nxt = derived_algebra(cur)
        if nxt.dim == cur.dim:
            break
        dims.append(nxt.dim)
        cur = nxt
    return dims


def is_solvable(m: LieAlgebra) -> tuple[bool, list[int]]:
    """Whether the derived series reaches zero; the series dimensions are the witness."""
    dims = derived_series(m)
    return dims[-1] == 0, dims


def is_perfect(m: LieAlgebra) -> bool:
    return derived_algebra(m).dim == m.dim


def jacobi_defect(m: LieAlgebra):
    """Largest violation of antisymmetry or Jacobi in the structure constants (0 if none)."""
    c = m.structure_constants
    r = m.dim
    for i in range(r):
        for j in range(r):
            for k in range(r):
                if c[i][j][k] != -c[j][i][k]:
                    return ("antisymmetry", i, j, k)
    for i in range(r):
        for j in range(r):
            for k in range(r):
                for t in range(r):
                    s = ZERO
                    for l in range(r):
                        s += c[j][k][l] * c[i][l][t] + c[k][i][l] * c[j][l][t] + c[i][j][l] * c[k][l][t]
                    if s:
                        return ("jacobi", i, j, k)
    return None


@dataclass(frozen=True)
class DiagonalProfile:
    """Diagonal linear forms rho_i, as values on the algebra's basis.

    ``forms[i][j] = basis[j][i, i]``. ``triangular`` is True when the basis is
    upper triangular but not diagonal; such profiles only yield candidates that
    must be re-checked against the full matrices.
    """

    forms: tuple
    basis: tuple
    triangular: bool = False

    @property
    def n(self) -> int:
        return len(self.forms)

    def spectrum(self, j: int) -> tuple:
        """Diagonal of the j-th basis matrix."""
        return tuple(f[j] for f in self.forms)


def _profile(m: LieAlgebra, triangular: bool) -> DiagonalProfile:
    forms = tuple(tuple(b[i, i] for b in m.basis) for i in range(m.n))
    return DiagonalProfile(forms, m.basis, triangular)


def diagonal_profile(m: LieAlgebra) -> DiagonalProfile | None:
    if all(b.is_diagonal() for b in m.basis):
        return _profile(m, False)
    return None


def triangular_profile(m: LieAlgebra) -> DiagonalProfile | None:
    if all(b.is_upper_triangular() for b in m.basis):
        return _profile(m, not all(b.is_diagonal() for b in m.basis))
    return None


def require_triangular(m: LieAlgebra) -> DiagonalProfile:
    prof = triangular_profile(m)
    if prof is None:
        raise UnsupportedInput(
            "the monomial method needs the algebra in upper-triangular form; "
            "triangularize the (solvable) algebra first and supply that basis"
        )
    return prof
