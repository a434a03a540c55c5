"""Formal normal forms for fields with a diagonal rational linear part.

For ``B = diag(sigma)`` the operator ``u -> [u, Bx]`` is diagonal on monomial
fields: ``[x^r e_l, Bx] = -(r.sigma - sigma_l) x^r e_l``. Each degree is
normalized by one generator ``u_k`` that cancels every nonresonant monomial and
has no component along resonant ones, so the homological update reads
``new f_k = old f_k + [u_k, Bx]``.

A commuting diagonal symmetry ``A`` is respected automatically: when f is
A-equivariant every monomial it contains is A-resonant, hence so is every
generator. This is re-checked at each degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import InternalInconsistency, UnsupportedInput, ValidationError
from .exactla import ONE, ZERO, QMatrix, format_rational
from .polyalg import Poly, VectorField, homogeneous_components, is_equivariant, lie_bracket, monomials


@dataclass(frozen=True)
class FormalField:
    """``Bx + sum_k f_k`` truncated at degree ``truncation``; ``nonlinear[k]`` has degree k >= 2."""

    linear: QMatrix
    nonlinear: Mapping = field(default_factory=dict)
    truncation: int = 2

    def __post_init__(self):
        n = self.linear.rows
        if self.linear.cols != n:
            raise ValidationError("linear part must be square")
        clean = {}
        for k, f in self.nonlinear.items():
            if k < 2 or k > self.truncation:
                raise ValidationError(f"nonlinear degree {k} outside 2..{self.truncation}")
            if f.n != n or not f.is_homogeneous(k):
                raise ValidationError(f"part of degree {k} is not a homogeneous field in dimension {n}")
            if not f.is_zero():
                clean[k] = f
        object.__setattr__(self, "nonlinear", dict(sorted(clean.items())))

    @property
    def n(self) -> int:
        return self.linear.rows

    @classmethod
    def from_field(cls, f: VectorField, truncation: int) -> "FormalField":
        """Split a polynomial field; it must vanish at 0. Terms above the truncation are dropped."""
        parts = homogeneous_components(f)
        if parts.get(0) is not None and not parts[0].is_zero():
            raise ValidationError("field must vanish at the origin")
        lin = parts.get(1, VectorField.zero(f.n))
        rows = []
        for comp in lin.components:
            row = []
            for j in range(f.n):
                e = [0] * f.n
                e[j] = 1
                row.append(comp.coeff(tuple(e)))
            rows.append(row)
        linear = QMatrix.from_rows(rows) if f.n else QMatrix.zeros(0)
        return cls(linear, {k: v for k, v in parts.items() if 2 <= k <= truncation}, truncation)

    def to_field(self) -> VectorField:
        out = VectorField.linear(self.linear)
        for f in self.nonlinear.values():
            out = out + f
        return out

    def part(self, k: int) -> VectorField:
        return self.nonlinear.get(k, VectorField.zero(self.n))

    def is_linear(self) -> bool:
        return not self.nonlinear

    def __eq__(self, other):
        return (isinstance(other, FormalField) and self.linear == other.linear
                and self.truncation == other.truncation and self.nonlinear == other.nonlinear)

    def to_json(self) -> dict:
        return {
            "linear": [[format_rational(x) for x in self.linear.row(i)] for i in range(self.n)],
            "nonlinear": {str(k): f.to_strings() for k, f in self.nonlinear.items()},
            "truncation": self.truncation,
        }


def _spectrum(m: QMatrix, name: str) -> tuple:
    if not m.is_square or not m.is_diagonal():
        raise UnsupportedInput(f"{name} must be diagonal; only semisimple linear parts are supported")
    return m.diagonal()


def _detuning(r, ell, sigma):
    return sum((ri * si for ri, si in zip(r, sigma)), ZERO) - sigma[ell]


def resonant_space(b: QMatrix, k: int, symmetry: QMatrix | None = None) -> list[VectorField]:
    """Monomial fields x^r e_l with |r| = k resonant for B and, if given, for the symmetry."""
    sigma = _spectrum(b, "B")
    tau = _spectrum(symmetry, "symmetry") if symmetry is not None else None
    if tau is not None and len(tau) != len(sigma):
        raise ValidationError("symmetry and linear part have different sizes")
    n = len(sigma)
    out = []
    for r in monomials(n, k):
        for ell in range(n):
            if _detuning(r, ell, sigma) == 0 and (tau is None or _detuning(r, ell, tau) == 0):
                out.append(VectorField.monomial(r, ell))
    return out


def _series_terms(f: FormalField):
    yield VectorField.linear(f.linear)
    yield from f.nonlinear.values()


def push_forward(f: FormalField, u: VectorField, truncation: int | None = None) -> FormalField:
    """Transform f by the time-one flow of u (to first order x = y + u(y)), truncated.

    Uses the Lie series ``sum_j ad_u^j f / j!`` with ``ad_u g = [u, g]``; each
    bracket raises degree by ``deg u - 1``, so the sum is finite.
    """
    d = f.truncation if truncation is None else truncation
    if u.is_zero():
        return FormalField(f.linear, {k: v for k, v in f.nonlinear.items() if k <= d}, d)
    if not u.is_homogeneous() or u.degree < 2:
        raise ValidationError("generator must be homogeneous of degree at least 2")
    total = VectorField.zero(f.n)
    for g in _series_terms(f):
        term = g.truncate(d)
        j = 0
        while not term.is_zero():
            total = total + term.scale(ONE / math.factorial(j))
            j += 1
            term = lie_bracket(u, term).truncate(d)
    out = FormalField.from_field(total, d)
    if out.linear != f.linear:
        raise InternalInconsistency("near-identity change altered the linear part")
    return out


@dataclass
class DegreeStep:
    degree: int
    resonant_basis: list
    removed: VectorField
    generator: VectorField

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "resonant_basis": [f.to_strings() for f in self.resonant_basis],
            "removed": self.removed.to_strings(),
            "generator": self.generator.to_strings(),
        }


@dataclass
class NormalFormResult:
    normal_form: FormalField
    generators: dict
    steps: list

    def to_json(self) -> dict:
        return {
            "convention": "new f_k = f_k + [u_k, Bx], [f, g] = Dg.f - Df.g",
            "normal_form": self.normal_form.to_json(),
            "steps": [s.to_json() for s in self.steps],
        }


def _check_symmetry(f: FormalField, a: QMatrix) -> None:
    if a.rows != f.n:
        raise ValidationError("symmetry has the wrong size")
    if not a.commutator(f.linear).is_zero():
        raise ValidationError("symmetry does not commute with the linear part")
    for k, part in f.nonlinear.items():
        if not is_equivariant(part, [a]):
            raise ValidationError(f"degree-{k} part is not equivariant under the symmetry")


def normal_form(f: FormalField, truncation: int | None = None,
                symmetry: QMatrix | None = None) -> NormalFormResult:
    """Remove every nonresonant term up to the truncation degree."""
    d = f.truncation if truncation is None else truncation
    sigma = _spectrum(f.linear, "linear part")
    if symmetry is not None:
        _spectrum(symmetry, "symmetry")
        _check_symmetry(f, symmetry)
    cur = FormalField(f.linear, {k: v for k, v in f.nonlinear.items() if k <= d}, d)
    n = f.n
    generators = {}
    steps = []
    for k in range(2, d + 1):
        part = cur.part(k)
        gen: dict = {}
        removed = [dict() for _ in range(n)]
        for ell, comp in enumerate(part.components):
            for r, c in comp.terms.items():
                mu = _detuning(r, ell, sigma)
                if mu:
                    gen.setdefault(ell, {})[r] = c / mu
                    removed[ell][r] = c
        u = VectorField(Poly(n, gen.get(ell, {})) for ell in range(n))
        generators[k] = u
        if not u.is_zero():
            cur = push_forward(cur, u, d)
        left = cur.part(k)
        for ell, comp in enumerate(left.components):
            for r in comp.terms:
                if _detuning(r, ell, sigma):
                    raise InternalInconsistency(f"nonresonant term survived at degree {k}")
        if symmetry is not None:
            if not is_equivariant(u, [symmetry]):
                raise InternalInconsistency(f"degree-{k} generator breaks the symmetry")
            if not all(is_equivariant(g, [symmetry]) for g in cur.nonlinear.values()):
                raise InternalInconsistency(f"normalizing degree {k} broke the symmetry")
        removed_field = VectorField(Poly(n, terms) for terms in removed)
        steps.append(DegreeStep(k, resonant_space(f.linear, k, symmetry), removed_field, u))
    return NormalFormResult(cur, generators, steps)


def apply_generators(f: FormalField, generators: Mapping, truncation: int | None = None) -> FormalField:
    """Replay recorded generators in increasing degree."""
    d = f.truncation if truncation is None else truncation
    cur = FormalField(f.linear, {k: v for k, v in f.nonlinear.items() if k <= d}, d)
    for k in sorted(generators):
        cur = push_forward(cur, generators[k], d)
    return cur
