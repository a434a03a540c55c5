"""Graded centralizer C(M) of a linear Lie algebra and finiteness verdicts.

A degree-k field is written in the monomial-field basis ``x^r e_l`` with
``r`` in lex-descending order and ``l`` fastest, i.e. coordinate
``index(r) * n + l``. Equivariance under ``B`` is the linear condition
``[Bx, f] = Df.Bx - Bf = 0``; stacking these operators for every basis matrix
and taking the kernel gives the degree-k slice of the centralizer.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .errors import InternalInconsistency
from .exactla import ZERO, QMatrix, Rational, SparseOperator, Span, format_rational, joint_kernel
from .liealg import LieAlgebra, diagonal_profile
from .polyalg import Poly, VectorField, directional, format_poly, lie_bracket, lie_derivative, monomial_index, monomials


def _nonzero_entries(b: QMatrix):
    return [(i, j, b[i, j]) for i in range(b.rows) for j in range(b.cols) if b[i, j]]


@lru_cache(maxsize=None)
def _shift_table(n: int, k: int) -> tuple:
    """table[ci][i][j] = index of x^(r - e_i + e_j) for r = monomials[ci] (None if r_i = 0)."""
    mons = monomials(n, k)
    idx = monomial_index(n, k)
    table = []
    for r in mons:
        per_i = []
        for i in range(n):
            if not r[i]:
                per_i.append(None)
                continue
            row = []
            for j in range(n):
                s = list(r)
                s[i] -= 1
                s[j] += 1
                row.append(idx[tuple(s)])
            per_i.append(tuple(row))
        table.append(tuple(per_i))
    return tuple(table)


class BracketOperator(SparseOperator):
    """f -> [Bx, f] on degree-k fields, in the monomial-field basis."""

    def __init__(self, b: QMatrix, n: int, k: int):
        self.n = n
        self.k = k
        self.key = (b.entries, n, k)
        self.mons = monomials(n, k)
        self.size = len(self.mons) * n
        self.table = _shift_table(n, k)
        self.nz = _nonzero_entries(b)
        self.by_col: dict = {}
        for i, j, v in self.nz:
            self.by_col.setdefault(j, []).append((i, v))

    def column(self, col: int) -> dict:
        n = self.n
        ci, ell = divmod(col, n)
        r = self.mons[ci]
        shifts = self.table[ci]
        out: dict = {}
        # Df . Bx : r_i B_ij x^(r - e_i + e_j) e_l
        for i, j, v in self.nz:
            ri = r[i]
            if ri:
                t = shifts[i][j] * n + ell
                out[t] = out.get(t, ZERO) + ri * v
        # - B f : -B_il x^r e_i
        for i, v in self.by_col.get(ell, ()):
            t = ci * n + i
            out[t] = out.get(t, ZERO) - v
        return out

    def rows(self, size: int | None = None) -> list[dict]:
        n = self.n
        table = self.table
        nz = self.nz
        by_col = list(self.by_col.items())
        block: dict = {}
        for ci, r in enumerate(self.mons):
            shifts = table[ci]
            base = ci * n
            for i, j, v in nz:
                ri = r[i]
                if ri:
                    w = ri * v
                    tb = shifts[i][j] * n
                    for ell in range(n):
                        row = block.get(tb + ell)
                        if row is None:
                            block[tb + ell] = {base + ell: w}
                        else:
                            col = base + ell
                            row[col] = row.get(col, ZERO) + w
            for ell, entries in by_col:
                col = base + ell
                for i, v in entries:
                    row = block.get(base + i)
                    if row is None:
                        block[base + i] = {col: -v}
                    else:
                        row[col] = row.get(col, ZERO) - v
        out = []
        for t in sorted(block):
            row = block[t]
            if not all(row.values()):
                row = {c: v for c, v in row.items() if v}
            if row:
                out.append(row)
        return out


def bracket_operator_rows(matrices: Sequence[QMatrix], n: int, k: int) -> list[dict]:
    """Sparse rows of the stacked maps f -> [Bx, f] on degree-k fields."""
    rows: list[dict] = []
    for b in matrices:
        rows.extend(BracketOperator(b, n, k).rows())
    return rows


def equivariant_space(m: LieAlgebra, k: int) -> list[VectorField]:
    """Basis of the homogeneous degree-k fields commuting with every Bx, B in M."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    n = m.n
    size = len(monomials(n, k)) * n
    ops = [BracketOperator(b, n, k) for b in m.basis]
    return [VectorField.from_coefficients(n, k, v) for v in joint_kernel(ops, size)]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CENTRA_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class GradedBasis:
    algebra: LieAlgebra
    per_degree: dict

    @property
    def max_degree(self) -> int:
        return max(self.per_degree) if self.per_degree else -1

    def dimensions(self) -> dict:
        return {k: len(v) for k, v in sorted(self.per_degree.items())}

    def top_degree(self):
        """Largest degree with a nonzero stored field, or None."""
        degs = [k for k, v in self.per_degree.items() if v]
        return max(degs) if degs else None

    def span(self, k: int) -> Span:
        s = Span()
        for f in self.per_degree.get(k, ()):
            s.add(f.coefficient_vector(k))
        return s


def centralizer_up_to(m: LieAlgebra, max_degree: int, workers: int | None = None) -> GradedBasis:
    """Degree slices 0..max_degree of C(M). Degree 0 holds constant fields in ker M."""
    if max_degree < 1:
        raise ValueError("max_degree must be at least 1")
    degrees = range(max_degree + 1)
    workers = _workers() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda k: equivariant_space(m, k), degrees))
    else:
        results = [equivariant_space(m, k) for k in degrees]
    return GradedBasis(m, dict(zip(degrees, results)))


@dataclass
class ClosureReport:
    pairs_checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_directional_closure(g: GradedBasis) -> ClosureReport:
    """Check Dp.q lands in the stored slice for every stored pair within range.

    The pair (p, q) is skipped when deg p + deg q - 1 exceeds the stored range.
    A violation means the engine is wrong: closure under Dp.q is a theorem.
    """
    report = ClosureReport()
    top = g.max_degree
    spans = {k: g.span(k) for k in g.per_degree}
    for a, ps in sorted(g.per_degree.items()):
        for b, qs in sorted(g.per_degree.items()):
            target = a + b - 1
            if target > top:
                continue
            for i, p in enumerate(ps):
                for j, q in enumerate(qs):
                    report.pairs_checked += 1
                    r = directional(p, q)
                    if r.is_zero():
                        continue
                    if target < 0 or not spans[target].contains(r.coefficient_vector(target)):
                        report.violations.append((a, i, b, j))
    return report


@dataclass
class NilpotencyReport:
    max_degree: int
    pairs_checked: int = 0
    table: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def nilpotency_witness(g: GradedBasis, verdict) -> NilpotencyReport:
    """Verify Dp.q = 0 whenever deg p + deg q > d + 1, with d from a finite verdict."""
    if not isinstance(verdict, FiniteCertified):
        raise ValueError("nilpotency check needs a FiniteCertified verdict")
    d = verdict.max_degree
    report = NilpotencyReport(d)
    if d <= 1:
        return report
    if g.max_degree < d:
        raise ValueError(f"graded basis stops at degree {g.max_degree}, below the certified bound {d}")
    for a, ps in sorted(g.per_degree.items()):
        for b, qs in sorted(g.per_degree.items()):
            if a + b <= d + 1:
                continue
            for i, p in enumerate(ps):
                for j, q in enumerate(qs):
                    report.pairs_checked += 1
                    report.table.append((a, i, b, j))
                    if not directional(p, q).is_zero():
                        report.violations.append((a, i, b, j))
    return report


# -- verdicts -----------------------------------------------------------------

@dataclass(frozen=True)
class InfiniteCertified:
    witness: Poly
    powers_checked: int

    def to_json(self) -> dict:
        return {
            "verdict": "InfiniteCertified",
            "certificate": {
                "witness": format_poly(self.witness),
                "degree": self.witness.degree,
                "family": "phi^m * E",
                "powers_checked": self.powers_checked,
            },
        }


@dataclass(frozen=True)
class FiniteCertified:
    max_degree: int
    combination: tuple
    diagonal: tuple

    def to_json(self) -> dict:
        return {
            "verdict": "FiniteCertified",
            "max_degree": self.max_degree,
            "certificate": {
                "combination": [format_rational(c) for c in self.combination],
                "diagonal": [format_rational(c) for c in self.diagonal],
                "sign": "negative" if self.diagonal and self.diagonal[0] < 0 else "positive",
            },
        }


@dataclass(frozen=True)
class Undetermined:
    searched_bound: int

    def to_json(self) -> dict:
        return {"verdict": "Undetermined", "searched_bound": self.searched_bound}


@dataclass
class CertificateReport:
    witness: Poly
    powers_checked: list


def infinite_certificate(m: LieAlgebra, phi: Poly, checks: int = 3) -> CertificateReport:
    """Check phi is a nonconstant invariant and phi^j * E commutes with M for j = 1..checks."""
    if phi.is_constant():
        raise ValueError("witness must be a nonconstant polynomial")
    for b in m.basis:
        if not lie_derivative(b, phi).is_zero():
            raise ValueError(f"{format_poly(phi)} is not invariant")
    e = VectorField.identity(m.n)
    lin = [VectorField.linear(b) for b in m.basis]
    done = []
    power = Poly.constant(m.n, 1)
    for j in range(1, checks + 1):
        power = power.mul(phi)
        f = e * power
        for bx in lin:
            if not lie_bracket(bx, f).is_zero():
                raise InternalInconsistency(f"phi^{j} * E fails equivariance")
        done.append(j)
    return CertificateReport(phi, done)


def _fourier_motzkin(ineqs: list[tuple[list, Rational]], nvars: int):
    """Find x with a.x <= b for every (a, b), or None. Deterministic.

    Variables are eliminated last to first; back substitution picks the value
    of smallest magnitude in each feasible interval, preferring integers.
    """
    stages = [ineqs]
    cur = ineqs
    for v in range(nvars - 1, -1, -1):
        pos = [(a, b) for a, b in cur if a[v] > 0]
        neg = [(a, b) for a, b in cur if a[v] < 0]
        nxt = [(a, b) for a, b in cur if a[v] == 0]
        for ap, bp in pos:
            for an, bn in neg:
                lp, ln = ap[v], -an[v]
                a = [ln * x + lp * y for x, y in zip(ap, an)]
                nxt.append((a, ln * bp + lp * bn))
        stages.append(nxt)
        cur = nxt
    if any(b < 0 for _, b in cur):
        return None
    x = [ZERO] * nvars
    for v in range(nvars):
        lo = hi = None
        for a, b in stages[nvars - 1 - v]:
            if all(a[u] == 0 for u in range(v + 1, nvars)) and a[v] != 0:
                rest = b - sum((a[u] * x[u] for u in range(v)), ZERO)
                bound = rest / a[v]
                if a[v] > 0:
                    hi = bound if hi is None else min(hi, bound)
                else:
                    lo = bound if lo is None else max(lo, bound)
        x[v] = _pick(lo, hi)
    return x


def _pick(lo, hi) -> Rational:
    if (lo is None or lo <= 0) and (hi is None or hi >= 0):
        return ZERO
    if hi is not None and hi < 0:
        cand = Rational(math.floor(hi))
        if lo is None or cand >= lo:
            return cand
        return (lo + hi) / 2
    cand = Rational(math.ceil(lo))
    if hi is None or cand <= hi:
        return cand
    return (lo + hi) / 2


def same_sign_combination(m: LieAlgebra):
    """Coefficients c with sum c_j B_j having all diagonal entries < 0, or None.

    Only for diagonal bases. Strictness is handled by homogeneity: solve
    ``diag(sum c_j B_j) <= -1``.
    """
    prof = diagonal_profile(m)
    if prof is None or m.dim == 0 or m.n == 0:
        return None
    ineqs = [(list(form), Rational(-1)) for form in prof.forms]
    c = _fourier_motzkin(ineqs, m.dim)
    if c is None:
        return None
    sigma = tuple(sum((cj * f for cj, f in zip(c, form)), ZERO) for form in prof.forms)
    if not all(s < 0 for s in sigma):
        raise InternalInconsistency("Fourier-Motzkin returned an infeasible point")
    return tuple(c), sigma


def finiteness_report(m: LieAlgebra, search_bound: int):
    """InfiniteCertified, FiniteCertified or Undetermined for C(M)."""
    from .invariants import invariant_space

    if search_bound < 1:
        raise ValueError("search bound must be at least 1")
    for k in range(1, search_bound + 1):
        inv = invariant_space(m, k)
        if inv:
            cert = infinite_certificate(m, inv[0], 3)
            return InfiniteCertified(inv[0], len(cert.powers_checked))
    found = same_sign_combination(m)
    if found is not None:
        c, sigma = found
        mags = [abs(s) for s in sigma]
        d = math.floor(max(mags) / min(mags))
        return FiniteCertified(int(d), c, sigma)
    return Undetermined(search_bound)
