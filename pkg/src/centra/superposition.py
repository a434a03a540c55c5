"""Closed-form exp-polynomial solutions of ODEs driven by centralizer fields.

A system ``x' = sum_j sigma_j(t) e^{alpha_j t} p_j(x)`` whose seeds ``p_j``
generate a family closed under ``(u, p) -> Du.p`` becomes linear and strictly
triangular in the coordinates ``w_u = u(x(t))``: the derivative of ``w_u`` only
involves fields of higher degree. Integrating from the top degree down gives
``x(t)`` as a finite sum of terms ``c t^k e^{lambda t}``.

Autonomous fields ``Bx + q~`` are first moved to that shape by the substitution
``x = e^{tB} z``; see :func:`chen_reduce`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import CapExceeded, InternalInconsistency, UnsupportedInput, ValidationError
from .exactla import (
    ONE,
    ZERO,
    QMatrix,
    Rational,
    Span,
    as_rational,
    charpoly,
    format_rational,
    kernel_basis,
    parse_rational,
    solve,
)
from .liealg import LieAlgebra
from .polyalg import Poly, VectorField, directional, is_equivariant, lie_bracket


# -- exp-polynomials -------------------------------------------------------------

class ExpPoly:
    """Finite sum of ``c * t^k * e^{lam t}`` with rational ``lam`` and ``c``.

    Stored as a map ``(lam, k) -> c`` with no zero coefficients.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for (lam, k), c in terms.items():
                if k < 0:
                    raise ValueError("negative power of t")
                c = as_rational(c)
                if c:
                    key = (as_rational(lam), int(k))
                    clean[key] = clean.get(key, ZERO) + c
                    if not clean[key]:
                        del clean[key]
        self.terms = clean

    @classmethod
    def zero(cls) -> "ExpPoly":
        return cls()

    @classmethod
    def constant(cls, c) -> "ExpPoly":
        return cls({(ZERO, 0): c})

    @classmethod
    def term(cls, c, k: int = 0, lam=0) -> "ExpPoly":
        return cls({(lam, k): c})

    @classmethod
    def from_coefficients(cls, sigma: Sequence, alpha=0) -> "ExpPoly":
        """``sigma(t) e^{alpha t}`` with ``sigma`` given lowest power first."""
        return cls({(alpha, k): c for k, c in enumerate(sigma)})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def rates(self) -> tuple:
        return tuple(sorted({lam for lam, _ in self.terms}))

    def is_polynomial(self) -> bool:
        """True when every term has rate 0, i.e. the function is a polynomial in t."""
        return all(lam == 0 for lam, _ in self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items())

    def __add__(self, other):
        if not isinstance(other, ExpPoly):
            other = ExpPoly.constant(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            v = out.get(key, ZERO) + c
            if v:
                out[key] = v
            else:
                out.pop(key, None)
        return ExpPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly._raw({key: -c for key, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, ExpPoly):
            other = ExpPoly.constant(other)
        return self + (-other)

    def scale(self, c) -> "ExpPoly":
        c = as_rational(c)
        if not c:
            return ExpPoly()
        return ExpPoly._raw({key: c * v for key, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, ExpPoly):
            return self.scale(other)
        out: dict = {}
        for (l1, k1), c1 in self.terms.items():
            for (l2, k2), c2 in other.terms.items():
                key = (l1 + l2, k1 + k2)
                v = out.get(key, ZERO) + c1 * c2
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return ExpPoly._raw(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative exponent")
        out = ExpPoly.constant(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    def derivative(self) -> "ExpPoly":
        out: dict = {}
        for (lam, k), c in self.terms.items():
            if k:
                key = (lam, k - 1)
                out[key] = out.get(key, ZERO) + c * k
            if lam:
                key = (lam, k)
                out[key] = out.get(key, ZERO) + c * lam
        return ExpPoly(out)

    def value_at(self, t) -> Rational:
        """Exact value; only possible when every ``e^{lam t}`` is rational (t = 0 or lam = 0)."""
        t = as_rational(t)
        total = ZERO
        for (lam, k), c in self.terms.items():
            if lam and t:
                raise UnsupportedInput(f"e^({format_rational(lam * t)}) is not rational")
            total += c * t ** k
        return total

    def evaluate_float(self, t: float) -> float:
        return math.fsum(float(c) * t ** k * math.exp(float(lam) * t) for (lam, k), c in self.terms.items())

    def __eq__(self, other):
        if isinstance(other, ExpPoly):
            return self.terms == other.terms
        if not self.terms:
            return other == 0
        return False

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def to_json(self) -> list:
        return [{"lambda": format_rational(lam), "k": k, "coeff": format_rational(c)}
                for (lam, k), c in self.sorted_terms()]

    @classmethod
    def from_json(cls, records) -> "ExpPoly":
        return cls({(parse_rational(r["lambda"]), int(r["k"])): parse_rational(r["coeff"]) for r in records})

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (lam, k), c in self.sorted_terms():
            factors = [] if c in (1, -1) and (k or lam) else [format_rational(c)]
            if k:
                factors.append("t" if k == 1 else f"t^{k}")
            if lam:
                factors.append(f"exp({format_rational(lam)}*t)")
            body = "*".join(factors)
            if c == -1 and (k or lam):
                body = "-" + body
            parts.append(body)
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"ExpPoly({self})"


def _antiderivative_term(lam, k: int) -> dict:
    """A primitive of ``t^k e^{lam t}`` as a term map."""
    if lam == 0:
        return {(ZERO, k + 1): ONE / (k + 1)}
    # e^{lam t} sum_j (-1)^j k!/(k-j)! t^{k-j} / lam^{j+1}
    out = {}
    coef = ONE / lam
    for j in range(k + 1):
        out[(lam, k - j)] = coef
        coef = -coef * (k - j) / lam
    return out


def integrate_exppoly(f: ExpPoly, t0=0, init=0) -> ExpPoly:
    """The antiderivative F of f with F(t0) = init."""
    acc: dict = {}
    for (lam, k), c in f.terms.items():
        for key, v in _antiderivative_term(lam, k).items():
            acc[key] = acc.get(key, ZERO) + c * v
    prim = ExpPoly(acc)
    shift = as_rational(init) - prim.value_at(t0)
    return prim + ExpPoly.constant(shift)


# vector-valued exp-polynomials are tuples of ExpPoly

def vec_derivative(x: Sequence[ExpPoly]) -> tuple:
    return tuple(c.derivative() for c in x)


def vec_value_at(x: Sequence[ExpPoly], t) -> tuple:
    return tuple(c.value_at(t) for c in x)


def vec_evaluate_float(x: Sequence[ExpPoly], t: float) -> list:
    return [c.evaluate_float(t) for c in x]


def vec_is_zero(x: Sequence[ExpPoly]) -> bool:
    return all(c.is_zero() for c in x)


def vec_to_json(x: Sequence[ExpPoly]) -> list:
    """Records ``{"lambda", "k", "coeff": [per component]}`` merged over components."""
    keys = sorted({key for c in x for key in c.terms})
    return [{"lambda": format_rational(lam), "k": k,
             "coeff": [format_rational(c.terms.get((lam, k), ZERO)) for c in x]}
            for lam, k in keys]


def vec_from_json(records, n: int) -> tuple:
    comps = [dict() for _ in range(n)]
    for r in records:
        coeffs = r["coeff"]
        if len(coeffs) != n:
            raise ValueError(f"record has {len(coeffs)} coefficients, expected {n}")
        key = (parse_rational(r["lambda"]), int(r["k"]))
        for i, c in enumerate(coeffs):
            comps[i][key] = parse_rational(c)
    return tuple(ExpPoly(c) for c in comps)


def substitute(p: Poly, x: Sequence[ExpPoly], cache: dict | None = None) -> ExpPoly:
    """``p(x(t))`` as an exp-polynomial."""
    cache = {} if cache is None else cache

    def power(i, e):
        key = (i, e)
        if key not in cache:
            cache[key] = x[i] if e == 1 else power(i, e - 1) * x[i]
        return cache[key]

    total = ExpPoly()
    for m, c in p.terms.items():
        term = ExpPoly.constant(c)
        for i, e in enumerate(m):
            if e:
                term = term * power(i, e)
        total = total + term
    return total


def apply_field(f: VectorField, x: Sequence[ExpPoly]) -> tuple:
    cache: dict = {}
    return tuple(substitute(c, x, cache) for c in f.components)


# -- closed families and systems ----------------------------------------------

@dataclass(frozen=True)
class ClosedFamily:
    """Fields closed under ``(u, p) -> Du.p`` for every seed ``p``.

    ``seeds`` are indices into ``fields``. ``table[(i, s)]`` lists pairs
    ``(k, c)`` with ``directional(fields[i], fields[s]) = sum c * fields[k]``.
    """

    n: int
    algebra: LieAlgebra
    fields: tuple
    seeds: tuple
    table: dict

    def degree(self, i: int) -> int:
        return self.fields[i].degree

    def verify(self) -> None:
        """Re-check equivariance, the table identities and the degree increase."""
        for i, u in enumerate(self.fields):
            if not is_equivariant(u, self.algebra.basis):
                raise InternalInconsistency(f"family field {i} is not equivariant")
        for i in range(len(self.fields)):
            for s in self.seeds:
                lhs = directional(self.fields[i], self.fields[s])
                rhs = VectorField.zero(self.n)
                for k, c in self.table.get((i, s), ()):
                    if self.degree(k) <= self.degree(i):
                        raise InternalInconsistency(f"table entry ({i}, {s}) does not raise degree")
                    rhs = rhs + self.fields[k].scale(c)
                if lhs != rhs:
                    raise InternalInconsistency(f"table entry ({i}, {s}) is wrong")


def close_family(m: LieAlgebra, seeds: Sequence[VectorField], cap: int = 200,
                 max_degree: int | None = None) -> ClosedFamily:
    """Smallest family containing the seeds and closed under ``Du.p`` for seeds ``p``.

    Seeds must be homogeneous of degree > 1, equivariant, and linearly independent.
    """
    n = m.n
    fields: list[VectorField] = []
    spans: dict[int, Span] = {}
    by_degree: dict[int, list[int]] = {}

    def admit(f: VectorField) -> bool:
        k = f.degree
        if max_degree is not None and k > max_degree:
            raise CapExceeded(f"family reaches degree {k}, above the bound {max_degree}", fields)
        span = spans.setdefault(k, Span())
        if not span.add(f.coefficient_vector(k)):
            return False
        by_degree.setdefault(k, []).append(len(fields))
        fields.append(f)
        if len(fields) > cap:
            raise CapExceeded(f"family size exceeds cap {cap}", fields)
        return True

    seed_idx = []
    for j, p in enumerate(seeds):
        if p.n != n:
            raise ValidationError(f"seed {j} lives in dimension {p.n}, expected {n}")
        if p.is_zero() or not p.is_homogeneous() or p.degree < 2:
            raise ValidationError(f"seed {j} must be a nonzero homogeneous field of degree at least 2")
        if not is_equivariant(p, m.basis):
            raise ValidationError(f"seed {j} does not commute with the algebra")
        if not admit(p):
            raise ValidationError(f"seed {j} is linearly dependent on earlier seeds")
        seed_idx.append(len(fields) - 1)

    products: dict = {}
    i = 0
    while i < len(fields):
        for s in seed_idx:
            r = directional(fields[i], fields[s])
            products[(i, s)] = r
            if not r.is_zero():
                admit(r)
        i += 1

    table = {}
    for (i, s), r in products.items():
        if r.is_zero():
            continue
        k = r.degree
        coords = spans[k].coordinates(r.coefficient_vector(k))
        if coords is None:
            raise InternalInconsistency("closure product escaped the family")
        members = by_degree[k]
        table[(i, s)] = tuple((members[j], c) for j, c in enumerate(coords) if c)
    fam = ClosedFamily(n, m, tuple(fields), tuple(seed_idx), table)
    fam.verify()
    return fam


@dataclass(frozen=True)
class Coefficient:
    """``sigma(t) e^{alpha t}`` with ``sigma`` listed lowest power first."""

    sigma: tuple
    alpha: Rational = ZERO

    def exppoly(self) -> ExpPoly:
        return ExpPoly.from_coefficients(self.sigma, self.alpha)

    def to_json(self) -> dict:
        return {"sigma": [format_rational(c) for c in self.sigma], "alpha": format_rational(self.alpha)}


@dataclass(frozen=True)
class EDESystem:
    """``x' = sum_j coefficients[j](t) * fields[seeds[j]](x)``; seeds index family fields."""

    seeds: tuple
    coefficients: tuple

    def validate(self, family: ClosedFamily) -> None:
        if len(self.seeds) != len(self.coefficients):
            raise ValidationError("each seed needs exactly one coefficient")
        for s in self.seeds:
            if s not in family.seeds:
                raise ValidationError(f"field {s} is not a seed of the family")

    def is_autonomous(self) -> bool:
        return all(c.alpha == 0 and all(not v for v in c.sigma[1:]) for c in self.coefficients)

    def to_json(self) -> dict:
        return {"seeds": list(self.seeds), "coefficients": [c.to_json() for c in self.coefficients]}


def solve_elementary(family: ClosedFamily, system: EDESystem, y: Sequence, t0=0) -> tuple:
    """Exact solution x(t) with x(t0) = y, as a tuple of ExpPoly."""
    system.validate(family)
    n = family.n
    y = [as_rational(v) for v in y]
    if len(y) != n:
        raise ValidationError(f"initial value has length {len(y)}, expected {n}")
    t0 = as_rational(t0)
    if t0 and any(c.alpha for c in system.coefficients):
        raise UnsupportedInput("a nonzero start time with nonzero rates gives irrational constants; "
                               "shift time so the start is 0")
    drive = [(s, c.exppoly()) for s, c in zip(system.seeds, system.coefficients)]
    order = sorted(range(len(family.fields)), key=lambda i: (-family.degree(i), i))
    w: dict[int, tuple] = {}
    for i in order:
        rhs = [ExpPoly() for _ in range(n)]
        for s, coef in drive:
            for k, c in family.table.get((i, s), ()):
                if k not in w:
                    raise InternalInconsistency("family is not triangular")
                scaled = coef.scale(c)
                rhs = [a + scaled * b for a, b in zip(rhs, w[k])]
        start = family.fields[i].evaluate(y)
        w[i] = tuple(integrate_exppoly(r, t0, v) for r, v in zip(rhs, start))
    rhs = [ExpPoly() for _ in range(n)]
    for s, coef in drive:
        rhs = [a + coef * b for a, b in zip(rhs, w[s])]
    return tuple(integrate_exppoly(r, t0, v) for r, v in zip(rhs, y))


def system_residual(x: Sequence[ExpPoly], family: ClosedFamily, system: EDESystem) -> tuple:
    """``x' - sum_j s_j(t) p_j(x(t))``; zero for an exact solution."""
    out = list(vec_derivative(x))
    for s, coef in zip(system.seeds, system.coefficients):
        px = apply_field(family.fields[s], x)
        c = coef.exppoly()
        out = [a - c * b for a, b in zip(out, px)]
    return tuple(out)


def field_residual(x: Sequence[ExpPoly], f: VectorField) -> tuple:
    """``x' - f(x(t))`` for an autonomous polynomial field."""
    return tuple(a - b for a, b in zip(vec_derivative(x), apply_field(f, x)))


# -- numeric cross-check ----------------------------------------------------------

def system_rhs(family: ClosedFamily, system: EDESystem) -> Callable:
    terms = [(family.fields[s], c.exppoly()) for s, c in zip(system.seeds, system.coefficients)]

    def rhs(t, x):
        out = [0.0] * family.n
        for f, c in terms:
            ct = c.evaluate_float(t)
            if ct:
                for i, v in enumerate(f.evaluate_float(x)):
                    out[i] += ct * v
        return out

    return rhs


def field_rhs(f: VectorField) -> Callable:
    return lambda t, x: f.evaluate_float(x)


def rk4(rhs: Callable, y0: Sequence[float], t_start: float, t_end: float, steps: int) -> list:
    """Classical Runge-Kutta; returns the states at the ``steps + 1`` grid points."""
    h = (t_end - t_start) / steps
    y = [float(v) for v in y0]
    out = [list(y)]
    for s in range(steps):
        t = t_start + s * h
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, [a + h / 2 * b for a, b in zip(y, k1)])
        k3 = rhs(t + h / 2, [a + h / 2 * b for a, b in zip(y, k2)])
        k4 = rhs(t + h, [a + h * b for a, b in zip(y, k3)])
        y = [a + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]
        out.append(list(y))
    return out


def verify_numeric(solution: Sequence[ExpPoly], rhs: Callable, y: Sequence,
                   t_range: tuple = (0.0, 1.0), steps: int = 1000) -> float:
    """Max componentwise gap between the closed form and RK4 on the grid."""
    t_start, t_end = float(t_range[0]), float(t_range[1])
    states = rk4(rhs, [float(v) for v in y], t_start, t_end, steps)
    h = (t_end - t_start) / steps
    err = 0.0
    for s, state in enumerate(states):
        exact = vec_evaluate_float(solution, t_start + s * h)
        err = max(err, max((abs(a - b) for a, b in zip(exact, state)), default=0.0))
    return err


# -- Chen reduction -------------------------------------------------------------------

def _rational_eigenvalues(a: QMatrix) -> list[tuple]:
    """``(lam, multiplicity)`` pairs; raises UnsupportedInput for irrational eigenvalues."""
    n = a.rows
    lower_zero = all(a[i, j] == 0 for i in range(n) for j in range(i))
    upper_zero = all(a[i, j] == 0 for i in range(n) for j in range(i + 1, n))
    if lower_zero or upper_zero:
        # triangular: the spectrum is the diagonal, no factoring needed
        counts: dict = {}
        for i in range(n):
            counts[a[i, i]] = counts.get(a[i, i], 0) + 1
        return sorted(counts.items())
    import sympy

    coeffs = charpoly(a)
    t = sympy.Symbol("t")
    poly = sympy.Poly([sympy.Rational(int(c.numerator), int(c.denominator)) for c in reversed(coeffs)],
                      t, domain="QQ")
    _, factors = poly.factor_list()
    out = []
    for fac, mult in factors:
        if fac.degree() == 1:
            c1, c0 = fac.all_coeffs()
            root = -c0 / c1
            out.append((Rational(int(root.p), int(root.q)), mult))
        else:
            raise UnsupportedInput(
                f"eigenvalue with minimal polynomial of degree {fac.degree()} "
                f"({fac.as_expr()}) is not rational")
    return sorted(out)


def _power(a: QMatrix, k: int) -> QMatrix:
    out = QMatrix.identity(a.rows)
    for _ in range(k):
        out = out @ a
    return out


def exp_action(a: QMatrix, v: Sequence) -> list[tuple]:
    """Terms ``(lam, j, w)`` with ``e^{tA} v = sum e^{lam t} t^j / j! * w``."""
    n = a.rows
    v = [as_rational(x) for x in v]
    if n == 0 or not any(v):
        return []
    eig = _rational_eigenvalues(a)
    blocks = []
    columns = []
    for lam, mult in eig:
        shifted = a - QMatrix.identity(n).scale(lam)
        basis = kernel_basis(_power(shifted, mult))
        blocks.append((lam, mult, shifted, len(basis)))
        columns.extend(basis)
    p = QMatrix.from_rows([[col[i] for col in columns] for i in range(n)])
    coords = solve(p, v)
    if coords is None:
        raise InternalInconsistency("generalized eigenspaces do not span")
    out = []
    pos = 0
    for lam, mult, shifted, size in blocks:
        part = [ZERO] * n
        for col, c in zip(columns[pos:pos + size], coords[pos:pos + size]):
            if c:
                part = [x + c * y for x, y in zip(part, col)]
        pos += size
        w = tuple(part)
        for j in range(mult):
            if not any(w):
                break
            out.append((lam, j, w))
            w = shifted @ w
    return out


def exp_matrix(b: QMatrix) -> tuple:
    """``e^{tB}`` as an n x n tuple of ExpPoly rows."""
    n = b.rows
    cols = []
    for i in range(n):
        unit = [ONE if r == i else ZERO for r in range(n)]
        col = [dict() for _ in range(n)]
        for lam, j, w in exp_action(b, unit):
            scale = ONE / math.factorial(j)
            for r in range(n):
                if w[r]:
                    col[r][(lam, j)] = col[r].get((lam, j), ZERO) + scale * w[r]
        cols.append([ExpPoly(c) for c in col])
    return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))


def _linear_part(q: VectorField) -> QMatrix:
    n = q.n
    rows = []
    for comp in q.components:
        row = []
        for j in range(n):
            e = [0] * n
            e[j] = 1
            row.append(comp.coeff(tuple(e)))
        rows.append(row)
    return QMatrix.from_rows(rows) if n else QMatrix.zeros(0)


@dataclass(frozen=True)
class ChenReduction:
    """``x = e^{tB} z`` turns ``x' = Bx + q~(x)`` into the reduced system for z."""

    linear: QMatrix
    family: ClosedFamily
    system: EDESystem
    transport: tuple
    spectra: dict = field(default_factory=dict)

    def solve(self, y: Sequence) -> tuple:
        """Closed form of x(t) with x(0) = y."""
        n = self.linear.rows
        if self.system.seeds:
            z = solve_elementary(self.family, self.system, y, 0)
        else:
            z = tuple(ExpPoly.constant(v) for v in y)
        out = []
        for i in range(n):
            acc = ExpPoly()
            for j in range(n):
                if self.transport[i][j] and z[j]:
                    acc = acc + self.transport[i][j] * z[j]
            out.append(acc)
        return tuple(out)

    def reduced_rhs(self) -> Callable:
        return system_rhs(self.family, self.system)


def chen_reduce(m: LieAlgebra, q: VectorField, max_degree: int, cap: int = 200) -> ChenReduction:
    """Split q = Bx + q~ and expand ``exp(t ad B) q~`` over rational eigenvalues.

    Here ``ad B (f) = [Bx, f]``. Each degree slice of q~ is handled on its
    cyclic subspace under ad B; every term ``e^{lam t} t^j/j! (ad B - lam)^j P_lam q~``
    becomes one seed of the reduced system.
    """
    n = q.n
    if n != m.n:
        raise ValidationError(f"field has dimension {n}, algebra acts on {m.n}")
    if any(not c.homogeneous_part(0).is_zero() for c in q.components):
        raise ValidationError("the field must vanish at the origin")
    if not is_equivariant(q, m.basis):
        raise ValidationError("the field does not commute with the algebra")
    deg = q.degree or 0
    if deg > max_degree:
        raise ValidationError(f"field degree {deg} exceeds the bound {max_degree}")
    b = _linear_part(q)
    bx = VectorField.linear(b)
    transport = exp_matrix(b)
    seeds: list[VectorField] = []
    coefs: list[Coefficient] = []
    spectra = {}
    for k in range(2, deg + 1):
        g = q.homogeneous_part(k)
        if g.is_zero():
            continue
        # cyclic subspace of g under ad B
        span = Span()
        krylov = []
        cur = g
        while span.add(cur.coefficient_vector(k)):
            krylov.append(cur)
            cur = lie_bracket(bx, cur)
        r = len(krylov)
        cols = []
        for f in krylov:
            coords = span.coordinates(lie_bracket(bx, f).coefficient_vector(k))
            cols.append(coords)
        a = QMatrix.from_rows([[cols[j][i] for j in range(r)] for i in range(r)])
        start = [ONE] + [ZERO] * (r - 1)
        terms = exp_action(a, start)
        spectra[k] = sorted({lam for lam, _, _ in terms})
        for lam, j, w in terms:
            f = VectorField.zero(n)
            for c, basis_field in zip(w, krylov):
                if c:
                    f = f + basis_field.scale(c)
            seeds.append(f)
            sigma = tuple([ZERO] * j + [ONE / math.factorial(j)])
            coefs.append(Coefficient(sigma, lam))
    family = close_family(m, seeds, cap=cap, max_degree=max_degree)
    system = EDESystem(tuple(family.seeds), tuple(coefs))
    return ChenReduction(b, family, system, transport, spectra)
