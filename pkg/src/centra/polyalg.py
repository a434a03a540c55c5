"""Sparse multivariate polynomials and polynomial vector fields over Q.

A monomial is a tuple of ``n`` nonnegative exponents. A :class:`Poly` is a
mapping monomial -> nonzero rational; a :class:`VectorField` is an n-tuple of
polys. The bracket follows the convention ``[f, g] = Dg.f - Df.g``, so for
linear fields ``[Bx, Cx] = (CB - BC)x``.

Display order is graded lexicographic, highest first: ``x1^2 > x1*x2 > x2^2 > x1``.
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import ParseError
from .exactla import ONE, ZERO, QMatrix, Rational, as_rational, format_rational

Monomial = tuple


@lru_cache(maxsize=None)
def monomials(n: int, k: int) -> tuple:
    """All exponent vectors of length n and total degree k, lex-descending."""
    if n == 0:
        return ((),) if k == 0 else ()
    if n == 1:
        return ((k,),)
    out = []
    for first in range(k, -1, -1):
        for rest in monomials(n - 1, k - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(n: int, k: int) -> dict:
    return {m: i for i, m in enumerate(monomials(n, k))}


def grlex_key(m: Monomial):
    """Sort key; ``sorted(..., key=grlex_key, reverse=True)`` gives display order."""
    return (sum(m), m)


def _add_exp(a, b):
    return tuple(x + y for x, y in zip(a, b))


class Poly:
    """Immutable sparse polynomial in ``n`` variables with rational coefficients."""

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Mapping | None = None):
        self.n = n
        clean = {}
        if terms:
            for m, c in terms.items():
                if len(m) != n:
                    raise ValueError(f"monomial {m} has wrong length for n={n}")
                if c:
                    clean[tuple(m)] = c if type(c) is type(ONE) else as_rational(c)
        self.terms = clean
        self._hash = None

    # -- constructors --------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "Poly":
        return cls(n)

    @classmethod
    def constant(cls, n: int, c) -> "Poly":
        return cls(n, {(0,) * n: c})

    @classmethod
    def var(cls, n: int, i: int) -> "Poly":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): ONE})

    @classmethod
    def monomial(cls, exps: Sequence[int], c=1) -> "Poly":
        return cls(len(exps), {tuple(exps): c})

    @classmethod
    def _raw(cls, n, terms):
        p = cls.__new__(cls)
        p.n = n
        p.terms = terms
        p._hash = None
        return p

    # -- queries -------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    @property
    def degree(self):
        """Total degree, or None for the zero polynomial."""
        if not self.terms:
            return None
        return max(sum(m) for m in self.terms)

    @property
    def min_degree(self):
        if not self.terms:
            return None
        return min(sum(m) for m in self.terms)

    def is_homogeneous(self, m: int | None = None) -> bool:
        degs = {sum(e) for e in self.terms}
        if m is None:
            return len(degs) <= 1
        return degs <= {m}

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def coeff(self, m: Monomial):
        return self.terms.get(tuple(m), ZERO)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def homogeneous_part(self, k: int) -> "Poly":
        return Poly._raw(self.n, {m: c for m, c in self.terms.items() if sum(m) == k})

    def truncate(self, max_degree: int) -> "Poly":
        return Poly._raw(self.n, {m: c for m, c in self.terms.items() if sum(m) <= max_degree})

    # -- arithmetic ----------------------------------------------------------
    def _check(self, other: "Poly"):
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(self.n, other)
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, ZERO) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Poly._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = as_rational(c)
        if not c:
            return Poly._raw(self.n, {})
        return Poly._raw(self.n, {m: c * v for m, v in self.terms.items()})

    def mul(self, other: "Poly", max_degree: int | None = None) -> "Poly":
        self._check(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            d1 = sum(m1)
            for m2, c2 in other.terms.items():
                if max_degree is not None and d1 + sum(m2) > max_degree:
                    continue
                m = _add_exp(m1, m2)
                v = out.get(m, ZERO) + c1 * c2
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return Poly._raw(self.n, out)

    def __mul__(self, other):
        if isinstance(other, Poly):
            return self.mul(other)
        if isinstance(other, VectorField):
            return NotImplemented
        return self.scale(other)

    def __rmul__(self, other):
        if isinstance(other, Poly):
            return other.mul(self)
        return self.scale(other)

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a nonnegative int")
        result = Poly.constant(self.n, 1)
        base = self
        while e:
            if e & 1:
                result = result.mul(base)
            e >>= 1
            if e:
                base = base.mul(base)
        return result

    def diff(self, i: int) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                mm = m[:i] + (e - 1,) + m[i + 1:]
                out[mm] = c * e
        return Poly._raw(self.n, out)

    def compose(self, subs: Sequence["Poly"], max_degree: int | None = None) -> "Poly":
        """Substitute ``x_i -> subs[i]``; drop terms above ``max_degree`` if given."""
        if len(subs) != self.n:
            raise ValueError("need one substitution per variable")
        m_out = subs[0].n if subs else 0
        cache: dict = {}

        def power(i, e):
            key = (i, e)
            if key not in cache:
                cache[key] = Poly.constant(m_out, 1) if e == 0 else power(i, e - 1).mul(subs[i], max_degree)
            return cache[key]

        total = Poly.zero(m_out)
        for m, c in self.terms.items():
            t = Poly.constant(m_out, c)
            for i, e in enumerate(m):
                if e:
                    t = t.mul(power(i, e), max_degree)
            total = total + t
        return total

    def evaluate(self, point: Sequence):
        """Exact value at a rational point."""
        pt = [as_rational(x) for x in point]
        s = ZERO
        for m, c in self.terms.items():
            t = c
            for x, e in zip(pt, m):
                if e:
                    t *= x ** e
            s += t
        return s

    def evaluate_float(self, point: Sequence[float]) -> float:
        s = 0.0
        for m, c in self.terms.items():
            t = float(c)
            for x, e in zip(point, m):
                if e:
                    t *= x ** e
            s += t
        return s

    def to_float_terms(self):
        return [(m, float(c)) for m, c in self.terms.items()]

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.n == other.n and self.terms == other.terms
        if not self.terms:
            return other == 0
        if self.is_constant():
            return self.terms.get((0,) * self.n, ZERO) == other
        return False

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({self.n}, {format_poly(self)!r})"


def _format_monomial(m: Monomial) -> str:
    parts = []
    for i, e in enumerate(m):
        if e == 1:
            parts.append(f"x{i + 1}")
        elif e > 1:
            parts.append(f"x{i + 1}^{e}")
    return "*".join(parts)


def format_poly(p: Poly) -> str:
    if not p.terms:
        return "0"
    out = []
    for m, c in p.sorted_terms():
        mono = _format_monomial(m)
        neg = c < 0
        a = -c if neg else c
        if not mono:
            body = format_rational(a)
        elif a == 1:
            body = mono
        else:
            body = f"{format_rational(a)}*{mono}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|x(\d+)(?:\^(\d+))?|([+\-*]))")


def parse_poly(text: str, n: int) -> Poly:
    """Parse the report text form, e.g. ``"3/2*x1^2*x3 - x2 + 1"``."""
    if not isinstance(text, str):
        raise ParseError(f"polynomial must be a string, got {text!r}")
    pos = 0
    s = text.strip()
    if not s:
        raise ParseError("empty polynomial")
    terms: dict = {}
    sign = 1
    coeff = ONE
    exps = [0] * n
    have_factor = False
    expect_factor = True

    def flush():
        nonlocal coeff, exps, sign, have_factor
        if not have_factor:
            raise ParseError(f"dangling operator in {text!r}")
        m = tuple(exps)
        v = terms.get(m, ZERO) + sign * coeff
        terms[m] = v
        coeff, exps, sign, have_factor = ONE, [0] * n, 1, False

    while pos < len(s):
        tok = _TOKEN.match(s, pos)
        if not tok or tok.end() == pos:
            raise ParseError(f"cannot parse polynomial {text!r} near {s[pos:]!r}")
        pos = tok.end()
        num, var, power, op = tok.groups()
        if op in ("+", "-"):
            if have_factor:
                flush()
            if op == "-":
                sign = -sign
            expect_factor = True
            continue
        if op == "*":
            if not have_factor:
                raise ParseError(f"misplaced '*' in {text!r}")
            expect_factor = True
            continue
        if not expect_factor:
            raise ParseError(f"missing operator in {text!r}")
        if num is not None:
            coeff = coeff * as_rational(num)
        else:
            i = int(var) - 1
            if not 0 <= i < n:
                raise ParseError(f"variable x{var} out of range for n={n}")
            exps[i] += int(power) if power else 1
        have_factor = True
        expect_factor = False
    flush()
    return Poly(n, terms)


class VectorField:
    """Immutable n-tuple of polynomials, the field ``x -> (f_1(x), ..., f_n(x))``."""

    __slots__ = ("components", "n")

    def __init__(self, components: Iterable[Poly]):
        comps = tuple(components)
        n = len(comps)
        for c in comps:
            if c.n != n:
                raise ValueError(f"component in {c.n} variables inside an {n}-dimensional field")
        self.components = comps
        self.n = n

    @classmethod
    def zero(cls, n: int) -> "VectorField":
        return cls(Poly.zero(n) for _ in range(n))

    @classmethod
    def linear(cls, b: QMatrix) -> "VectorField":
        """The field x -> Bx."""
        n = b.rows
        comps = []
        for i in range(n):
            terms = {}
            for j in range(n):
                v = b[i, j]
                if v:
                    e = [0] * n
                    e[j] = 1
                    terms[tuple(e)] = v
            comps.append(Poly(n, terms))
        return cls(comps)

    @classmethod
    def identity(cls, n: int) -> "VectorField":
        """The Euler field E(x) = x."""
        return cls(Poly.var(n, i) for i in range(n))

    @classmethod
    def monomial(cls, exps: Sequence[int], ell: int, c=1) -> "VectorField":
        """The field c * x^exps * e_ell."""
        n = len(exps)
        return cls(Poly.monomial(exps, c) if i == ell else Poly.zero(n) for i in range(n))

    @classmethod
    def constant(cls, values: Sequence) -> "VectorField":
        n = len(values)
        return cls(Poly.constant(n, v) for v in values)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return self.n

    def is_zero(self) -> bool:
        return not any(c.terms for c in self.components)

    def __bool__(self):
        return not self.is_zero()

    @property
    def degree(self):
        degs = [c.degree for c in self.components if c.terms]
        return max(degs) if degs else None

    def is_homogeneous(self, m: int | None = None) -> bool:
        degs = set()
        for c in self.components:
            degs.update(sum(e) for e in c.terms)
        if m is None:
            return len(degs) <= 1
        return degs <= {m}

    def homogeneous_part(self, k: int) -> "VectorField":
        return VectorField(c.homogeneous_part(k) for c in self.components)

    def truncate(self, max_degree: int) -> "VectorField":
        return VectorField(c.truncate(max_degree) for c in self.components)

    def _check(self, other):
        if not isinstance(other, VectorField) or other.n != self.n:
            raise ValueError("vector field dimension mismatch")

    def __add__(self, other):
        self._check(other)
        return VectorField(a + b for a, b in zip(self.components, other.components))

    def __sub__(self, other):
        self._check(other)
        return VectorField(a - b for a, b in zip(self.components, other.components))

    def __neg__(self):
        return VectorField(-a for a in self.components)

    def scale(self, c) -> "VectorField":
        return VectorField(a.scale(c) for a in self.components)

    def __mul__(self, other):
        if isinstance(other, Poly):
            return VectorField(other.mul(a) for a in self.components)
        return self.scale(other)

    __rmul__ = __mul__

    def apply_matrix(self, b: QMatrix) -> "VectorField":
        """The field x -> B f(x)."""
        if b.cols != self.n:
            raise ValueError("matrix/field dimension mismatch")
        out = []
        for i in range(b.rows):
            acc = Poly.zero(self.n)
            for j in range(self.n):
                v = b[i, j]
                if v:
                    acc = acc + self.components[j].scale(v)
            out.append(acc)
        return VectorField(out)

    def compose(self, subs: Sequence[Poly], max_degree: int | None = None) -> "VectorField":
        return VectorField(c.compose(subs, max_degree) for c in self.components)

    def evaluate(self, point):
        return tuple(c.evaluate(point) for c in self.components)

    def evaluate_float(self, point):
        return [c.evaluate_float(point) for c in self.components]

    def coefficient_vector(self, k: int) -> dict:
        """Sparse coordinates in the degree-k monomial-field basis (index = mono*n + ell)."""
        idx = monomial_index(self.n, k)
        out = {}
        for ell, comp in enumerate(self.components):
            for m, c in comp.terms.items():
                if sum(m) != k:
                    raise ValueError(f"field is not homogeneous of degree {k}")
                out[idx[m] * self.n + ell] = c
        return out

    @classmethod
    def from_coefficients(cls, n: int, k: int, vec) -> "VectorField":
        mons = monomials(n, k)
        comps = [dict() for _ in range(n)]
        items = vec.items() if isinstance(vec, dict) else enumerate(vec)
        for j, c in items:
            if c:
                comps[j % n][mons[j // n]] = c
        return cls(Poly(n, t) for t in comps)

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def to_strings(self) -> list[str]:
        return [format_poly(c) for c in self.components]

    def __str__(self):
        return "(" + ", ".join(self.to_strings()) + ")"

    def __repr__(self):
        return f"VectorField({self.to_strings()!r})"


def parse_field(texts: Sequence[str], n: int | None = None) -> VectorField:
    n = len(texts) if n is None else n
    if len(texts) != n:
        raise ParseError(f"field has {len(texts)} components, expected {n}")
    return VectorField(parse_poly(t, n) for t in texts)


# -- differential operations ----------------------------------------------------

def jacobian(f: VectorField) -> list[list[Poly]]:
    """Entry (i, j) is d f_i / d x_j."""
    return [[c.diff(j) for j in range(f.n)] for c in f.components]


def _jac_times(jac, q: VectorField) -> VectorField:
    n = q.n
    out = []
    for row in jac:
        acc = Poly.zero(n)
        for dij, qj in zip(row, q.components):
            if dij.terms and qj.terms:
                acc = acc + dij.mul(qj)
        out.append(acc)
    return VectorField(out)


def directional(p: VectorField, q: VectorField) -> VectorField:
    """The field x -> Dp(x) q(x)."""
    if p.n != q.n:
        raise ValueError("dimension mismatch")
    return _jac_times(jacobian(p), q)


def lie_bracket(f: VectorField, g: VectorField) -> VectorField:
    """``[f, g] = Dg.f - Df.g``."""
    if f.n != g.n:
        raise ValueError("dimension mismatch")
    return directional(g, f) - directional(f, g)


def lie_derivative(b: QMatrix, phi: Poly) -> Poly:
    """Derivative of phi along the linear field Bx: sum_i (Bx)_i d phi / d x_i."""
    if b.rows != phi.n or b.cols != phi.n:
        raise ValueError(f"matrix is {b.rows}x{b.cols} but polynomial has {phi.n} variables")
    bx = VectorField.linear(b)
    acc = Poly.zero(phi.n)
    for i in range(phi.n):
        if bx[i].terms:
            d = phi.diff(i)
            if d.terms:
                acc = acc + bx[i].mul(d)
    return acc


def homogeneous_components(f: VectorField) -> dict[int, VectorField]:
    degs = set()
    for c in f.components:
        degs.update(sum(m) for m in c.terms)
    return {k: f.homogeneous_part(k) for k in sorted(degs)}


def is_equivariant(f: VectorField, matrices: Iterable[QMatrix]) -> bool:
    """True when [Bx, f] = 0 for every given matrix."""
    return all(lie_bracket(VectorField.linear(b), f).is_zero() for b in matrices)
