"""Exact rational scalars and linear algebra.

Scalars are :class:`gmpy2.mpq` values (falling back to :class:`fractions.Fraction`).
Elimination works on sparse rows (``dict`` column -> value) so the large but
very sparse operator matrices built by the equivariance code stay cheap; the
dense :class:`QMatrix` is a thin immutable wrapper for small matrices.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

try:
    from gmpy2 import mpq as Rational
except ImportError:  # pragma: no cover
    from fractions import Fraction as Rational

from .errors import ParseError

__all__ = [
    "Rational",
    "QMatrix",
    "parse_rational",
    "format_rational",
    "rref",
    "kernel_basis",
    "solve",
    "sparse_rref",
    "sparse_kernel",
    "sparse_kernel_vectors",
    "SparseOperator",
    "joint_kernel",
    "charpoly",
    "Span",
]

ZERO = Rational(0)
ONE = Rational(1)

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(text) -> Rational:
    """Parse ``"p/q"``, ``"p"`` or a Python int. Floats are rejected."""
    if isinstance(text, bool):
        raise ParseError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Rational(text)
    if not isinstance(text, str):
        if type(text) is type(ONE):
            return text
        raise ParseError(f"rationals must be strings like '3/2', got {text!r}")
    m = _RATIONAL_RE.match(text)
    if not m:
        raise ParseError(f"not an exact rational: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ParseError(f"zero denominator in {text!r}")
    return Rational(num, den)


def format_rational(q) -> str:
    q = Rational(q)
    if q.denominator == 1:
        return str(int(q.numerator))
    return f"{int(q.numerator)}/{int(q.denominator)}"


def as_rational(x) -> Rational:
    if isinstance(x, float):
        raise ParseError(f"floating-point value {x!r} where an exact rational is required")
    if isinstance(x, str):
        return parse_rational(x)
    return Rational(x)


@dataclass(frozen=True)
class QMatrix:
    """Dense rows x cols matrix of rationals, row-major, immutable."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"QMatrix {self.rows}x{self.cols} needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "QMatrix":
        rows = [list(r) for r in rows]
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        if any(len(r) != nc for r in rows):
            raise ParseError("ragged matrix rows")
        return cls(nr, nc, tuple(as_rational(x) for r in rows for x in r))

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "QMatrix":
        cols = rows if cols is None else cols
        return cls(rows, cols, (ZERO,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(n, n, tuple(ONE if i == j else ZERO for i in range(n) for j in range(n)))

    @classmethod
    def diag(cls, values: Sequence) -> "QMatrix":
        n = len(values)
        vals = [as_rational(v) for v in values]
        return cls(n, n, tuple(vals[i] if i == j else ZERO for i in range(n) for j in range(n)))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> tuple:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list[list]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def transpose(self) -> "QMatrix":
        return QMatrix(self.cols, self.rows,
                       tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def __add__(self, other: "QMatrix") -> "QMatrix":
        self._same_shape(other)
        return QMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        self._same_shape(other)
        return QMatrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "QMatrix":
        return QMatrix(self.rows, self.cols, tuple(-a for a in self.entries))

    def scale(self, c) -> "QMatrix":
        c = as_rational(c)
        return QMatrix(self.rows, self.cols, tuple(c * a for a in self.entries))

    def __matmul__(self, other):
        if isinstance(other, QMatrix):
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
            out = []
            for i in range(self.rows):
                r = self.row(i)
                for j in range(other.cols):
                    s = ZERO
                    for k in range(self.cols):
                        a = r[k]
                        if a:
                            s += a * other.entries[k * other.cols + j]
                    out.append(s)
            return QMatrix(self.rows, other.cols, tuple(out))
        vec = list(other)
        if len(vec) != self.cols:
            raise ValueError("vector length does not match matrix columns")
        return tuple(sum((self.row(i)[k] * vec[k] for k in range(self.cols)), ZERO)
                     for i in range(self.rows))

    def commutator(self, other: "QMatrix") -> "QMatrix":
        """Matrix commutator ``self @ other - other @ self``."""
        return self @ other - other @ self

    def is_zero(self) -> bool:
        return not any(self.entries)

    def is_diagonal(self) -> bool:
        return all(self[i, j] == 0 for i in range(self.rows) for j in range(self.cols) if i != j)

    def is_upper_triangular(self) -> bool:
        return all(self[i, j] == 0 for i in range(self.rows) for j in range(min(i, self.cols)))

    def diagonal(self) -> tuple:
        return tuple(self[i, i] for i in range(min(self.rows, self.cols)))

    def _same_shape(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("matrix shape mismatch")

    def __repr__(self):
        body = "; ".join(" ".join(format_rational(x) for x in self.row(i)) for i in range(self.rows))
        return f"QMatrix([{body}])"


# --- sparse elimination -------------------------------------------------------

def _echelon(rows: Iterable[dict]) -> dict:
    """Forward elimination. Returns pivot column -> row (leading entry 1).

    Input rows must not store explicit zeros.
    """
    pivots: dict = {}
    for src in rows:
        r = dict(src)
        while r:
            c = min(r)
            p = pivots.get(c)
            if p is None:
                inv = ONE / r[c]
                pivots[c] = {j: v * inv for j, v in r.items()}
                break
            f = r[c]
            for j, v in p.items():
                nv = r.get(j, ZERO) - f * v
                if nv:
                    r[j] = nv
                else:
                    r.pop(j, None)
    return pivots


def _back_substitute(pivots: dict) -> dict:
    # rows only ever lose entries in pivot columns here, so the index stays valid
    holders: dict = {}
    for pc, r in pivots.items():
        for j in r:
            if j != pc and j in pivots:
                holders.setdefault(j, []).append(pc)
    for c in sorted(pivots, reverse=True):
        prow = pivots[c]
        for c2 in holders.get(c, ()):
            r = pivots[c2]
            f = r.get(c)
            if f:
                for j, v in prow.items():
                    nv = r.get(j, ZERO) - f * v
                    if nv:
                        r[j] = nv
                    else:
                        r.pop(j, None)
    return pivots


def sparse_rref(rows: Iterable[dict]) -> tuple[list[int], list[dict]]:
    """Reduced row echelon form of sparse rows; returns (pivot columns, rows)."""
    piv = _back_substitute(_echelon(rows))
    order = sorted(piv)
    return order, [piv[c] for c in order]


def sparse_kernel_vectors(rows: Iterable[dict], ncols: int) -> list[dict]:
    """Null space basis as sparse vectors, one per free column in increasing order.

    Each vector is scaled so its first nonzero entry is 1.
    """
    pivot_cols, reduced = sparse_rref(rows)
    pivot_set = set(pivot_cols)
    by_col: dict = {}
    for pc, r in zip(pivot_cols, reduced):
        for j, v in r.items():
            if j != pc:
                by_col.setdefault(j, []).append((pc, v))
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        vec = {f: ONE}
        lead_col = f
        for pc, v in by_col.get(f, ()):
            vec[pc] = -v
            if pc < lead_col:
                lead_col = pc
        lead = vec[lead_col]
        if lead != 1:
            inv = ONE / lead
            vec = {j: x * inv for j, x in vec.items()}
        basis.append(vec)
    return basis


def sparse_kernel(rows: Iterable[dict], ncols: int) -> list[list]:
    """Null space basis of the sparse system as dense vectors (see sparse_kernel_vectors)."""
    out = []
    for v in sparse_kernel_vectors(rows, ncols):
        vec = [ZERO] * ncols
        for j, x in v.items():
            vec[j] = x
        out.append(vec)
    return out


class SparseOperator:
    """Linear map on Q^size given column by column.

    Subclasses implement ``column(j) -> dict`` and set ``key`` to a hashable
    value identifying the map, which lets :func:`joint_kernel` memoize kernels.
    """

    key: tuple = ()

    def column(self, j: int) -> dict:
        raise NotImplementedError

    def rows(self, size: int) -> list[dict]:
        block: dict = {}
        for col in range(size):
            for t, v in self.column(col).items():
                if v:
                    block.setdefault(t, {})[col] = v
        return [block[t] for t in sorted(block)]

    def apply(self, vec: dict) -> dict:
        out: dict = {}
        for col, c in vec.items():
            for t, v in self.column(col).items():
                nv = out.get(t, ZERO) + c * v
                if nv:
                    out[t] = nv
                else:
                    out.pop(t, None)
        return out

    def __hash__(self):
        return hash((type(self).__name__, self.key))

    def __eq__(self, other):
        return type(self) is type(other) and self.key == other.key


@lru_cache(maxsize=4096)
def _operator_kernel(op: SparseOperator, size: int) -> tuple:
    return tuple(sparse_kernel_vectors(op.rows(size), size))


def joint_kernel(operators: Sequence[SparseOperator], size: int) -> list[dict]:
    """Common kernel of several operators, as a reduced echelon basis of sparse vectors.

    The first operator's kernel is computed outright (and memoized by key);
    every further operator is restricted to the kernel found so far.
    """
    if not operators:
        return [{j: ONE} for j in range(size)]
    basis = [dict(v) for v in _operator_kernel(operators[0], size)]
    for op in operators[1:]:
        if not basis:
            return []
        rows: dict = {}
        for j, v in enumerate(basis):
            for t, x in op.apply(v).items():
                rows.setdefault(t, {})[j] = x
        combos = sparse_kernel_vectors(list(rows.values()), len(basis))
        new = []
        for c in combos:
            vec: dict = {}
            for j, cj in c.items():
                for i, x in basis[j].items():
                    nv = vec.get(i, ZERO) + cj * x
                    if nv:
                        vec[i] = nv
                    else:
                        vec.pop(i, None)
            new.append(vec)
        basis = new
    _, reduced = sparse_rref(basis)
    return reduced


def _matrix_rows(m: QMatrix) -> list[dict]:  # zeros dropped, as _echelon expects
    return [{j: v for j, v in enumerate(m.row(i)) if v} for i in range(m.rows)]


def rref(m: QMatrix) -> tuple[int, list[int], QMatrix]:
    """Return ``(rank, pivot columns, reduced matrix)``."""
    pivot_cols, reduced = sparse_rref(_matrix_rows(m))
    entries = []
    for r in reduced:
        entries.extend(r.get(j, ZERO) for j in range(m.cols))
    entries.extend([ZERO] * (m.cols * (m.rows - len(reduced))))
    return len(pivot_cols), pivot_cols, QMatrix(m.rows, m.cols, tuple(entries))


def kernel_basis(m: QMatrix) -> list[tuple]:
    return [tuple(v) for v in sparse_kernel(_matrix_rows(m), m.cols)]


def rank(m: QMatrix) -> int:
    return len(_echelon(_matrix_rows(m)))


def solve(m: QMatrix, b: Sequence):
    """One exact solution of ``m x = b`` (free variables set to 0), or None."""
    b = [as_rational(x) for x in b]
    if len(b) != m.rows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {m.rows}")
    return solve_sparse(_matrix_rows(m), b, m.cols)


def solve_sparse(rows: list[dict], b: Sequence, ncols: int):
    aug = []
    for r, bi in zip(rows, b):
        row = dict(r)
        if bi:
            row[ncols] = as_rational(bi)
        aug.append(row)
    pivot_cols, reduced = sparse_rref(aug)
    if pivot_cols and pivot_cols[-1] == ncols:
        return None
    x = [ZERO] * ncols
    for pc, r in zip(pivot_cols, reduced):
        x[pc] = r.get(ncols, ZERO)
    return tuple(x)


class Span:
    """Incrementally grown subspace of Q^N with membership and coordinate queries.

    Vectors are sparse dicts. ``add`` returns False when the vector is already in
    the span. ``coordinates`` expresses a vector in terms of the added vectors.
    """

    def __init__(self):
        self._pivots: dict = {}   # pivot col -> (reduced row, combination over inserted vectors)
        self.vectors: list[dict] = []

    def __len__(self):
        return len(self.vectors)

    def _reduce(self, vec: dict):
        r = {c: v for c, v in vec.items() if v}
        combo: dict = {}
        while r:
            c = min(r)
            p = self._pivots.get(c)
            if p is None:
                return r, combo
            prow, pcombo = p
            f = r[c]
            for j, v in prow.items():
                nv = r.get(j, ZERO) - f * v
                if nv:
                    r[j] = nv
                else:
                    r.pop(j, None)
            for j, v in pcombo.items():
                nv = combo.get(j, ZERO) + f * v
                if nv:
                    combo[j] = nv
                else:
                    combo.pop(j, None)
        return r, combo

    def contains(self, vec: dict) -> bool:
        return not self._reduce(vec)[0]

    def add(self, vec: dict) -> bool:
        r, combo = self._reduce(vec)
        if not r:
            return False
        idx = len(self.vectors)
        self.vectors.append(dict(vec))
        # r = vec - sum(combo_j * v_j), normalized so the leading entry is 1
        c = min(r)
        inv = ONE / r[c]
        full = {j: -v for j, v in combo.items()}
        full[idx] = ONE
        self._pivots[c] = ({j: v * inv for j, v in r.items()}, {j: v * inv for j, v in full.items()})
        return True

    def coordinates(self, vec: dict):
        """Coefficients c with vec = sum c_j vectors[j], or None if not in the span."""
        r, combo = self._reduce(vec)
        if r:
            return None
        return [combo.get(j, ZERO) for j in range(len(self.vectors))]


def charpoly(m: QMatrix) -> list:
    """Coefficients c_0..c_n of det(tI - m), lowest degree first (Faddeev-LeVerrier)."""
    if not m.is_square:
        raise ValueError("characteristic polynomial needs a square matrix")
    n = m.rows
    coeffs = [ZERO] * (n + 1)
    coeffs[n] = ONE
    ident = QMatrix.identity(n)
    mk = QMatrix.zeros(n)
    for k in range(1, n + 1):
        mk = m @ (mk + ident.scale(coeffs[n - k + 1]))
        coeffs[n - k] = -sum(mk.diagonal(), ZERO) / k
    return coeffs
