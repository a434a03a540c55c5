import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centra.errors import CapExceeded, UnsupportedInput
from centra.exactla import QMatrix, Rational
from centra.liealg import (
    bracket_closure,
    derived_series,
    diagonal_profile,
    is_perfect,
    is_solvable,
    jacobi_defect,
    require_triangular,
    triangular_profile,
)

E12 = QMatrix.from_rows([[0, 1], [0, 0]])
E21 = QMatrix.from_rows([[0, 0], [1, 0]])
ROT = QMatrix.from_rows([[0, -1], [1, 0]])


def sl2():
    return bracket_closure([E12, E21])


def test_single_matrix_abelian():
    m = bracket_closure([QMatrix.diag([1, 2])])
    assert m.dim == 1 and m.is_abelian()


def test_sl2_closure():
    m = sl2()
    assert m.dim == 3
    assert m.basis[2] == QMatrix.diag([1, -1])


def test_zero_generators():
    m = bracket_closure([QMatrix.zeros(2)])
    assert m.dim == 0
    assert is_perfect(m)
    assert bracket_closure([], n=3).dim == 0


def test_dependent_generators_first_seen():
    a, b = QMatrix.diag([1, 0]), QMatrix.diag([0, 1])
    m = bracket_closure([a, a.scale(2), b, a + b])
    assert m.basis == (a, b)


def test_cap_exceeded_carries_partial():
    with pytest.raises(CapExceeded) as info:
        bracket_closure([E12, E21], cap=2)
    assert len(info.value.partial) == 3


def test_shape_mismatch():
    with pytest.raises(ValueError):
        bracket_closure([QMatrix.identity(2), QMatrix.identity(3)])


def test_solvable_examples():
    assert is_solvable(bracket_closure([QMatrix.diag([1, 2])]))[0]
    upper = bracket_closure([QMatrix.diag([1, 0]), QMatrix.diag([0, 1]), E12])
    assert is_solvable(upper) == (True, [3, 1, 0])
    ok, series = is_solvable(sl2())
    assert not ok and series == [3]


def test_perfect_examples():
    assert not is_perfect(bracket_closure([ROT]))
    assert is_perfect(sl2())


def test_profiles():
    prof = diagonal_profile(bracket_closure([QMatrix.diag([1, -1])]))
    assert prof.forms == ((1,), (-1,))
    assert diagonal_profile(bracket_closure([ROT])) is None
    m = bracket_closure([QMatrix.diag([-1, 2, 3]), QMatrix.diag([-1, -1, 0])])
    assert diagonal_profile(m).forms == ((-1, -1), (2, -1), (3, 0))


def test_triangular_profile_and_requirement():
    upper = bracket_closure([QMatrix.from_rows([[1, 1], [0, 2]])])
    prof = triangular_profile(upper)
    assert prof.triangular and prof.forms == ((1,), (2,))
    with pytest.raises(UnsupportedInput, match="triangular"):
        require_triangular(bracket_closure([ROT]))


def test_coordinates():
    m = sl2()
    assert m.coordinates(m.element([1, 2, 3])) == [1, 2, 3]
    assert m.coordinates(QMatrix.identity(2)) is None


entries = st.integers(-2, 2).map(Rational)


@st.composite
def generator_sets(draw):
    n = draw(st.integers(2, 3))
    count = draw(st.integers(1, 2))
    return [QMatrix.from_rows([[draw(entries) for _ in range(n)] for _ in range(n)]) for _ in range(count)]


@settings(max_examples=40, deadline=None)
@given(generator_sets())
def test_closure_properties(gens):
    m = bracket_closure(gens, cap=20)
    assert m.dim <= 10
    assert jacobi_defect(m) is None
    again = bracket_closure(list(m.basis), n=m.n)
    assert again.dim == m.dim
    if m.dim:
        assert not (is_perfect(m) and is_solvable(m)[0])
    dims = derived_series(m)
    assert all(a > b for a, b in zip(dims, dims[1:]))
