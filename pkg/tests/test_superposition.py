import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import random_system
from centra.errors import CapExceeded, UnsupportedInput, ValidationError
from centra.exactla import QMatrix, Rational
from centra.liealg import bracket_closure
from centra.polyalg import VectorField, parse_field
from centra.superposition import (
    Coefficient,
    EDESystem,
    ExpPoly,
    apply_field,
    chen_reduce,
    close_family,
    exp_matrix,
    field_residual,
    field_rhs,
    integrate_exppoly,
    solve_elementary,
    system_residual,
    system_rhs,
    vec_from_json,
    vec_is_zero,
    vec_to_json,
    vec_value_at,
    verify_numeric,
)

DIAG12 = bracket_closure([QMatrix.diag([1, 2])])
PAIR = bracket_closure([QMatrix.diag([-1, 2, 3]), QMatrix.diag([-1, -1, 0])])


def T(c=1, k=0, lam=0):
    return ExpPoly.term(Rational(c), k, Rational(lam))


# -- ExpPoly ------------------------------------------------------------------------

def test_integrate_examples():
    assert integrate_exppoly(T(1, 1)) == T(Rational(1, 2), 2)
    assert integrate_exppoly(T(1, 0, 2)) == T(Rational(1, 2), 0, 2) + T(Rational(-1, 2))
    assert integrate_exppoly(T(1, 1, 1)) == T(1, 1, 1) + T(-1, 0, 1) + T(1)


def test_integrate_initial_value():
    F = integrate_exppoly(T(3, 2), 2, 5)
    assert F == T(1, 3) + T(-3)
    assert F.value_at(2) == 5


def test_irrational_evaluation_rejected():
    with pytest.raises(UnsupportedInput):
        T(1, 0, 1).value_at(1)
    with pytest.raises(UnsupportedInput):
        integrate_exppoly(T(1, 0, 1), 1, 0)


def test_canonical_terms():
    e = T(1, 1, 2) + T(2, 1, 2) + T(-3, 1, 2)
    assert e.is_zero() and e == 0
    assert (T(1, 0, 1) * T(1, 2, -1)) == T(1, 2)


def test_json_roundtrip_and_str():
    e = T(Rational(1, 3), 2, Rational(-1, 2)) + T(-1, 1, 1) + T(4)
    assert ExpPoly.from_json(e.to_json()) == e
    assert str(e) == "1/3*t^2*exp(-1/2*t) + 4 - t*exp(1*t)"
    vec = (e, T(2, 1))
    assert vec_from_json(vec_to_json(vec), 2) == vec


exppolys = st.lists(
    st.tuples(st.integers(-2, 2), st.integers(0, 3), st.integers(-3, 3)), max_size=5
).map(lambda ts: ExpPoly({(Rational(lam), k): Rational(c) for lam, k, c in ts}))


@settings(max_examples=80, deadline=None)
@given(exppolys, st.integers(-3, 3))
def test_derivative_inverts_integration(f, init):
    F = integrate_exppoly(f, 0, init)
    assert F.derivative() == f
    assert F.value_at(0) == init


@settings(max_examples=40, deadline=None)
@given(exppolys, exppolys)
def test_product_rule(f, g):
    assert (f * g).derivative() == f.derivative() * g + f * g.derivative()


@settings(max_examples=40, deadline=None)
@given(exppolys, st.floats(0, 1))
def test_float_evaluation_matches_terms(f, t):
    expect = sum(float(c) * t ** k * math.exp(float(lam) * t) for (lam, k), c in f.terms.items())
    assert f.evaluate_float(t) == pytest.approx(expect, abs=1e-12)


# -- families -------------------------------------------------------------------------

def test_close_family_examples():
    fam = close_family(DIAG12, [parse_field(["0", "x1^2"])])
    assert [f.to_strings() for f in fam.fields] == [["0", "x1^2"]]
    assert fam.table == {}
    fam = close_family(PAIR, [parse_field(["0", "x1*x3", "0"])])
    assert len(fam.fields) == 1
    empty = close_family(DIAG12, [])
    assert empty.fields == () and empty.seeds == ()


def test_close_family_grows():
    m = bracket_closure([QMatrix.diag([1, 2, 3])])
    fam = close_family(m, [parse_field(["0", "x1^2", "0"]), parse_field(["0", "0", "x1*x2"])])
    assert [f.to_strings() for f in fam.fields] == [["0", "x1^2", "0"], ["0", "0", "x1*x2"], ["0", "0", "x1^3"]]
    # [x1^2 e2, x1 x2 e3] under the directional product gives 2 x1^3 e3
    assert fam.table == {(1, 0): ((2, Rational(1)),)}
    fam.verify()


def test_close_family_rejects():
    with pytest.raises(ValidationError):
        close_family(DIAG12, [parse_field(["x1^2", "0"])])
    with pytest.raises(ValidationError):
        close_family(DIAG12, [VectorField.linear(QMatrix.diag([1, 0]))])
    seed = parse_field(["0", "x1^2"])
    with pytest.raises(ValidationError):
        close_family(DIAG12, [seed, seed.scale(2)])


def test_close_family_cap():
    m = bracket_closure([QMatrix.diag([1, 2, 3])])
    with pytest.raises(CapExceeded):
        close_family(m, [parse_field(["0", "x1^2", "0"]), parse_field(["0", "0", "x1*x2"])], cap=2)


# -- elementary solutions ----------------------------------------------------------------

def _system(fam, *coefs):
    return EDESystem(tuple(fam.seeds), tuple(Coefficient(tuple(map(Rational, s)), Rational(a)) for s, a in coefs))


def test_autonomous_quadrature():
    fam = close_family(DIAG12, [parse_field(["0", "x1^2"])])
    x = solve_elementary(fam, _system(fam, ((1,), 0)), [1, 0])
    assert x == (T(1), T(1, 1))
    err = verify_numeric(x, system_rhs(fam, _system(fam, ((1,), 0))), [1, 0], (0, 1), 1000)
    assert err <= 1e-10


def test_exponential_drive():
    fam = close_family(DIAG12, [parse_field(["0", "x1^2"])])
    x = solve_elementary(fam, _system(fam, ((1,), 1)), [1, 0])
    assert x == (T(1), T(1, 0, 1) + T(-1))


def test_zero_rhs_and_zero_field_numeric():
    fam = close_family(DIAG12, [parse_field(["0", "x1^2"])])
    x = solve_elementary(fam, _system(fam, ((0,), 0)), [3, 4])
    assert x == (T(3), T(4))
    assert verify_numeric(x, field_rhs(VectorField.zero(2)), [3, 4], (0, 1), 100) == 0.0


def test_nonzero_start_time():
    fam = close_family(DIAG12, [parse_field(["0", "x1^2"])])
    sys_ = _system(fam, ((0, 1), 0))
    x = solve_elementary(fam, sys_, [2, 1], t0=1)
    assert vec_value_at(x, 1) == (2, 1)
    assert vec_is_zero(system_residual(x, fam, sys_))
    with pytest.raises(UnsupportedInput):
        solve_elementary(fam, _system(fam, ((1,), 1)), [2, 1], t0=1)


def test_system_validation():
    fam = close_family(DIAG12, [parse_field(["0", "x1^2"])])
    with pytest.raises(ValidationError):
        solve_elementary(fam, EDESystem((1,), (Coefficient((Rational(1),)),)), [1, 0])
    with pytest.raises(ValidationError):
        solve_elementary(fam, _system(fam, ((1,), 0)), [1, 0, 0])


@pytest.mark.parametrize("seed", range(12))
def test_random_systems(seed):
    rng = random.Random(seed)
    _, fam, system, y = random_system(rng, autonomous=seed % 2 == 0)
    x = solve_elementary(fam, system, y)
    assert vec_is_zero(system_residual(x, fam, system))
    assert vec_value_at(x, 0) == tuple(y)
    if system.is_autonomous():
        assert all(c.is_polynomial() for c in x)
    assert verify_numeric(x, system_rhs(fam, system), y, (0, 1), 1000) <= 1e-8


# -- Chen reduction -----------------------------------------------------------------------

def test_chen_example():
    q = parse_field(["x1", "2*x2 + x1^2"])
    red = chen_reduce(DIAG12, q, 4)
    assert red.spectra == {2: [0]}
    y1, y2 = Rational(3), Rational(-2)
    x = red.solve([y1, y2])
    assert x == (T(y1, 0, 1), T(y2, 0, 2) + T(y1 * y1, 1, 2))
    assert vec_is_zero(field_residual(x, q))
    assert verify_numeric(x, field_rhs(q), [y1, y2], (0, 1), 1000) <= 1e-8


def test_chen_linear_only():
    b = QMatrix.from_rows([[0, 1], [0, 0]])
    m = bracket_closure([b])
    red = chen_reduce(m, VectorField.linear(b), 3)
    assert red.transport == ((T(1), T(1, 1)), (ExpPoly(), T(1)))
    assert red.family.fields == ()
    assert red.solve([1, 2]) == (T(1) + T(2, 1), T(2))


def test_chen_nonresonant_drive():
    # M = span{diag(1,1,2)}, q~ mixes degree-2 fields with different ad B eigenvalues
    m = bracket_closure([QMatrix.diag([1, 1, 2])])
    q = parse_field(["x1", "2*x2", "3*x3 + x1^2 + x1*x2"])
    red = chen_reduce(m, q, 4)
    x = red.solve([1, -1, 2])
    assert vec_is_zero(field_residual(x, q))
    assert verify_numeric(x, field_rhs(q), [1, -1, 2], (0, 1), 1000) <= 1e-8


def test_chen_consistency_numeric():
    m = bracket_closure([QMatrix.diag([1, 1, 2])])
    q = parse_field(["x1 + x2", "x2", "2*x3 + x1^2 + x1*x2"])
    red = chen_reduce(m, q, 4)
    qt = q - VectorField.linear(red.linear)
    rhs = red.reduced_rhs()
    rng = random.Random(7)
    for _ in range(10):
        t = rng.random()
        z = [rng.uniform(-1, 1) for _ in range(3)]
        tr = [[e.evaluate_float(t) for e in row] for row in red.transport]
        tinv = [[e.evaluate_float(-t) for e in row] for row in red.transport]
        x = [sum(tr[i][j] * z[j] for j in range(3)) for i in range(3)]
        v = qt.evaluate_float(x)
        lhs = [sum(tinv[i][j] * v[j] for j in range(3)) for i in range(3)]
        assert max(abs(a - b) for a, b in zip(lhs, rhs(t, z))) <= 1e-9


def test_chen_rejects():
    with pytest.raises(ValidationError):
        chen_reduce(DIAG12, parse_field(["1 + x1", "2*x2"]), 3)
    with pytest.raises(ValidationError):
        chen_reduce(DIAG12, parse_field(["x1 + x2^2", "2*x2"]), 3)
    rot = QMatrix.from_rows([[0, -1], [1, 0]])
    with pytest.raises(UnsupportedInput, match="degree 2"):
        chen_reduce(bracket_closure([rot]), VectorField.linear(rot), 3)


def test_exp_matrix_diagonal():
    assert exp_matrix(QMatrix.diag([1, -2])) == ((T(1, 0, 1), ExpPoly()), (ExpPoly(), T(1, 0, -2)))


def test_apply_field_substitution():
    x = (T(1, 1), T(1, 0, 1))
    (a, b) = apply_field(parse_field(["x1*x2", "x2^2"]), x)
    assert a == T(1, 1, 1) and b == T(1, 0, 2)


def test_eigenvalues_triangular_shortcut_and_factoring():
    from centra.superposition import _rational_eigenvalues

    jordan = QMatrix.from_rows([[2, 1, 0], [0, 2, 0], [0, 0, -1]])
    assert _rational_eigenvalues(jordan) == [(-1, 1), (2, 2)]
    assert _rational_eigenvalues(jordan.transpose()) == [(-1, 1), (2, 2)]
    # not triangular: roots of t^2 - t - 6 come from factoring
    assert _rational_eigenvalues(QMatrix.from_rows([[1, 2], [3, 0]])) == [(-2, 1), (3, 1)]
