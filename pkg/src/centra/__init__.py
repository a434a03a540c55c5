"""Exact computation of polynomial centralizers, invariants and normal forms
for linear Lie algebras over the rationals."""

from .errors import CapExceeded, CentraError, InternalInconsistency, ParseError, UnsupportedInput, ValidationError
from .exactla import QMatrix, Rational, format_rational, kernel_basis, parse_rational, rref, solve
from .polyalg import Poly, VectorField, directional, jacobian, lie_bracket, lie_derivative, parse_field, parse_poly
from .liealg import LieAlgebra, bracket_closure, diagonal_profile, is_perfect, is_solvable, triangular_profile
from .equivariance import (
    FiniteCertified,
    GradedBasis,
    InfiniteCertified,
    Undetermined,
    centralizer_up_to,
    check_directional_closure,
    equivariant_space,
    finiteness_report,
    infinite_certificate,
    nilpotency_witness,
)
from .invariants import invariant_space, monomial_relative_invariants, relative_invariant_space, resonance_lattice
from .superposition import (
    ClosedFamily,
    Coefficient,
    EDESystem,
    ExpPoly,
    chen_reduce,
    close_family,
    integrate_exppoly,
    solve_elementary,
    verify_numeric,
)
from .normalform import FormalField, normal_form, push_forward, resonant_space

__version__ = "0.1.0"
