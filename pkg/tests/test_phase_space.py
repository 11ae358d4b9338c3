"""Exact phase-space algebra: brackets, constraint systems, quantization."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dipolelab.parsing import parse_expr
from dipolelab.phase_space import (
    BracketError,
    PhaseSpaceExpr,
    QuantizeError,
    build_constraint_system,
    dirac_bracket,
    poisson_bracket,
    quantize_quadratic,
)

X1 = PhaseSpaceExpr.var("x1")
X2 = PhaseSpaceExpr.var("x2")
P1 = PhaseSpaceExpr.var("p1")
P2 = PhaseSpaceExpr.var("p2")
J = X1 * P2 - X2 * P1
ONE = PhaseSpaceExpr.one()


def expr(src):
    return parse_expr(src)


# ---------------------------------------------------------------------------
# Poisson brackets
# ---------------------------------------------------------------------------


def test_canonical_pairs():
    assert poisson_bracket(X1, P1) == ONE
    assert poisson_bracket(X2, P2) == ONE
    assert poisson_bracket(X1, P2).is_zero()
    assert poisson_bracket(X2, P1).is_zero()
    assert poisson_bracket(X1, X2).is_zero()
    assert poisson_bracket(P1, P2).is_zero()


def test_angular_momentum_generates_rotations():
    assert poisson_bracket(J, X1) == X2
    assert poisson_bracket(J, X2) == -X1
    assert poisson_bracket(J, P1) == P2
    assert poisson_bracket(J, P2) == -P1


def test_bracket_of_rotation_invariants_with_j_vanishes():
    for inv in (expr("x1^2 + x2^2"), expr("p1^2 + p2^2"), expr("x1*p1 + x2*p2")):
        assert poisson_bracket(J, inv).is_zero()


def test_kinetic_momentum_bracket_line_field_cancels():
    # Pi_i = p_i + g*eps_ij E_j with the divergence-free line field: the two
    # derivative terms of {Pi1, Pi2} cancel exactly (including the r^-4 pieces).
    g = expr("mu/c^2")
    e1 = expr("lam*x1/(2*pi*eps0*r2)")
    e2 = expr("lam*x2/(2*pi*eps0*r2)")
    pi1 = P1 + g * e2
    pi2 = P2 - g * e1
    assert poisson_bracket(pi1, pi2).is_zero()


def test_kinetic_momentum_bracket_uniform_field_is_constant():
    g = expr("mu/c^2")
    e1 = expr("rho*x1/(2*eps0)")
    e2 = expr("rho*x2/(2*eps0)")
    pi1 = P1 + g * e2
    pi2 = P2 - g * e1
    assert poisson_bracket(pi1, pi2) == expr("mu*rho/(c^2*eps0)")


def test_bracket_accepts_numbers():
    assert poisson_bracket(X1, 3).is_zero()
    assert poisson_bracket(Fraction(1, 2), P1).is_zero()


# ---------------------------------------------------------------------------
# Constraint systems and Dirac brackets
# ---------------------------------------------------------------------------


def symbolic_constraints():
    g = expr("mu/c^2")
    e1 = expr("lam*x1/(2*pi*eps0*r2) + rho*x1/(2*eps0)")
    e2 = expr("lam*x2/(2*pi*eps0*r2) + rho*x2/(2*eps0)")
    return (P1 + g * e2, P2 - g * e1)


def test_constraint_matrix_symbolic():
    cs = build_constraint_system(symbolic_constraints())
    assert cs.classification == "second-class"
    assert cs.second_class
    c12 = expr("mu*rho/(c^2*eps0)")
    assert cs.bracket_matrix[0][1] == c12
    assert cs.bracket_matrix[1][0] == -c12
    assert cs.bracket_matrix[0][0].is_zero()
    assert cs.bracket_matrix[1][1].is_zero()


def test_constraint_matrix_inverse_is_exact():
    cs = build_constraint_system(symbolic_constraints())
    n = len(cs.constraints)
    for i in range(n):
        for j in range(n):
            acc = PhaseSpaceExpr.zero()
            for k in range(n):
                acc = acc + cs.bracket_matrix[i][k] * cs.inverse_matrix[k][j]
            assert acc == (ONE if i == j else PhaseSpaceExpr.zero())


def test_free_momenta_are_not_second_class():
    cs = build_constraint_system((P1, P2))
    assert cs.classification == "singular"
    assert not cs.second_class
    assert cs.inverse_matrix is None
    assert all(e.is_zero() for row in cs.bracket_matrix for e in row)
    with pytest.raises(BracketError):
        dirac_bracket(X1, X2, cs)


def test_non_constant_bracket_matrix_is_reported():
    cs = build_constraint_system((P1, P2 + X1 * P1))
    assert cs.classification == "non-constant"
    assert not cs.second_class
    with pytest.raises(BracketError):
        dirac_bracket(X1, X2, cs)


def instantiated_constraints():
    # mu = c = eps0 = 1, rho = 1/2, lam arbitrary (kept symbolic: it drops
    # out of every bracket below).
    subs = {"mu": 1, "c": 1, "eps0": 1, "rho": Fraction(1, 2)}
    return tuple(c.substitute_params(subs) for c in symbolic_constraints())


def test_instantiated_matrix_entry():
    cs = build_constraint_system(instantiated_constraints())
    assert cs.bracket_matrix[0][1] == PhaseSpaceExpr.number(Fraction(1, 2))


def test_coordinates_fail_to_commute_after_reduction():
    cs = build_constraint_system(instantiated_constraints())
    assert dirac_bracket(X1, X2, cs) == PhaseSpaceExpr.number(-2)
    # antisymmetry
    assert dirac_bracket(X2, X1, cs) == PhaseSpaceExpr.number(2)


def test_dirac_bracket_scale():
    # {x1, x2}_D = -c^2 eps0/(mu rho): check at a second parameter point.
    subs = {"mu": 2, "c": 1, "eps0": 1, "rho": Fraction(1, 4)}
    cs = build_constraint_system(
        tuple(c.substitute_params(subs) for c in symbolic_constraints())
    )
    assert dirac_bracket(X1, X2, cs) == PhaseSpaceExpr.number(-2)


def test_constraints_are_dirac_central():
    cs = build_constraint_system(instantiated_constraints())
    probes = [X1, X2, P1, P2, J, expr("x1^2 + x2^2"), expr("p1*x2/r2")]
    for phi in cs.constraints:
        for f in probes:
            assert dirac_bracket(phi, f, cs).is_zero()
            assert dirac_bracket(f, phi, cs).is_zero()


def test_dirac_bracket_of_momenta():
    # With the uniform field alone the surface fixes p1 = -x2/4, p2 = x1/4,
    # so {p1,p2}_D = (1/16) {x1,x2}_D = -1/8.  Checked against the same
    # engine's {x1,x2}_D for consistency.
    subs = {"mu": 1, "c": 1, "eps0": 1, "rho": Fraction(1, 2), "lam": 0}
    cs = build_constraint_system(
        tuple(c.substitute_params(subs) for c in symbolic_constraints())
    )
    xx = dirac_bracket(X1, X2, cs)
    assert xx == PhaseSpaceExpr.number(-2)
    assert dirac_bracket(P1, P2, cs) == Fraction(1, 16) * xx


# ---------------------------------------------------------------------------
# Quantization of quadratic observables
# ---------------------------------------------------------------------------


def test_oscillator_levels():
    h = Fraction(1, 2) * (X1 * X1 + P1 * P1)
    spec = quantize_quadratic(h, (X1, P1), poisson_bracket, hbar=ONE)
    for n in range(4):
        assert spec.level(n) == PhaseSpaceExpr.number(Fraction(2 * n + 1, 2))
    assert spec.spacing() == ONE


def test_oscillator_symbolic_hbar():
    h = Fraction(1, 2) * (X1 * X1 + P1 * P1)
    spec = quantize_quadratic(h, (X1, P1))
    hbar = PhaseSpaceExpr.symbol("hbar")
    assert spec.level(0) == Fraction(1, 2) * hbar
    assert spec.spacing() == hbar


def test_quantize_with_frequency_and_offset():
    # H = (m w^2/2) x^2 + p^2/(2m) + const -> E_n = const + (n + 1/2) hbar w.
    h = expr("m*x1^2/2 + p1^2/(2*m) + K")
    spec = quantize_quadratic(h, (X1, P1))  # {x,p}=1, freq = 2 sqrt(1/4) = 1... scaled below
    assert spec.offset == expr("K")
    # A = m/2, B = 1/(2m): freq = 2 sqrt(1/4) = 1 only if m drops; here the
    # product A*B = 1/4 exactly, independent of m.
    assert spec.freq == ONE
    assert spec.spacing() == PhaseSpaceExpr.symbol("hbar")


def test_quantize_kinetic_energy_through_noncanonical_pair():
    # (Pi1^2 + Pi2^2)/(2m) quantized against the pair (Pi1, Pi2) whose
    # bracket is the constant mu*rho/(c^2 eps0): spacing hbar*mu*rho/(m c^2 eps0).
    g = expr("mu/c^2")
    pi1 = P1 + g * expr("rho*x2/(2*eps0)")
    pi2 = P2 - g * expr("rho*x1/(2*eps0)")
    h = expr("1/(2*m)") * (pi1 * pi1 + pi2 * pi2)
    spec = quantize_quadratic(h, (pi1, pi2))
    assert spec.offset.is_zero()
    assert spec.spacing() == expr("hbar*mu*rho/(m*c^2*eps0)")
    assert spec.level(0) == expr("hbar*mu*rho/(2*m*c^2*eps0)")


def test_quantize_rejects_cross_terms():
    with pytest.raises(QuantizeError):
        quantize_quadratic(X1 * P1, (X1, P1))


def test_quantize_rejects_linear_remainder():
    with pytest.raises(QuantizeError, match="remainder"):
        quantize_quadratic(X1 * X1 + P1 * P1 + X1, (X1, P1))


def test_quantize_rejects_degenerate_observable():
    with pytest.raises(QuantizeError, match="degenerate"):
        quantize_quadratic(X1 * X1, (X1, P1))


def test_quantize_rejects_commuting_pair():
    with pytest.raises(QuantizeError, match="nonzero constant"):
        quantize_quadratic(X1 * X1 + X2 * X2, (X1, X2))


def test_quantize_rejects_irrational_frequency():
    # A*B = 2 is not a perfect rational square and there is no parameter
    # symbol to absorb the half power.
    with pytest.raises(QuantizeError, match="perfect rational square"):
        quantize_quadratic(X1 * X1 + 2 * P1 * P1, (X1, P1))


def test_quantize_frequency_may_carry_half_integer_symbol_powers():
    h = expr("K*x1^2/2 + p1^2/(2*m)")
    spec = quantize_quadratic(h, (X1, P1))
    t = spec.freq.single_term()
    assert dict(t.params) == {"K": Fraction(1, 2), "m": Fraction(-1, 2)}
    assert t.coeff == 1


def test_quantize_rejects_quartic():
    with pytest.raises(QuantizeError):
        quantize_quadratic((X1 * X1 + P1 * P1) ** 2, (X1, P1))


# ---------------------------------------------------------------------------
# Algebraic laws (property tests)
# ---------------------------------------------------------------------------

coeffs = st.fractions(
    min_value=Fraction(-4), max_value=Fraction(4), max_denominator=6
).filter(bool)


@st.composite
def observables(draw, max_terms=3):
    n = draw(st.integers(min_value=1, max_value=max_terms))
    total = PhaseSpaceExpr.zero()
    for _ in range(n):
        total = total + PhaseSpaceExpr.from_term(
            draw(coeffs),
            params=draw(
                st.sampled_from([(), (("mu", 1),), (("lam", 1), ("eps0", -1))])
            ),
            xexp=(draw(st.integers(0, 2)), draw(st.integers(0, 2))),
            pexp=(draw(st.integers(0, 2)), draw(st.integers(0, 2))),
            rpow=draw(st.integers(0, 1)),
        )
    return total


@settings(max_examples=200, deadline=None)
@given(f=observables(), g=observables())
def test_bracket_antisymmetry(f, g):
    assert poisson_bracket(f, g) == -poisson_bracket(g, f)


@settings(max_examples=200, deadline=None)
@given(f=observables(), g=observables(), h=observables())
def test_bracket_leibniz_rule(f, g, h):
    lhs = poisson_bracket(f, g * h)
    rhs = poisson_bracket(f, g) * h + g * poisson_bracket(f, h)
    assert lhs == rhs


@settings(max_examples=100, deadline=None)
@given(f=observables(max_terms=2), g=observables(max_terms=2), h=observables(max_terms=2))
def test_bracket_jacobi_identity(f, g, h):
    total = (
        poisson_bracket(f, poisson_bracket(g, h))
        + poisson_bracket(g, poisson_bracket(h, f))
        + poisson_bracket(h, poisson_bracket(f, g))
    )
    assert total.is_zero()


@settings(max_examples=100, deadline=None)
@given(f=observables(max_terms=2), g=observables(max_terms=2))
def test_dirac_bracket_antisymmetry(f, g):
    cs = build_constraint_system(instantiated_constraints())
    assert dirac_bracket(f, g, cs) == -dirac_bracket(g, f, cs)
