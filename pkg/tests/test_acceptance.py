"""Acceptance gate: one test per headline requirement.

Three groups, in run order:

* exact algebra (no floating point anywhere),
* numeric spectroscopy (desk scale; the whole group must stay under two
  minutes, enforced by the final budget test),
* property suites (randomized algebra laws, spectral flow, round trips).

Each test is one pass/fail line under ``pytest -v``.
"""

import dataclasses
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dipolelab.angular import (
    kinetic_j_shift,
    duality_report,
    guiding_center_check,
    kinetic_j_spectrum,
    reduced_j_observable,
    reduced_j_spectrum,
)
from dipolelab.model import (
    ExactScalar,
    ModelParams,
    build_constraints,
    build_hamiltonian,
    kinetic_momenta,
)
from dipolelab.parsing import format_expr, parse_expr
from dipolelab.phase_space import (
    PhaseSpaceExpr,
    build_constraint_system,
    dirac_bracket,
    poisson_bracket,
    quantize_quadratic,
)
from dipolelab import radial

_NUMERIC_SECONDS: list[float] = []


@pytest.fixture
def numeric_clock():
    start = time.perf_counter()
    yield
    _NUMERIC_SECONDS.append(time.perf_counter() - start)


# ---------------------------------------------------------------------------
# Exact algebra suite
# ---------------------------------------------------------------------------

SYMBOLIC = ModelParams.symbolic()


def test_exact_kinetic_momentum_bracket():
    pi1, pi2 = kinetic_momenta(SYMBOLIC)
    assert poisson_bracket(pi1, pi2) == parse_expr("mu*rho/(c^2*eps0)")
    # the line-field contribution cancels identically on its own
    ac1, ac2 = kinetic_momenta(SYMBOLIC, which="AC")
    assert poisson_bracket(ac1, ac2).is_zero()


def test_exact_constraint_matrix_is_second_class():
    system = build_constraint_system(build_constraints(SYMBOLIC))
    scale = parse_expr("mu*rho/(c^2*eps0)")
    assert system.classification == "second-class"
    assert system.bracket_matrix[0][0].is_zero()
    assert system.bracket_matrix[1][1].is_zero()
    assert system.bracket_matrix[0][1] == scale
    assert system.bracket_matrix[1][0] == -scale


def test_exact_dirac_bracket_of_coordinates():
    system = build_constraint_system(build_constraints(SYMBOLIC))
    x1, x2 = PhaseSpaceExpr.var("x1"), PhaseSpaceExpr.var("x2")
    assert dirac_bracket(x1, x2, system) == parse_expr("-c^2*eps0/(mu*rho)")


def test_exact_quantized_ladders_run_quickly():
    start = time.perf_counter()
    reduced = reduced_j_spectrum(SYMBOLIC)
    pi1, pi2 = kinetic_momenta(SYMBOLIC)
    kinetic_energy = quantize_quadratic(
        (pi1 * pi1 + pi2 * pi2) * parse_expr("1/(2*m)"),
        (pi1, pi2),
        poisson_bracket,
        hbar=parse_expr("hbar"),
    )
    elapsed = time.perf_counter() - start

    hbar = parse_expr("hbar")
    offset = parse_expr("mu*lam/(2*pi*c^2*eps0)")
    for n in range(4):
        assert reduced.level(n) == offset + Fraction(2 * n + 1, 2) * hbar
    hbar_omega = parse_expr("hbar*mu*rho/(m*c^2*eps0)")
    for n in range(4):
        assert kinetic_energy.level(n) == Fraction(2 * n + 1, 2) * hbar_omega
    assert elapsed < 1.0


def test_exact_ladder_shift_identity():
    # the canonical-vs-kinetic split is the same constant that offsets the
    # reduced ladder, and the zero-density ladder is n*hbar - hbar*alpha
    shift = parse_expr("mu*lam/(2*c^2*eps0*pi)")
    assert kinetic_j_shift(SYMBOLIC) == shift
    rule = kinetic_j_spectrum(ModelParams.symbolic(rho=0))
    assert rule.step == parse_expr("hbar")
    assert rule.offset == -shift
    assert rule.level(3) == parse_expr("3*hbar") - shift


def test_exact_conservation_checks():
    j = parse_expr("x1*p2 - x2*p1")
    assert poisson_bracket(j, build_hamiltonian(SYMBOLIC)).is_zero()
    system = build_constraint_system(build_constraints(SYMBOLIC))
    j_reduced = reduced_j_observable(SYMBOLIC)
    h_reduced = parse_expr("K*x1^2/2 + K*x2^2/2")
    assert dirac_bracket(j_reduced, h_reduced, system).is_zero()


# ---------------------------------------------------------------------------
# Numeric spectroscopy suite
# ---------------------------------------------------------------------------


def test_numeric_landau_analog_levels(numeric_clock):
    params = ModelParams(mu=1, lam=0, rho="1/2", K=0, include_divergence_term=False)
    for sector in (1, 2, 3):
        result = radial.converge(params, sector, 5, 1e-6)
        expected = (np.arange(5) + 0.5) * 0.5
        np.testing.assert_allclose(result.eigenvalues, expected, rtol=0, atol=1e-6)


def test_numeric_bare_oscillator_oracle(numeric_clock):
    params = ModelParams(lam=0, rho=0, K=1)
    for sector in (-2, -1, 1, 2, 3):
        result = radial.converge(params, sector, 3, 1e-6)
        expected = 2 * np.arange(3) + abs(sector) + 1
        np.testing.assert_allclose(result.eigenvalues, expected, rtol=0, atol=1e-6)


def test_numeric_trapped_spectrum_cross_validation(numeric_clock):
    # (alpha, Omega, K) = (0.3, 1, 0.2): solver vs the closed form from the
    # polar reduction, 18 states across six sectors
    params = ModelParams(mu=1, lam="3*pi/5", rho=1, K="1/5")
    omega = float(params.omega)
    omega_tilde = params.omega_tilde
    checked = 0
    for sector in range(-2, 4):
        nu = float(params.nu(sector))
        closed_form = (
            (2 * np.arange(3) + 1 + abs(nu)) * omega_tilde
            - 0.5 * nu * omega
            + 0.5 * omega
        )
        result = radial.converge(params, sector, 3, 1e-6)
        np.testing.assert_allclose(result.eigenvalues, closed_form, rtol=0, atol=1e-6)
        checked += 3
    assert checked == 18


def test_numeric_duality_of_spectra(numeric_clock):
    params = ModelParams(mu=1, lam="pi/2", rho="1/2", K="1/5")
    report = duality_report(params, numeric_sectors=(1, 2), levels=3, tol=1e-6)
    assert report.all_equal
    for row in report.numeric:
        assert row["max_gap"] < 1e-6


def test_numeric_guiding_center_fractional_j(numeric_clock):
    # alpha = 0.3, Omega = 1: the trap ratio t = K/(m Omega^2) is K itself
    params = ModelParams(mu=1, lam="3*pi/5", rho=1, K="1/5")
    ladder = [1e-2, 1e-3, 1e-4]
    rows = guiding_center_check(params, range(1, 6), ladder, tol=1e-8)
    for sector in range(1, 6):
        mine = [row for row in rows if row["sector"] == sector]
        assert [row["t"] for row in mine] == pytest.approx([1e-2, 1e-3, 1e-4])
        devs = [row["deviation"] for row in mine]
        assert devs[0] > devs[1] > devs[2]
        target = (sector - 1 + 0.5) + 0.3
        assert mine[-1]["measured"] == pytest.approx(target, abs=1e-3)


def test_numeric_suite_within_budget():
    assert len(_NUMERIC_SECONDS) == 5, "numeric suite did not run completely"
    assert sum(_NUMERIC_SECONDS) < 120.0


# ---------------------------------------------------------------------------
# Property suites
# ---------------------------------------------------------------------------

coeffs = st.fractions(
    min_value=Fraction(-6), max_value=Fraction(6), max_denominator=8
).filter(bool)


@st.composite
def observables(draw, max_terms=3):
    n = draw(st.integers(min_value=1, max_value=max_terms))
    total = PhaseSpaceExpr.zero()
    for _ in range(n):
        total = total + PhaseSpaceExpr.from_term(
            draw(coeffs),
            params=draw(st.sampled_from([(), (("mu", 1),), (("eps0", -1),)])),
            xexp=(draw(st.integers(0, 2)), draw(st.integers(0, 2))),
            pexp=(draw(st.integers(0, 2)), draw(st.integers(0, 2))),
            rpow=draw(st.integers(0, 1)),
        )
    return total


@settings(max_examples=200, deadline=None)
@given(f=observables(), g=observables(), h=observables())
def test_property_bracket_laws(f, g, h):
    assert poisson_bracket(f, g) == -poisson_bracket(g, f)
    assert poisson_bracket(f, g * h) == poisson_bracket(f, g) * h + g * poisson_bracket(f, h)
    jacobi = (
        poisson_bracket(f, poisson_bracket(g, h))
        + poisson_bracket(g, poisson_bracket(h, f))
        + poisson_bracket(h, poisson_bracket(f, g))
    )
    assert jacobi.is_zero()


@settings(max_examples=200, deadline=None)
@given(
    alpha=st.fractions(
        min_value=Fraction(-4), max_value=Fraction(4), max_denominator=12
    ),
    sector=st.integers(min_value=-6, max_value=6),
)
def test_property_spectral_flow_is_exact(alpha, sector):
    # shifting (m, alpha) -> (m+1, alpha+1) leaves the sector index nu exact
    base = ModelParams(mu=1, lam=ExactScalar(2 * alpha, 1), rho="1/2", K="1/5")
    moved = ModelParams(mu=1, lam=ExactScalar(2 * (alpha + 1), 1), rho="1/2", K="1/5")
    assert base.nu(sector) == moved.nu(sector + 1)


def test_property_spectral_flow_numeric_fixed_point():
    # and the solver sees the same problem: bit-identical spectra
    base = ModelParams(mu=1, lam="3*pi/5", rho="1/2", K="1/5")
    moved = ModelParams(mu=1, lam="13*pi/5", rho="1/2", K="1/5")
    a = radial.converge(base, 1, 3, 1e-6)
    b = radial.converge(moved, 2, 3, 1e-6)
    np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)


@settings(max_examples=200, deadline=None)
@given(e=observables(max_terms=4))
def test_property_parse_print_round_trip(e):
    from dipolelab.parsing import parse_expr as reparse

    assert reparse(format_expr(e)) == e
