"""Radial solver: discretization, eigenpairs, and the refinement ladder.

Reference energies come from the closed oscillator forms: a sector with index
nu in a trap of frequency w has levels (2 n + 1 + |nu|) hbar w (plus the
model's constant shifts), so every converged number below is checked against
an independently evaluated formula, not against the solver itself.
"""

import math

import numpy as np
import pytest

from dipolelab.model import ModelParams
from dipolelab.radial import (
    ConvergenceError,
    RadialGrid,
    RadialProblem,
    convergence_slope,
    converge,
    converge_problem,
    default_wall_radius,
    discretize,
    eigen_lowest,
    expectation,
)


def oscillator_levels(params: ModelParams, sector: int, count: int) -> np.ndarray:
    """(2n + 1 + |nu|) hbar w~ - nu hbar Omega/2 [+ hbar Omega/2], evaluated
    independently of the solver."""
    nu = float(params.nu(sector))
    hbar = float(params.hbar)
    wt = params.omega_tilde
    shift = -0.5 * hbar * nu * float(params.omega)
    if params.include_divergence_term:
        shift += 0.5 * hbar * float(params.omega)
    n = np.arange(count)
    return (2 * n + 1 + abs(nu)) * hbar * wt + shift


BARE = ModelParams(lam=0, rho=0, K=1)


# ---------------------------------------------------------------------------
# Grids and discretization
# ---------------------------------------------------------------------------


def test_grid_layout():
    g = RadialGrid.from_wall(1.0, 99)
    assert g.h == pytest.approx(0.01)
    nodes = g.nodes()
    assert len(nodes) == 99
    assert nodes[0] == pytest.approx(g.h)
    # walls one spacing outside the stored nodes: origin and the box edge
    assert nodes[0] - g.h == pytest.approx(0.0)
    assert nodes[-1] + g.h == pytest.approx(1.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(0.0, 1.0, 100)
    with pytest.raises(ValueError):
        RadialGrid(2.0, 1.0, 100)
    with pytest.raises(ValueError):
        RadialGrid(0.1, 1.0, 10)


def test_discretize_entries():
    problem = RadialProblem(sector=0, nu=0.5, potential=lambda r: r**2, mass=2.0)
    grid = RadialGrid.from_wall(3.0, 127)
    system = discretize(problem, grid)
    t = 1.0 / (2 * 2.0 * grid.h**2)
    np.testing.assert_allclose(system.diag, 2 * t + grid.nodes() ** 2, rtol=1e-15)
    np.testing.assert_allclose(system.offdiag, -t, rtol=1e-15)
    assert len(system.offdiag) == grid.n - 1


def test_discretize_rejects_bad_potentials():
    grid = RadialGrid.from_wall(1.0, 64)
    problem = RadialProblem(sector=0, nu=0.0, potential=lambda r: np.zeros(3), mass=1.0)
    with pytest.raises(ValueError, match="per node"):
        discretize(problem, grid)
    problem = RadialProblem(
        sector=0, nu=0.0, potential=lambda r: np.full_like(r, np.inf), mass=1.0
    )
    with pytest.raises(ValueError, match="finite"):
        discretize(problem, grid)


def test_particle_in_a_box():
    # V = 0 on (0, 1): E_1 = pi^2 hbar^2 / 2m, reproduced to O(h^2) with
    # error ratio 4 under grid halving.
    problem = RadialProblem(sector=0, nu=0.0, potential=lambda r: 0.0 * r, mass=1.0)
    exact = math.pi**2 / 2
    errors = []
    for n in (511, 1023):
        system = discretize(problem, RadialGrid.from_wall(1.0, n))
        e = eigen_lowest(system, 1, want_vectors=False).eigenvalues[0]
        err = abs(e - exact)
        assert err < 1e-4
        errors.append(err)
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.02)


def test_eigen_lowest_bounds_and_determinism():
    system = discretize(RadialProblem.from_params(BARE, 1), RadialGrid.from_wall(10.0, 255))
    with pytest.raises(ValueError, match="k must satisfy"):
        eigen_lowest(system, 64)
    a = eigen_lowest(system, 3)
    b = eigen_lowest(system, 3)
    np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)
    np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)


def test_eigenvectors_are_orthonormal_and_satisfy_residuals():
    grid = RadialGrid.from_wall(12.0, 1023)
    system = discretize(RadialProblem.from_params(BARE, 1), grid)
    res = eigen_lowest(system, 4)
    gram = grid.h * res.eigenvectors.T @ res.eigenvectors
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-10)
    assert np.all(res.residuals < 1e-8)


def test_expectation_of_unity_is_one():
    grid = RadialGrid.from_wall(12.0, 511)
    system = discretize(RadialProblem.from_params(BARE, 1), grid)
    res = eigen_lowest(system, 2)
    for j in range(2):
        assert expectation(lambda r: np.ones_like(r), res.eigenvectors[:, j], grid) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        expectation(lambda r: np.ones(7), res.eigenvectors[:, 0], grid)
    with pytest.raises(ValueError):
        expectation(lambda r: np.ones_like(r), res.eigenvectors[:3, 0], grid)


def test_energy_partition_identity():
    # E <u,u> = kinetic difference form + <V>: an exact identity of the
    # discrete matrix, so it must hold to rounding on any grid.
    grid = RadialGrid.from_wall(12.0, 511)
    problem = RadialProblem.from_params(BARE, 1)
    system = discretize(problem, grid)
    res = eigen_lowest(system, 1)
    u = res.eigenvectors[:, 0]
    e = res.eigenvalues[0]
    t = problem.hbar**2 / (2 * problem.mass * grid.h**2)
    kinetic = grid.h * t * (u[0] ** 2 + u[-1] ** 2 + np.sum(np.diff(u) ** 2))
    v_mean = expectation(problem.potential, u, grid)
    assert kinetic + v_mean == pytest.approx(e, abs=1e-10)


# ---------------------------------------------------------------------------
# Convergence ladder
# ---------------------------------------------------------------------------


def test_bare_oscillator_sectors():
    # after the convergence study the lowest levels are 2n + |m| + 1 exactly
    for sector in (1, 2, 3):
        res = converge(BARE, sector, 3, 1e-6)
        expected = oscillator_levels(BARE, sector, 3)
        np.testing.assert_allclose(res.eigenvalues, expected, rtol=0, atol=1e-6)
        assert np.all(res.error_bars < 1e-6)


def test_bare_oscillator_negative_sector_matches_positive():
    lo = converge(BARE, -2, 2, 1e-6).eigenvalues
    hi = converge(BARE, 2, 2, 1e-6).eigenvalues
    np.testing.assert_array_equal(lo, hi)


def test_bare_s_wave_sector():
    # |nu| = 0 converges only logarithmically; the ladder reaches ~5e-4 here
    res = converge(BARE, 0, 3, 5e-4)
    expected = oscillator_levels(BARE, 0, 3)
    np.testing.assert_allclose(res.eigenvalues, expected, rtol=0, atol=5e-4)
    assert res.info["scheme"] == "log"


@pytest.mark.xfail(
    raises=ConvergenceError,
    strict=False,
    reason="the s-wave boundary layer limits the default ladder to ~5e-4",
)
def test_bare_s_wave_sector_tight_tolerance():
    converge(BARE, 0, 1, 1e-6)


LANDAU = ModelParams(mu=1, lam=0, rho="1/2", K=0, include_divergence_term=False)


def test_landau_analog_levels():
    # Omega = 1/2, K = 0: every nu > 0 sector starts at hbar*Omega/2 = 0.25
    # with spacing 2*hbar*omega_tilde = 0.5
    res = converge(LANDAU, 1, 4, 1e-8)
    np.testing.assert_allclose(res.eigenvalues, 0.25 + 0.5 * np.arange(4), atol=1e-8)
    for sector in (2, 3):
        res = converge(LANDAU, sector, 2, 1e-8)
        np.testing.assert_allclose(res.eigenvalues, [0.25, 0.75], atol=1e-8)


def test_landau_ground_state_radius():
    # <r^2> = (1 + |nu|) * hbar/(m omega_tilde) = 8 for nu = 1
    res = converge(LANDAU, 1, 1, 1e-6, observables={"r2": lambda r: r * r})
    value, bar = res.observables["r2"]
    assert value == pytest.approx(8.0, abs=1e-4)
    assert bar < 1e-4


FRACTIONAL = ModelParams(mu=1, lam="3*pi/5", rho="1/2", K="1/5")


def test_fractional_sectors_match_closed_form():
    # alpha = 3/10: six sectors, three levels each, solved by the ladder and
    # checked against the independently evaluated level formula
    for sector in range(-2, 4):
        res = converge(FRACTIONAL, sector, 3, 1e-6)
        expected = oscillator_levels(FRACTIONAL, sector, 3)
        np.testing.assert_allclose(res.eigenvalues, expected, rtol=0, atol=1e-6)


def test_spectral_flow_under_unit_flux_shift():
    # lam -> lam + 2 pi hbar c^2 eps0 shifts alpha by exactly 1, so sector
    # m+1 of the shifted model reproduces sector m bit for bit: identical nu
    # gives identical matrices and the solver is deterministic.
    shifted = ModelParams(mu=1, lam="13*pi/5", rho="1/2", K="1/5")
    base = converge(FRACTIONAL, 0, 4, 1e-6)
    moved = converge(shifted, 1, 4, 1e-6)
    np.testing.assert_array_equal(base.eigenvalues, moved.eigenvalues)
    assert float(FRACTIONAL.nu(0)) == float(shifted.nu(1))


def test_trap_stiffening_is_monotone():
    energies = []
    for k_val in ("0", "1/10", "1/2", "1", "2"):
        p = ModelParams(mu=1, lam="3*pi/5", rho="1/2", K=k_val)
        energies.append(converge(p, 1, 1, 1e-6).eigenvalues[0])
    assert all(a < b for a, b in zip(energies, energies[1:]))


def test_positive_sector_floor_with_no_trap():
    # K = 0: the lowest level of every nu > 0 sector sits at hbar*Omega/2
    p = ModelParams(mu=1, lam="3*pi/5", rho="1/2", K=0, include_divergence_term=False)
    for sector in (1, 2):
        res = converge(p, sector, 1, 1e-6)
        assert res.eigenvalues[0] == pytest.approx(0.25, abs=1e-6)


def test_observed_convergence_order():
    res = converge(LANDAU, 2, 1, 1e-8)
    assert res.info["scheme"] == "even"
    assert convergence_slope(res) == pytest.approx(2.0, abs=0.2)


def test_ladder_exhaustion_reports_diagnostics():
    with pytest.raises(ConvergenceError) as err:
        converge(FRACTIONAL, 0, 1, 1e-13, max_rungs=6)
    diag = err.value.diagnostics
    assert diag["sector"] == 0
    assert diag["nu"] == pytest.approx(-0.3)
    assert diag["tol"] == 1e-13
    assert len(diag["rungs"]) == 6
    assert "ladder exhausted" in str(err.value)


def test_converge_validates_tolerance():
    with pytest.raises(ValueError, match="tol"):
        converge(BARE, 1, 1, 0.0)


def test_wall_radius_guards():
    problem = RadialProblem.from_params(BARE, 1)
    with pytest.raises(ValueError, match="omega_tilde"):
        default_wall_radius(problem, 1, omega=0.0, omega_tilde=0.0)
    # monotone in the excitation count: more states need more room
    w1 = default_wall_radius(problem, 1, omega=0.0, omega_tilde=1.0)
    w9 = default_wall_radius(problem, 9, omega=0.0, omega_tilde=1.0)
    assert w9 >= w1 > 0


def test_converge_problem_accepts_custom_potentials():
    # same bare oscillator, fed in as a raw problem with an explicit wall
    problem = RadialProblem(
        sector=1,
        nu=1.0,
        potential=lambda r: 3 / (8 * r**2) + r**2 / 2,
        mass=1.0,
    )
    res = converge_problem(problem, 2, 1e-6, wall=12.0)
    np.testing.assert_allclose(res.eigenvalues, [2.0, 4.0], atol=1e-6)


def test_virial_balance_for_bare_oscillator():
    # 2<T> = <r V'> forces <V_ho> = E/2 regardless of the centrifugal term
    res = converge(BARE, 1, 1, 1e-6, observables={"v_ho": lambda r: r * r / 2})
    value, _ = res.observables["v_ho"]
    assert value == pytest.approx(res.eigenvalues[0] / 2, abs=1e-5)
