"""Finite-difference radial eigensolver with a sector-aware convergence ladder.

Each angular sector of the planar problem separates into a half-line
Schroedinger problem for u(r) = sqrt(r) R(r) with the effective potential
from :func:`dipolelab.model.radial_effective_potential`.  The discretization
is the standard three-point Laplacian on a uniform grid whose first interior
node sits one spacing from the origin (rMin = h), with Dirichlet walls just
outside both ends: u(rMin - h) = u(rMax + h) = 0.

Eigenvalues come from LAPACK's bisection + inverse-iteration routines for
symmetric tridiagonal matrices (scipy.linalg.eigh_tridiagonal with an index
range), which is the classic Sturm-sequence method: deterministic and
bit-reproducible for fixed inputs.

Convergence ladder
------------------
``converge`` refines the grid by exact halving (n_j = (n0+1) 2^j - 1, fixed
wall radius) and extrapolates h -> 0 with a least-squares fit whose basis
depends on the sector's singularity strength a = |nu|:

* generic non-integer a: eigenvalue error is a combination of h^(2a),
  h^(2a+1), h^2, ... from the r^(nu+1/2) behaviour at the wall-regularized
  origin; the fit uses those powers.
* |nu| = 1: the leading correction is h^2 ln h; fitted with an
  h^2 (ln(1/h) + S) basis, scanning the offset S.
* nu = 0: convergence is only logarithmic.  The wall at r = 0 realizes a
  boundary condition u ~ sqrt(r) (ln r - c_h) whose parameter flows like
  c_h = ln(1/h) + C_BOUNDARY, so the fit runs in the variable
  theta = 1/(ln(1/h) + C_BOUNDARY).  C_BOUNDARY = euler_gamma + 6 ln 2 - 2
  is a property of the lattice's local connection problem, derived in
  demos/boundary_constant.py.  Extrapolation in theta is information-limited:
  these sectors carry a documented accuracy floor of roughly 1e-4 relative,
  and a tighter requested tolerance raises ConvergenceError honestly.

Sectors with |nu| < 1/2 (attractive centrifugal term) converge more slowly
in general; nu = 0 is the worst case.  All sector solves are pure functions
of their inputs, so drivers may run sectors concurrently and merge results
in sector order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import ModelParams, radial_effective_potential

__all__ = [
    "C_BOUNDARY",
    "RadialGrid",
    "RadialProblem",
    "TridiagonalSystem",
    "EigenResult",
    "ConvergenceError",
    "discretize",
    "eigen_lowest",
    "expectation",
    "converge",
    "converge_problem",
    "default_wall_radius",
    "convergence_slope",
]

# Boundary-flow constant of the nu = 0 lattice connection problem
# (see demos/boundary_constant.py): euler_gamma + 6 ln 2 - 2.
C_BOUNDARY = float(np.euler_gamma) + 6.0 * math.log(2.0) - 2.0


class ConvergenceError(RuntimeError):
    """Grid-refinement ladder exhausted before the tolerance was met."""

    def __init__(self, message: str, *, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid r_i = r_min + i h, i = 0..n-1, with h = (r_max - r_min)/(n-1).

    The Dirichlet walls sit at r_min - h and r_max + h.  With r_min = h the
    lower wall is exactly the origin.
    """

    r_min: float
    r_max: float
    n: int

    def __post_init__(self):
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError("grid requires 0 < r_min < r_max")
        if self.n < 64:
            raise ValueError("grid requires at least 64 nodes")

    @property
    def h(self) -> float:
        return (self.r_max - self.r_min) / (self.n - 1)

    def nodes(self) -> np.ndarray:
        return self.r_min + self.h * np.arange(self.n)

    @classmethod
    def from_wall(cls, wall: float, n: int) -> "RadialGrid":
        """Grid whose lower wall is the origin and upper wall is ``wall``:
        h = wall/(n+1), nodes h..n*h."""
        h = wall / (n + 1)
        return cls(h, n * h, n)


@dataclass(frozen=True)
class RadialProblem:
    """One sector's radial problem: -(hbar^2/2m) u'' + V(r) u = E u."""

    sector: int
    nu: float
    potential: Callable[[np.ndarray], np.ndarray]
    mass: float
    hbar: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_params(cls, params: ModelParams, sector: int) -> "RadialProblem":
        pot, meta = radial_effective_potential(params, sector)
        return cls(
            sector=sector,
            nu=float(meta["nu"]),
            potential=pot,
            mass=float(params.m),
            hbar=float(params.hbar),
            meta=meta,
        )


class TridiagonalSystem(NamedTuple):
    """Symmetric tridiagonal discretization of a radial problem."""

    diag: np.ndarray
    offdiag: np.ndarray
    grid: RadialGrid
    problem: RadialProblem


def discretize(problem: RadialProblem, grid: RadialGrid) -> TridiagonalSystem:
    """Three-point discretization: off-diagonal -hbar^2/(2 m h^2),
    diagonal hbar^2/(m h^2) + V(r_i)."""
    r = grid.nodes()
    v = np.asarray(problem.potential(r), dtype=float)
    if v.shape != r.shape:
        raise ValueError("potential must return one sample per node")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite potential sample on the grid")
    t = problem.hbar ** 2 / (2.0 * problem.mass * grid.h ** 2)
    diag = 2.0 * t + v
    offdiag = np.full(grid.n - 1, -t)
    return TridiagonalSystem(diag=diag, offdiag=offdiag, grid=grid, problem=problem)


@dataclass
class EigenResult:
    """Sorted eigenvalues with optional trapezoid-normalized eigenvectors.

    ``residuals`` are the finite-difference residual norms ||H v - E v|| of
    the returned pairs.  ``error_bars`` and ``observables`` are filled by
    :func:`converge` (extrapolation deltas); ``info`` carries ladder
    diagnostics (scheme, rung history, wall radius).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray
    error_bars: np.ndarray | None = None
    observables: dict | None = None
    info: dict | None = None


def eigen_lowest(system: TridiagonalSystem, k: int, want_vectors: bool = True) -> EigenResult:
    """k smallest eigenpairs by Sturm bisection + inverse iteration.

    Deterministic for fixed inputs.  Requires k <= n/4 (the discrete spectrum
    only approximates the continuum problem in its lowest quarter).
    """
    n = system.grid.n
    if not 1 <= k <= n // 4:
        raise ValueError(f"k must satisfy 1 <= k <= n/4 = {n // 4}")
    if want_vectors:
        w, v = eigh_tridiagonal(
            system.diag, system.offdiag, select="i", select_range=(0, k - 1)
        )
    else:
        w = eigh_tridiagonal(
            system.diag, system.offdiag, select="i", select_range=(0, k - 1),
            eigvals_only=True,
        )
        v = None
    w = np.asarray(w, dtype=float)
    h = system.grid.h
    residuals = np.zeros_like(w)
    if v is not None:
        v = v / math.sqrt(h)  # LAPACK unit l2 norm -> unit trapezoid norm
        for j in range(k):
            u = v[:, j]
            hu = system.diag * u
            hu[:-1] += system.offdiag * u[1:]
            hu[1:] += system.offdiag * u[:-1]
            residuals[j] = math.sqrt(h) * np.linalg.norm(hu - w[j] * u)
    return EigenResult(eigenvalues=w, eigenvectors=v, residuals=residuals)


def expectation(f, state: np.ndarray, grid: RadialGrid) -> float:
    """Trapezoidal quadrature of int |u|^2 f(r) dr for a grid eigenvector.

    ``f`` is a callable on r or an array of node samples.  The walls carry
    u = 0, so the trapezoid rule is h * sum(u_i^2 f(r_i)).
    """
    u = np.asarray(state, dtype=float)
    if u.shape != (grid.n,):
        raise ValueError("state must be a node-value vector for this grid")
    samples = np.asarray(f(grid.nodes()) if callable(f) else f, dtype=float)
    if samples.shape != (grid.n,):
        raise ValueError("observable samples must match the grid")
    return float(grid.h * np.sum(u * u * samples))


# ---------------------------------------------------------------------------
# Convergence ladder
# ---------------------------------------------------------------------------


def default_wall_radius(problem: RadialProblem, k: int, omega: float,
                        omega_tilde: float, safety: float = 8.0) -> float:
    """Adaptive wall: safety * max over the trap length sqrt(hbar/(m w~)) and
    the cyclotron-orbit radius sqrt(2 hbar (|nu|+k)/(m Omega + m w~)).

    The m*omega_tilde term guards the K -> 0 and Omega -> 0 limits (the
    denominator scale is otherwise unspecified); (|nu|+k) is floored at 1.
    """
    hbar = problem.hbar
    mass = problem.mass
    if omega_tilde <= 0.0:
        raise ValueError("wall radius requires omega_tilde > 0 (K and Omega both zero?)")
    trap = math.sqrt(hbar / (mass * omega_tilde))
    orbit = math.sqrt(
        2.0 * hbar * max(1.0, abs(problem.nu) + k) / (mass * omega + mass * omega_tilde)
    )
    return safety * max(trap, orbit)


def _select_scheme(nu_abs: float) -> tuple[str, list[float], int]:
    """Returns (scheme, powers, window) for the extrapolation fit."""
    if nu_abs < 0.01:
        return "log", [], 7
    near_int = abs(nu_abs - round(nu_abs)) < 1e-9
    if near_int and round(nu_abs) == 1:
        return "log2", [], 6
    if near_int and round(nu_abs) >= 2:
        return "even", [2.0, 4.0], 4
    cands = sorted([2 * nu_abs, 2 * nu_abs + 1, 2.0, 2 * nu_abs + 2, 4.0])
    powers: list[float] = []
    for p in cands:
        if p >= 4.5:
            continue
        if powers and p - powers[-1] < 0.05:
            continue
        powers.append(p)
    return "power", powers, len(powers) + 2


_LOG2_SCAN = np.linspace(-3.0, 8.0, 221)


def _fit_series(scheme: str, powers: Sequence[float], hs: np.ndarray, ys: np.ndarray) -> float:
    """Least-squares extrapolation of one rung series to h = 0."""
    if scheme == "log":
        theta = 1.0 / (np.log(1.0 / hs) + C_BOUNDARY)
        cols = [np.ones_like(hs), theta, theta ** 2, theta ** 3, hs ** 2]
        a = np.column_stack(cols)
        coef, *_ = np.linalg.lstsq(a, ys, rcond=None)
        return float(coef[0])
    if scheme == "log2":
        logs = np.log(1.0 / hs)
        best = None
        for s in _LOG2_SCAN:
            cols = [np.ones_like(hs), hs ** 2 * (logs + s), hs ** 2, hs ** 4]
            a = np.column_stack(cols)
            coef, res, *_ = np.linalg.lstsq(a, ys, rcond=None)
            resid = float(res[0]) if len(res) else float(np.sum((a @ coef - ys) ** 2))
            if best is None or resid < best[0]:
                best = (resid, float(coef[0]))
        return best[1]
    cols = [np.ones_like(hs)] + [hs ** p for p in powers]
    a = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(a, ys, rcond=None)
    return float(coef[0])


def converge_problem(
    problem: RadialProblem,
    k: int,
    tol: float,
    *,
    wall: float,
    n0: int = 511,
    max_rungs: int = 9,
    observables: Mapping[str, Callable] | None = None,
    want_vectors: bool = False,
) -> EigenResult:
    """Grid-refinement ladder + Richardson-style extrapolation for a problem.

    Runs discretize/eigen_lowest on n_j = (n0+1) 2^j - 1 nodes (exact grid
    halving, fixed wall), extrapolates each eigenvalue (and each ground-state
    observable) with the sector's basis, and stops when successive
    extrapolations differ by less than ``tol`` componentwise.  The returned
    eigenvalues are the extrapolated ones; eigenvectors/residuals belong to
    the finest solved rung.  Raises ConvergenceError when the ladder is
    exhausted, with per-component deltas in the diagnostics.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    observables = dict(observables or {})
    scheme, powers, window = _select_scheme(abs(problem.nu))
    need_vectors = bool(observables) or want_vectors

    hs: list[float] = []
    series: list[np.ndarray] = []  # per rung: k eigenvalues + observables
    history: list[dict] = []
    fits: list[np.ndarray] = []
    last: EigenResult | None = None
    deltas: np.ndarray | None = None

    for j in range(max_rungs):
        n = (n0 + 1) * (2 ** j) - 1
        grid = RadialGrid.from_wall(wall, n)
        system = discretize(problem, grid)
        last = eigen_lowest(system, k, want_vectors=need_vectors)
        values = list(last.eigenvalues)
        for name, fobs in observables.items():
            values.append(expectation(fobs, last.eigenvectors[:, 0], grid))
        hs.append(grid.h)
        series.append(np.array(values))
        history.append({"n": n, "h": grid.h, "values": np.array(values)})
        if len(series) < window:
            continue
        hw = np.array(hs[-window:])
        data = np.vstack(series[-window:])
        fit = np.array(
            [_fit_series(scheme, powers, hw, data[:, i]) for i in range(data.shape[1])]
        )
        fits.append(fit)
        if len(fits) >= 2:
            deltas = np.abs(fits[-1] - fits[-2])
            if np.all(deltas < tol):
                if last.eigenvectors is None:
                    # ladder ran eigenvalue-only; recover vectors + honest
                    # residuals on the finest grid for the returned result
                    last = eigen_lowest(system, k, want_vectors=True)
                obs_out = {}
                for idx, name in enumerate(observables):
                    obs_out[name] = (float(fit[k + idx]), float(deltas[k + idx]))
                return EigenResult(
                    eigenvalues=fit[:k],
                    eigenvectors=last.eigenvectors,
                    residuals=last.residuals,
                    error_bars=deltas[:k],
                    observables=obs_out or None,
                    info={
                        "scheme": scheme,
                        "powers": list(powers),
                        "window": window,
                        "wall": wall,
                        "nu": problem.nu,
                        "sector": problem.sector,
                        "tol": tol,
                        "rungs": history,
                        "finest_n": n,
                        "finest_grid": grid,
                    },
                )
    raise ConvergenceError(
        f"refinement ladder exhausted for sector {problem.sector} "
        f"(nu = {problem.nu:g}, scheme = {scheme}) without reaching tol = {tol:g}",
        diagnostics={
            "sector": problem.sector,
            "nu": problem.nu,
            "scheme": scheme,
            "last_deltas": None if deltas is None else deltas.tolist(),
            "rungs": [bar["n"] for bar in history],
            "tol": tol,
        },
    )


def converge(
    params: ModelParams,
    sector: int,
    k: int,
    tol: float,
    *,
    safety: float = 8.0,
    n0: int = 511,
    max_rungs: int = 9,
    observables: Mapping[str, Callable] | None = None,
    want_vectors: bool = False,
) -> EigenResult:
    """Converged low-lying eigenvalues for one sector of the dipole model."""
    problem = RadialProblem.from_params(params, sector)
    wall = default_wall_radius(
        problem, k, omega=float(params.omega), omega_tilde=params.omega_tilde,
        safety=safety,
    )
    return converge_problem(
        problem, k, tol, wall=wall, n0=n0, max_rungs=max_rungs,
        observables=observables, want_vectors=want_vectors,
    )


def convergence_slope(result: EigenResult, state: int = 0) -> float:
    """Observed log-log slope of the ladder error for one state.

    Uses the extrapolated value as reference; rungs within solver noise of
    the limit are dropped.
    """
    if not result.info:
        raise ValueError("result carries no ladder history")
    target = result.eigenvalues[state]
    hs, errs = [], []
    for rung in result.info["rungs"]:
        err = abs(rung["values"][state] - target)
        if err > 1e-12 * max(1.0, abs(target)):
            hs.append(rung["h"])
            errs.append(err)
    if len(hs) < 2:
        raise ValueError("not enough rungs above noise to measure a slope")
    slope, _ = np.polyfit(np.log(hs), np.log(errs), 1)
    return float(slope)
