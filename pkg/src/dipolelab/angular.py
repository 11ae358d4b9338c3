"""Angular-momentum ladders, guiding-center numerics, phases, and duality.

The headline outputs of the package live here:

* the canonical ladder J = n hbar (single-valued planar states),
* the reduced-model ladder J_r = (n + 1/2) hbar + hbar*alpha, produced by
  feeding the constrained observable and the Dirac bracket into
  ``quantize_quadratic`` — never hand-coded,
* the zero-density (rho = 0) kinetic ladder J_K = n hbar - hbar*alpha,
  obtained from the operator identity J_K = J - (mu/c^2) x.E, whose
  right-hand constant the algebra engine evaluates itself,
* a numeric bridge between the two descriptions built from the
  guiding-center coordinate (see below),
* the topological phases Phi_AC and the dual model's Phi_AB,
* an exact + numeric electromagnetic-duality comparison.

Guiding-center check
--------------------
The constrained reduction freezes the kinetic motion to its lowest level;
what survives is the guiding-center coordinate, the combination that
commutes with both kinetic momenta:

    R_1 = x_1 + Pi_2/(m Omega),   R_2 = x_2 - Pi_1/(m Omega),

with {R_i, Pi_j} = 0 and {R_1, R_2} equal to the Dirac bracket of
(x_1, x_2) — both facts are verified exactly by the algebra engine in the
test suite.  (With the opposite relative sign the combination is the
cyclotron coordinate, which does not commute with Pi.)

The check evaluates hbar*alpha + (m Omega/2) <R^2> on lowest-band states.
The engine-proved identity

    (m Omega/2) R^2 = Lambda + (m Omega/2) x^2 + Pi^2/(2 m Omega),

with Lambda = x_1 Pi_2 - x_2 Pi_1 = J - hbar*alpha - (m Omega/2) x^2,
reduces that 2D expectation to radial quadratures: on a state of canonical
angular momentum (k + alpha) hbar the result is

    measured = hbar*alpha + hbar*k + <H_kin>/Omega .

Such states carry an integer kinetic index k, so their radial problem is
the sector-k problem with the flux gauged away (lam = 0); <H_kin> is the
converged ground energy minus the trap and divergence-coupling pieces.
Single-valued sector-m states would instead give (m + 1/2) hbar with no
alpha dependence at all — the fractional offset is a property of the
reduced model's state space, which is exactly what this check probes.
The rung with k = 0 runs at the documented nu = 0 accuracy floor (about
1e-4 absolute), far inside the 1e-3 contract of the K -> 0 limit.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Sequence

from . import radial
from .model import (
    ZeroDensityRegimeError,
    DualChargedParams,
    ExactScalar,
    ModelParams,
    build_constraints,
    build_dual_charged_model,
    electric_field,
    kinetic_momenta,
    twin_radial_potential,
)
from .parsing import format_expr, parse_expr
from .phase_space import (
    OscillatorSpectrum,
    PhaseSpaceExpr,
    build_constraint_system,
    dirac_bracket,
    quantize_quadratic,
)

__all__ = [
    "LadderRule",
    "AngularReport",
    "DualityReport",
    "reduced_j_observable",
    "reduced_j_spectrum",
    "kinetic_j_spectrum",
    "canonical_j_rule",
    "kinetic_j_shift",
    "guiding_center_coordinates",
    "guiding_center_check",
    "kinetic_j_numeric_check",
    "topological_phases",
    "duality_report",
    "angular_report",
    "report_json_dict",
]


def _exact_zero(value: ExactScalar | None) -> bool:
    """True only for an exact numeric zero (a symbolic value is generic)."""
    return value is not None and value.is_zero()


class LadderRule(NamedTuple):
    """Uniform ladder level(n) = offset + n * step (exact expressions)."""

    offset: PhaseSpaceExpr
    step: PhaseSpaceExpr

    def level(self, n: int) -> PhaseSpaceExpr:
        return self.offset + self.step * PhaseSpaceExpr.number(n)

    def rule_text(self, var: str = "n") -> str:
        body = f"{var}*{format_expr(self.step)}"
        if self.offset.is_zero():
            return body
        tail = format_expr(self.offset)
        if tail.startswith("-"):
            return f"{body} - {tail[1:]}"
        return f"{body} + {tail}"


def _subs(expr: PhaseSpaceExpr, params: ModelParams) -> PhaseSpaceExpr:
    return expr.substitute_params(params.exact_subs())


def _hbar_expr(params: ModelParams) -> PhaseSpaceExpr:
    return _subs(parse_expr("hbar"), params)


def _scalar_from_expr(expr: PhaseSpaceExpr) -> ExactScalar:
    """Exact scalar value of a parameter-constant expression (pi allowed)."""
    total = ExactScalar(Fraction(0), 0)
    for term in expr.terms():
        if term.xexp != (0, 0) or term.pexp != (0, 0) or term.rpow:
            raise ValueError("expression is not parameter-constant")
        pi_pow = 0
        for name, exp in term.params:
            if name != "pi" or exp != int(exp):
                raise ValueError("expression has free parameters beyond pi")
            pi_pow = int(exp)
        total = total + ExactScalar(term.coeff, pi_pow)
    return total


def reduced_j_observable(params: ModelParams) -> PhaseSpaceExpr:
    """The constrained angular momentum (mu/2c^2 eps0)(lam/pi + rho r^2)."""
    expr = parse_expr(
        "mu*lam/(2*c^2*eps0*pi) + mu*rho*x1^2/(2*c^2*eps0)"
        " + mu*rho*x2^2/(2*c^2*eps0)"
    )
    return _subs(expr, params)


def reduced_j_spectrum(params: ModelParams) -> OscillatorSpectrum:
    """Quantize the reduced angular momentum with the Dirac bracket.

    The spectrum (n + 1/2)*hbar + mu*lam/(2 pi c^2 eps0) comes out of
    ``quantize_quadratic`` applied to the reduced observable and the
    second-class bracket — it is computed, not transcribed.
    """
    if _exact_zero(params.rho):
        raise ZeroDensityRegimeError(
            "the reduced model has no dynamical degrees of freedom at rho = 0;"
            " use kinetic_j_spectrum for the zero-density regime"
        )
    system = build_constraint_system(build_constraints(params))

    def bracket(f: PhaseSpaceExpr, g: PhaseSpaceExpr) -> PhaseSpaceExpr:
        return dirac_bracket(f, g, system)

    pair = (PhaseSpaceExpr.var("x1"), PhaseSpaceExpr.var("x2"))
    return quantize_quadratic(
        reduced_j_observable(params), pair, bracket, hbar=_hbar_expr(params)
    )


def kinetic_j_shift(params: ModelParams) -> PhaseSpaceExpr:
    """The constant (mu/c^2) x.E^AC separating canonical from kinetic J.

    The engine multiplies out the dipole-field coupling and must find a
    parameter constant; anything else would mean the operator identity
    J_K = J - (mu/c^2) x.E failed.
    """
    e1, e2 = electric_field(params, which="AC")
    x1 = PhaseSpaceExpr.var("x1")
    x2 = PhaseSpaceExpr.var("x2")
    coupling = parse_expr("mu/c^2")
    shift = _subs(coupling, params) * (x1 * e1 + x2 * e2)
    if not shift.is_param_constant():
        raise ArithmeticError("x.E^AC did not reduce to a parameter constant")
    return shift


def kinetic_j_spectrum(params: ModelParams) -> LadderRule:
    """Kinetic angular-momentum ladder n*hbar - hbar*alpha for rho = 0."""
    if params.rho is None or not params.rho.is_zero():
        raise ValueError(
            "kinetic_j_spectrum applies to the zero-density (rho = 0) regime;"
            " for rho > 0 use reduced_j_spectrum"
        )
    return LadderRule(offset=-kinetic_j_shift(params), step=_hbar_expr(params))


def canonical_j_rule(params: ModelParams) -> LadderRule:
    """Canonical angular momentum of single-valued states: n*hbar."""
    return LadderRule(offset=PhaseSpaceExpr.zero(), step=_hbar_expr(params))


def guiding_center_coordinates(params: ModelParams) -> tuple[PhaseSpaceExpr, PhaseSpaceExpr]:
    """R_i = x_i + eps_ij Pi_j/(m Omega); commutes with both Pi_i."""
    params.require_numeric("rho")
    if params.rho.is_zero():
        raise ZeroDensityRegimeError("guiding center requires rho > 0")
    pi1, pi2 = kinetic_momenta(params)
    inv = (params.m * params.omega) ** -1
    scale = _subs(inv.to_expr(), params)
    r1 = PhaseSpaceExpr.var("x1") + scale * pi2
    r2 = PhaseSpaceExpr.var("x2") - scale * pi1
    return r1, r2


def guiding_center_check(
    params: ModelParams,
    sectors: Iterable[int],
    k_ladder: Sequence,
    *,
    tol: float = 1e-8,
) -> list[dict]:
    """Measure hbar*alpha + (m Omega/2) <R^2> on lowest-band states.

    One row per (sector, K): sectors are the reduced-ladder rungs m >= 1
    (rung index k = m - 1); ``k_ladder`` lists trap strengths K, ordered as
    supplied.  Each row reports the measured value, its deviation from
    (k + 1/2 + alpha) hbar, the convergence tolerance used, and a
    ``band_mixing`` flag raised when the gap to the next band drops under
    10x the trap scale hbar*sqrt(K/m) (reported, never silently dropped).
    """
    params.require_numeric("rho", "K", "lam")
    if params.rho.is_zero():
        raise ZeroDensityRegimeError(
            "the guiding-center check requires rho > 0;"
            " use kinetic_j_spectrum for the zero-density regime"
        )
    sectors = list(sectors)
    if not sectors:
        raise ValueError("no sectors supplied")
    if not k_ladder:
        raise ValueError("empty K ladder")
    for m_sector in sectors:
        if m_sector < 1:
            raise ValueError(
                f"sector {m_sector} has no lowest-band state; the lowest band"
                " spans the rungs m >= 1"
            )
    hbar = float(params.hbar)
    mass = float(params.m)
    alpha = float(params.alpha)
    rows: list[dict] = []
    for m_sector in sectors:
        k_index = m_sector - 1
        for k_value in k_ladder:
            here = dataclasses.replace(params, K=k_value, lam=0)
            k_float = float(here.K)
            if k_float <= 0:
                raise ValueError("K ladder values must be positive")
            omega = float(here.omega)
            eff_tol = max(tol, 5e-4) if k_index == 0 else tol
            result = radial.converge(
                here, k_index, 2, eff_tol, observables={"r2": lambda r: r * r}
            )
            e0, e1 = result.eigenvalues[:2]
            r2_val, _ = result.observables["r2"]
            kin = e0 - 0.5 * k_float * r2_val - float(here.divergence_constant)
            measured = hbar * alpha + hbar * k_index + kin / omega
            target = hbar * (k_index + 0.5) + hbar * alpha
            gap = e1 - e0
            trap_scale = hbar * math.sqrt(k_float / mass)
            rows.append(
                {
                    "sector": m_sector,
                    "K": k_float,
                    "t": k_float / (mass * omega ** 2),
                    "measured": measured,
                    "deviation": abs(measured - target),
                    "band_mixing": bool(gap < 10.0 * trap_scale),
                    "tol": eff_tol,
                }
            )
    return rows


def kinetic_j_numeric_check(
    params: ModelParams, sectors: Iterable[int], *, n_nodes: int = 4095
) -> list[dict]:
    """<J_K> on sector-m eigenstates of the rho = 0 model vs m*hbar - hbar*alpha.

    On a single-valued sector state the canonical part is sharp, so the
    numeric content is the quadrature norm multiplying the engine constant;
    agreement is at quadrature accuracy on a single grid (no extrapolation
    ladder is involved, and none is needed).
    """
    if params.rho is None or not params.rho.is_zero():
        raise ValueError("kinetic_j_numeric_check applies to the rho = 0 regime")
    params.require_numeric("K", "lam")
    if float(params.K) <= 0:
        raise ValueError("a confining trap (K > 0) is needed for bound sectors")
    hbar = float(params.hbar)
    shift = _scalar_from_expr(kinetic_j_shift(params))
    rows = []
    for m_sector in sectors:
        problem = radial.RadialProblem.from_params(params, m_sector)
        wall = radial.default_wall_radius(
            problem, 1, omega=float(params.omega), omega_tilde=params.omega_tilde
        )
        grid = radial.RadialGrid.from_wall(wall, n_nodes)
        result = radial.eigen_lowest(radial.discretize(problem, grid), 1)
        norm = radial.expectation(lambda r: r * 0 + 1.0, result.eigenvectors[:, 0], grid)
        measured = hbar * m_sector - float(shift) * norm
        expected = hbar * m_sector - float(shift)
        rows.append(
            {
                "sector": m_sector,
                "measured": measured,
                "expected": expected,
                "deviation": abs(measured - expected),
                "n_nodes": n_nodes,
            }
        )
    return rows


def topological_phases(params: ModelParams) -> dict:
    """Phi_AC = mu*lam/(hbar c^2 eps0) and the dual twin's Phi_AB = q*Phi/hbar."""
    c2e = (params.c ** 2) * params.eps0
    phi_ac = params.mu * params.lam / (params.hbar * c2e)
    dual = build_dual_charged_model(params)
    phi_ab = dual.q_times_Phi / params.hbar
    return {"phi_ac": phi_ac, "phi_ab_equiv": phi_ab}


@dataclass
class DualityReport:
    """Exact dipole-vs-charged-twin comparison plus optional numeric rows."""

    params: ModelParams
    dual: DualChargedParams
    entries: list[dict]
    numeric: list[dict]

    @property
    def all_equal(self) -> bool:
        return all(entry["equal"] for entry in self.entries)


def duality_report(
    params: ModelParams,
    *,
    numeric_sectors: Sequence[int] = (),
    levels: int = 4,
    tol: float = 1e-6,
) -> DualityReport:
    """Tabulate dipole-model quantities against the charged twin under
    qB = mu*rho/(c^2 eps0), qPhi = mu*lam/(c^2 eps0).

    Exact rows: energy level spacing, fractional angular-momentum offset,
    topological phase.  Each pair must agree identically — a mismatch is an
    arithmetic failure, not a report entry.  With ``numeric_sectors`` the
    twin problem is also solved numerically (its own potential-building code
    path) and per-sector spectra are compared; the dipole side is reported
    in the kinetic convention (divergence constant subtracted) since the
    twin has no dipole-divergence coupling.
    """
    dual = build_dual_charged_model(params)
    hbar = params.hbar
    mass = params.m
    two_pi = ExactScalar(Fraction(2), 1)

    spacing_dipole = hbar * params.omega
    spacing_twin = hbar * dual.q_times_B / mass
    frac_dipole = params.hbar * params.alpha
    frac_twin = dual.q_times_Phi / two_pi
    phases = topological_phases(params)

    entries = []
    for name, lhs, rhs in (
        ("level_spacing", spacing_dipole, spacing_twin),
        ("fractional_j_offset", frac_dipole, frac_twin),
        ("phase", phases["phi_ac"], phases["phi_ab_equiv"]),
    ):
        if lhs != rhs:
            raise ArithmeticError(f"duality map failed for {name}: {lhs} vs {rhs}")
        entries.append(
            {"quantity": name, "dipole": str(lhs), "twin": str(rhs), "equal": True}
        )

    numeric: list[dict] = []
    if numeric_sectors:
        params.require_numeric()
        div = float(params.divergence_constant)
        for sector in numeric_sectors:
            dipole_res = radial.converge(params, sector, levels, tol)
            dipole = dipole_res.eigenvalues - div
            pot, meta = twin_radial_potential(dual, sector, hbar=params.hbar)
            problem = radial.RadialProblem(
                sector=sector,
                nu=float(meta["nu"]),
                potential=pot,
                mass=float(dual.m),
                hbar=float(params.hbar),
                meta=meta,
            )
            w_c = float(meta["cyclotron"])
            w_tilde = math.sqrt(w_c * w_c / 4.0 + float(dual.K) / float(dual.m))
            wall = radial.default_wall_radius(
                problem, levels, omega=w_c, omega_tilde=w_tilde,
            )
            twin_res = radial.converge_problem(problem, levels, tol, wall=wall)
            gap = float(max(abs(dipole - twin_res.eigenvalues)))
            numeric.append(
                {
                    "sector": sector,
                    "dipole": [float(v) for v in dipole],
                    "twin": [float(v) for v in twin_res.eigenvalues],
                    "max_gap": gap,
                    "tol": tol,
                }
            )
    return DualityReport(params=params, dual=dual, entries=entries, numeric=numeric)


@dataclass
class AngularReport:
    """Everything the angular analysis produces, exact rules plus numerics."""

    params: ModelParams
    alpha: ExactScalar
    canonical_j: LadderRule
    reduced_j: OscillatorSpectrum | None
    kinetic_j: LadderRule
    numeric_check: list[dict]
    phases: dict


def angular_report(
    params: ModelParams,
    *,
    sectors: Iterable[int] = (),
    k_ladder: Sequence = (),
    tol: float = 1e-8,
) -> AngularReport:
    """Assemble the full angular-momentum report for one parameter point.

    The reduced ladder needs rho > 0 (it is None in the zero-density
    regime); the kinetic ladder is always reported — for rho > 0 it refers
    to the zero-density model with the same flux.  The numeric check runs
    when both sectors and a K ladder are supplied.
    """
    reduced = None if _exact_zero(params.rho) else reduced_j_spectrum(params)
    kinetic = kinetic_j_spectrum(
        params if _exact_zero(params.rho) else dataclasses.replace(params, rho=0)
    )
    rows: list[dict] = []
    sectors = list(sectors)
    if sectors and k_ladder:
        rows = guiding_center_check(params, sectors, k_ladder, tol=tol)
    return AngularReport(
        params=params,
        alpha=params.alpha,
        canonical_j=canonical_j_rule(params),
        reduced_j=reduced,
        kinetic_j=kinetic,
        numeric_check=rows,
        phases=topological_phases(params),
    )


def _rule_dict(rule: LadderRule) -> dict:
    out = {
        "rule": rule.rule_text(),
        "offset": format_expr(rule.offset),
        "step": format_expr(rule.step),
    }
    try:
        out["offset_value"] = float(_scalar_from_expr(rule.offset))
        out["step_value"] = float(_scalar_from_expr(rule.step))
    except ValueError:
        pass
    return out


def _spectrum_dict(spec: OscillatorSpectrum, levels: int = 4) -> dict:
    step = spec.hbar_eff * spec.freq
    out = {
        "rule": f"(n + 1/2)*{format_expr(step)}",
        "offset": format_expr(spec.offset),
        "step": format_expr(step),
    }
    if not spec.offset.is_zero():
        tail = format_expr(spec.offset)
        if tail.startswith("-"):
            out["rule"] += f" - {tail[1:]}"
        else:
            out["rule"] += f" + {tail}"
    try:
        offset = _scalar_from_expr(spec.offset)
        step_val = _scalar_from_expr(step)
        out["offset_value"] = float(offset)
        out["step_value"] = float(step_val)
        out["levels"] = [
            float(offset) + (n + 0.5) * float(step_val) for n in range(levels)
        ]
    except ValueError:
        pass
    return out


def report_json_dict(report: AngularReport) -> dict:
    """JSON payload with the frozen field names.

    Top-level keys are a compatibility contract: alpha, canonical_j,
    reduced_j, kinetic_j, numeric_check, phases.
    """
    phases = report.phases
    return {
        "alpha": {"exact": str(report.alpha), "value": float(report.alpha)},
        "canonical_j": _rule_dict(report.canonical_j),
        "reduced_j": None
        if report.reduced_j is None
        else _spectrum_dict(report.reduced_j),
        "kinetic_j": _rule_dict(report.kinetic_j),
        "numeric_check": report.numeric_check,
        "phases": {
            "phi_ac": {
                "exact": str(phases["phi_ac"]),
                "value": float(phases["phi_ac"]),
                "over_2pi": float(phases["phi_ac"] / ExactScalar(Fraction(2), 1)),
            },
            "phi_ab_equiv": {
                "exact": str(phases["phi_ab_equiv"]),
                "value": float(phases["phi_ab_equiv"]),
                "over_2pi": float(
                    phases["phi_ab_equiv"] / ExactScalar(Fraction(2), 1)
                ),
            },
        },
    }
