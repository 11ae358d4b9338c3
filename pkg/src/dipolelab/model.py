"""Physical parameters, fields, Hamiltonians, constraints, and the charged twin.

Parameter values are kept exact: every numeric field of :class:`ModelParams`
is a rational multiple of an integer power of pi (``ExactScalar``), so
derived quantities like Omega = mu*rho/(m c^2 eps0) and
alpha = mu*lam/(2 pi hbar c^2 eps0) stay exact whenever possible (e.g.
lam = pi/2 gives alpha = 1/4 exactly).  Fields left as ``None`` stay symbolic
in every expression built here.  Floating point appears only behind the
numeric accessors used by the radial solver.

Default numeric mode is natural units hbar = m = c = eps0 = 1; symbolic mode
keeps all constants visible so duality statements remain dimensionful.
The dipole orientation is fixed along +z; model the opposite orientation by
flipping the sign of mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .parsing import format_expr, parse_expr
from .phase_space import PhaseSpaceExpr

__all__ = [
    "ExactScalar",
    "ModelParams",
    "DualChargedParams",
    "ZeroDensityRegimeError",
    "electric_field",
    "effective_vector_potential",
    "build_hamiltonian",
    "kinetic_momenta",
    "build_constraints",
    "radial_effective_potential",
    "build_dual_charged_model",
    "twin_radial_potential",
    "load_params",
    "parse_params_text",
    "parse_scalar",
]


class ZeroDensityRegimeError(ValueError):
    """Raised when an operation requires the opposite rho regime."""


class ExactScalar:
    """A scalar of the form q * pi^n with q rational and n an integer.

    This is exactly the value class needed to keep the model's derived
    quantities exact: alpha is rational when lam is a rational multiple of
    pi, so ladder offsets and phases stay decidable equalities.
    """

    __slots__ = ("q", "pi_pow")

    def __init__(self, q, pi_pow: int = 0):
        self.q = Fraction(q)
        self.pi_pow = int(pi_pow) if self.q else 0

    @classmethod
    def from_value(cls, value):
        if value is None:
            return None
        if isinstance(value, ExactScalar):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value)
        if isinstance(value, float):
            return cls(Fraction(repr(value)))
        if isinstance(value, str):
            return parse_scalar(value)
        raise TypeError(f"cannot interpret {value!r} as an exact scalar")

    # -- arithmetic ----------------------------------------------------------

    def __mul__(self, other):
        other = ExactScalar.from_value(other)
        return ExactScalar(self.q * other.q, self.pi_pow + other.pi_pow)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = ExactScalar.from_value(other)
        if other.q == 0:
            raise ZeroDivisionError("division by exact zero")
        return ExactScalar(self.q / other.q, self.pi_pow - other.pi_pow)

    def __pow__(self, n: int):
        if self.q == 0 and n < 0:
            raise ZeroDivisionError("zero to a negative power")
        return ExactScalar(self.q ** n, self.pi_pow * n)

    def __neg__(self):
        return ExactScalar(-self.q, self.pi_pow)

    def __add__(self, other):
        other = ExactScalar.from_value(other)
        if self.q == 0:
            return other
        if other.q == 0:
            return self
        if self.pi_pow != other.pi_pow:
            raise ValueError(
                "sum of exact scalars with different pi powers is not exact; "
                "use float() values instead"
            )
        return ExactScalar(self.q + other.q, self.pi_pow)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-ExactScalar.from_value(other))

    def __rsub__(self, other):
        return ExactScalar.from_value(other) + (-self)

    def __float__(self):
        return float(self.q) * math.pi ** self.pi_pow

    def __eq__(self, other):
        try:
            other = ExactScalar.from_value(other)
        except TypeError:
            return NotImplemented
        return self.q == other.q and self.pi_pow == other.pi_pow

    def __hash__(self):
        return hash((self.q, self.pi_pow))

    def is_zero(self) -> bool:
        return self.q == 0

    def as_pair(self) -> tuple[Fraction, int]:
        return (self.q, self.pi_pow)

    def to_expr(self) -> PhaseSpaceExpr:
        if self.q == 0:
            return PhaseSpaceExpr.zero()
        if self.pi_pow == 0:
            return PhaseSpaceExpr.number(self.q)
        return PhaseSpaceExpr.number(self.q) * PhaseSpaceExpr.symbol("pi", self.pi_pow)

    def __str__(self):
        return format_expr(self.to_expr())

    def __repr__(self):
        return f"ExactScalar({self})"


def parse_scalar(text: str) -> ExactScalar:
    """Parse '0.25', '3/4', 'pi/2', '2*pi', '-pi' ... into an ExactScalar."""
    text = text.strip()
    try:
        return ExactScalar(Fraction(text))
    except ValueError:
        pass
    expr = parse_expr(text)
    if expr.is_zero():
        return ExactScalar(0)
    if not expr.is_monomial() or not expr.is_param_constant():
        raise ValueError(f"{text!r} is not a rational-times-pi-power scalar")
    term = expr.single_term()
    for name, _ in term.params:
        if name != "pi":
            raise ValueError(f"{text!r} uses the symbol {name!r}; only pi is allowed in values")
    pi_pow = dict(term.params).get("pi", Fraction(0))
    if pi_pow.denominator != 1:
        raise ValueError(f"{text!r} has a fractional pi power")
    return ExactScalar(term.coeff, int(pi_pow))


_PARAM_FIELDS = ("mu", "lam", "rho", "K", "hbar", "m", "c", "eps0")


@dataclass(frozen=True)
class ModelParams:
    """Model parameters; each field is an ExactScalar or None (= symbolic).

    Derived quantities (Omega, alpha, omega_tilde, nu) are recomputed on
    access, never stored.  Instances are immutable and safe to share.
    """

    mu: object = 1
    lam: object = 0
    rho: object = 0
    K: object = 0
    hbar: object = 1
    m: object = 1
    c: object = 1
    eps0: object = 1
    include_divergence_term: bool = True

    def __post_init__(self):
        for f in _PARAM_FIELDS:
            object.__setattr__(self, f, ExactScalar.from_value(getattr(self, f)))
        for f, lower_ok in (("mu", False), ("m", False), ("hbar", False), ("c", False),
                            ("eps0", False), ("rho", True), ("K", True)):
            val = getattr(self, f)
            if val is None:
                continue
            x = float(val)
            if x < 0 or (x == 0 and not lower_ok):
                raise ValueError(f"parameter {f} must be {'>= 0' if lower_ok else '> 0'}")

    @classmethod
    def symbolic(cls, include_divergence_term: bool = True, **overrides) -> "ModelParams":
        """All parameters left as symbols except explicit overrides."""
        values = {f: None for f in _PARAM_FIELDS}
        values.update(overrides)
        return cls(include_divergence_term=include_divergence_term, **values)

    # -- exact substitution maps ----------------------------------------------

    def exact_subs(self) -> dict:
        out = {}
        for f in _PARAM_FIELDS:
            val = getattr(self, f)
            if val is not None:
                out[f] = val.as_pair()
        return out

    def float_map(self) -> dict:
        out = {"pi": math.pi}
        for f in _PARAM_FIELDS:
            val = getattr(self, f)
            if val is not None:
                out[f] = float(val)
        return out

    def require_numeric(self, *names: str):
        missing = [f for f in (names or _PARAM_FIELDS) if getattr(self, f) is None]
        if missing:
            raise ValueError(f"numeric values required for parameters: {', '.join(missing)}")

    # -- derived quantities ----------------------------------------------------

    @property
    def omega(self) -> ExactScalar | None:
        """Cyclotron analog Omega = mu*rho/(m c^2 eps0); None when symbolic."""
        vals = [self.mu, self.rho, self.m, self.c, self.eps0]
        if any(v is None for v in vals):
            return None
        return self.mu * self.rho / (self.m * self.c ** 2 * self.eps0)

    @property
    def alpha(self) -> ExactScalar | None:
        """Flux fraction alpha = mu*lam/(2 pi hbar c^2 eps0); None when symbolic."""
        vals = [self.mu, self.lam, self.hbar, self.c, self.eps0]
        if any(v is None for v in vals):
            return None
        return self.mu * self.lam / (ExactScalar(2, 1) * self.hbar * self.c ** 2 * self.eps0)

    def omega_expr(self) -> PhaseSpaceExpr:
        return parse_expr("mu*rho/(m*c^2*eps0)").substitute_params(self.exact_subs())

    def alpha_expr(self) -> PhaseSpaceExpr:
        return parse_expr("mu*lam/(2*pi*hbar*c^2*eps0)").substitute_params(self.exact_subs())

    def nu(self, sector: int):
        """Effective angular index nu = sector - alpha; exact when possible."""
        a = self.alpha
        if a is None:
            raise ValueError("nu requires numeric parameter values")
        if a.pi_pow == 0:
            return ExactScalar(Fraction(sector) - a.q)
        return float(sector) - float(a)

    @property
    def omega_tilde_sq(self):
        """omega_tilde^2 = Omega^2/4 + K/m, exact when representable."""
        om = self.omega
        if om is None or self.K is None or self.m is None:
            return None
        try:
            return om ** 2 / ExactScalar(4) + self.K / self.m
        except ValueError:
            return float(om) ** 2 / 4.0 + float(self.K) / float(self.m)

    @property
    def omega_tilde(self) -> float:
        ts = self.omega_tilde_sq
        if ts is None:
            raise ValueError("omega_tilde requires numeric parameter values")
        return math.sqrt(float(ts))

    @property
    def divergence_constant(self) -> ExactScalar | None:
        """The constant mu*hbar*rho/(2 m c^2 eps0) = hbar*Omega/2, when included."""
        if not self.include_divergence_term:
            return ExactScalar(0)
        om = self.omega
        if om is None or self.hbar is None:
            return None
        return self.hbar * om / ExactScalar(2)

    def resolved(self) -> dict:
        """Canonical strings of all fields; used by provenance headers."""
        out = {}
        for f in _PARAM_FIELDS:
            val = getattr(self, f)
            out[f] = "symbolic" if val is None else str(val)
        out["include_divergence_term"] = "true" if self.include_divergence_term else "false"
        return out


def _psym(params: ModelParams, name: str, exp: int = 1) -> PhaseSpaceExpr:
    """Parameter as an expression: its exact value, or the bare symbol."""
    val = getattr(params, name)
    if val is None:
        return PhaseSpaceExpr.symbol(name, exp)
    return (val ** exp).to_expr()


# ---------------------------------------------------------------------------
# Fields, potentials, Hamiltonians
# ---------------------------------------------------------------------------

_E_AC = (parse_expr("lam*x1/(2*pi*eps0*r2)"), parse_expr("lam*x2/(2*pi*eps0*r2)"))
_E_ES = (parse_expr("rho*x1/(2*eps0)"), parse_expr("rho*x2/(2*eps0)"))


def electric_field(params: ModelParams, which: str = "both"):
    """The radial electric fields as exact expressions.

    'AC': the line-charge field lam*x_i/(2 pi eps0 r^2);
    'ES': the uniformly charged background rho*x_i/(2 eps0);
    'both': their sum.  Exact parameter values are substituted, symbols kept.
    """
    subs = params.exact_subs()
    if which == "AC":
        pair = _E_AC
    elif which == "ES":
        pair = _E_ES
    elif which == "both":
        pair = (_E_AC[0] + _E_ES[0], _E_AC[1] + _E_ES[1])
    else:
        raise ValueError("which must be 'AC', 'ES' or 'both'")
    return (pair[0].substitute_params(subs), pair[1].substitute_params(subs))


def effective_vector_potential(params: ModelParams):
    """A_i^eff = -(lam/(2 pi eps0 r^2) + rho/(2 eps0)) * eps_ij x_j.

    Component form of the cross product z_hat x E for the radial fields; the
    minimal-coupling combination is p_i - (mu/c^2) A_i^eff.
    """
    subs = params.exact_subs()
    a1 = parse_expr("-(lam/(2*pi*eps0*r2) + rho/(2*eps0))*x2")
    a2 = parse_expr("(lam/(2*pi*eps0*r2) + rho/(2*eps0))*x1")
    return (a1.substitute_params(subs), a2.substitute_params(subs))


def kinetic_momenta(params: ModelParams, which: str = "both"):
    """Pi_i = p_i + (mu/c^2) eps_ij E_j, with eps_12 = +1."""
    e1, e2 = electric_field(params, which)
    g = _psym(params, "mu") * _psym(params, "c", -2)
    pi1 = PhaseSpaceExpr.var("p1") + g * e2
    pi2 = PhaseSpaceExpr.var("p2") - g * e1
    return (pi1, pi2)


def build_hamiltonian(params: ModelParams, which: str = "both") -> PhaseSpaceExpr:
    """H = (1/2m)(p_i + (mu/c^2) eps_ij E_j)^2 + (K/2) x^2 [+ divergence constant].

    The constant mu*hbar*rho/(2 m c^2 eps0) is included iff
    params.include_divergence_term.
    """
    pi1, pi2 = kinetic_momenta(params, which)
    inv2m = PhaseSpaceExpr.number(Fraction(1, 2)) * _psym(params, "m", -1)
    h = inv2m * (pi1 * pi1 + pi2 * pi2)
    half_k = PhaseSpaceExpr.number(Fraction(1, 2)) * _psym(params, "K")
    h = h + half_k * (PhaseSpaceExpr.var("x1") ** 2 + PhaseSpaceExpr.var("x2") ** 2)
    if params.include_divergence_term:
        const = (
            PhaseSpaceExpr.number(Fraction(1, 2))
            * _psym(params, "mu")
            * _psym(params, "hbar")
            * _psym(params, "rho")
            * _psym(params, "m", -1)
            * _psym(params, "c", -2)
            * _psym(params, "eps0", -1)
        )
        h = h + const
    return h


def build_constraints(params: ModelParams):
    """phi_i = p_i + (mu/c^2) eps_ij E_j as primary constraints.

    Requires rho > 0 (or symbolic rho): at rho = 0 the constraint bracket
    matrix is singular and the reduced model has no dynamical degrees of
    freedom, which is reported as ZeroDensityRegimeError.
    """
    if params.rho is not None and params.rho.is_zero():
        raise ZeroDensityRegimeError(
            "rho = 0: constraint matrix is singular and the reduced model has "
            "no dynamical degrees of freedom; use the kinetic angular-momentum "
            "ladder for this regime"
        )
    return list(kinetic_momenta(params, "both"))


def radial_effective_potential(params: ModelParams, m_sector: int):
    """Effective radial potential of sector m for the ansatz e^{i m phi} u(r)/sqrt(r).

    With nu = m - alpha and omega_tilde^2 = Omega^2/4 + K/m:

        V_nu(r) = hbar^2 (nu^2 - 1/4)/(2 m r^2) + (m/2) omega_tilde^2 r^2
                  - hbar nu Omega / 2  [+ hbar Omega / 2 if divergence term on]

    Returns (V, meta) with V a vectorized callable rejecting r <= 0 and meta
    carrying nu, omega, omega_tilde, omega_tilde_sq and the constant shift.
    The polar-coordinate expansion behind this formula is locked by a
    symbolic regression test.
    """
    params.require_numeric()
    nu = params.nu(m_sector)
    nu_f = float(nu)
    hbar = float(params.hbar)
    mass = float(params.m)
    omega = float(params.omega)
    a_cf = hbar * hbar * (nu_f * nu_f - 0.25) / (2.0 * mass)
    b_hm = 0.5 * mass * float(params.omega_tilde_sq)
    shift = -0.5 * hbar * nu_f * omega
    if params.include_divergence_term:
        shift += 0.5 * hbar * omega

    def potential(r):
        arr = np.asarray(r, dtype=float)
        if np.any(arr <= 0):
            raise ValueError("the radial potential is defined for r > 0 only")
        vals = a_cf / (arr * arr) + b_hm * (arr * arr) + shift
        return vals if arr.shape else float(vals)

    meta = {
        "sector": int(m_sector),
        "nu": nu,
        "omega": params.omega,
        "omega_tilde": params.omega_tilde,
        "omega_tilde_sq": params.omega_tilde_sq,
        "constant": shift,
    }
    return potential, meta


# ---------------------------------------------------------------------------
# Dual charged-particle model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualChargedParams:
    """Charged particle in a uniform field B plus solenoid flux Phi.

    Built from the dipole model by q*B = mu*rho/(c^2 eps0) and
    q*Phi = mu*lam/(c^2 eps0); only the products q*B and q*Phi are physical,
    and the constructor picks the q = 1 gauge of that freedom.
    """

    q: object
    B: object
    Phi: object
    K: object
    m: object

    def __post_init__(self):
        for f in ("q", "B", "Phi", "K", "m"):
            object.__setattr__(self, f, ExactScalar.from_value(getattr(self, f)))
        qb = float(self.q * self.B)
        if qb < 0:
            raise ValueError("q*B must be non-negative under the duality map")

    @property
    def q_times_B(self) -> ExactScalar:
        return self.q * self.B

    @property
    def q_times_Phi(self) -> ExactScalar:
        return self.q * self.Phi

    def alpha(self, hbar=ExactScalar(1)) -> ExactScalar:
        """q*Phi/(2 pi hbar): the Aharonov-Bohm flux fraction."""
        return self.q_times_Phi / (ExactScalar(2, 1) * ExactScalar.from_value(hbar))

    def cyclotron(self) -> ExactScalar:
        return self.q_times_B / self.m


def build_dual_charged_model(params: ModelParams) -> DualChargedParams:
    """Map the dipole model to its charged twin: qB = mu*rho/(c^2 eps0),
    qPhi = mu*lam/(c^2 eps0), with trap and mass carried over unchanged."""
    params.require_numeric("mu", "lam", "rho", "c", "eps0", "K", "m")
    ce = params.c ** 2 * params.eps0
    return DualChargedParams(
        q=ExactScalar(1),
        B=params.mu * params.rho / ce,
        Phi=params.mu * params.lam / ce,
        K=params.K,
        m=params.m,
    )


def twin_radial_potential(dual: DualChargedParams, m_sector: int, hbar=ExactScalar(1)):
    """Effective radial potential of the charged twin, derived independently.

    For H = (1/2m)(p - q(A + A^AB))^2 + (K/2) x^2 in symmetric gauge with a
    solenoid flux, sector m reduces (same sqrt(r) ansatz) to

        V(r) = hbar^2 (nu^2 - 1/4)/(2 m r^2) + (m/2)(w_c^2/4 + K/m) r^2
               - hbar nu w_c / 2,

    with w_c = qB/m and nu = m - qPhi/(2 pi hbar).  Deliberately coded from
    the twin's own quantities so dipole/twin agreement is a real cross-check.
    """
    hbar = ExactScalar.from_value(hbar)
    alpha = dual.alpha(hbar)
    nu = ExactScalar(Fraction(m_sector)) - alpha if alpha.pi_pow == 0 else None
    nu_f = float(nu) if nu is not None else float(m_sector) - float(alpha)
    wc = float(dual.cyclotron())
    mass = float(dual.m)
    hb = float(hbar)
    a_cf = hb * hb * (nu_f * nu_f - 0.25) / (2.0 * mass)
    b_hm = 0.5 * mass * (wc * wc / 4.0 + float(dual.K) / mass)
    shift = -0.5 * hb * nu_f * wc

    def potential(r):
        arr = np.asarray(r, dtype=float)
        if np.any(arr <= 0):
            raise ValueError("the radial potential is defined for r > 0 only")
        vals = a_cf / (arr * arr) + b_hm * (arr * arr) + shift
        return vals if arr.shape else float(vals)

    meta = {
        "sector": int(m_sector),
        "nu": nu if nu is not None else nu_f,
        "cyclotron": dual.cyclotron(),
        "constant": shift,
    }
    return potential, meta


# ---------------------------------------------------------------------------
# Parameter files
# ---------------------------------------------------------------------------

_FILE_KEYS = set(_PARAM_FIELDS) | {"include_divergence_term"}


def parse_params_text(text: str) -> ModelParams:
    """Parse the flat key=value parameter format.

    Keys: mu, lam, rho, K, hbar, m, c, eps0, include_divergence_term.
    Values are exact: decimals become rationals ('0.2' -> 1/5), fractions and
    pi multiples are accepted ('3/4', 'pi/2').  '#' starts a comment.
    """
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _FILE_KEYS:
            raise ValueError(f"line {lineno}: unknown parameter {key!r}")
        if key == "include_divergence_term":
            low = value.lower()
            if low not in ("true", "false"):
                raise ValueError(f"line {lineno}: expected true/false, got {value!r}")
            values[key] = low == "true"
        else:
            try:
                values[key] = parse_scalar(value)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc
    return ModelParams(**values)


def load_params(path) -> ModelParams:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_params_text(fh.read())
