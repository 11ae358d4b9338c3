"""Exact symbolic algebra on the four-dimensional phase space (x1, x2, p1, p2).

Observables are finite sums of terms

    coeff * (parameter monomial) * x1^a1 * x2^a2 * p1^b1 * p2^b2 * r^(-2k)

with ``coeff`` an exact rational, the parameter monomial a Laurent monomial in
the physical symbols (mu, lam, rho, K, hbar, m, c, eps0, pi), and
``r^2 = x1^2 + x2^2``.  This is the smallest differentiation-closed class that
contains polynomials and the 1/r^2 radial profile of a line-charge field, so
Poisson brackets never leave it.

Everything here is exact: no floating point is used anywhere in this module.
Expressions are immutable after construction and all operations are pure
functions, so values can be shared freely across threads.

Canonical form
--------------
For every term with k > 0 the x-monomial is reduced modulo the relation
x1^2 = r^2 - x2^2, i.e. terms in an r^(-2k) bucket (k >= 1) carry x1-degree
zero or one.  This is polynomial division by (x1^2 + x2^2) with the leading
monomial x1^2, and it makes the representation of every element unique, so
equality is a dictionary comparison.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

__all__ = [
    "PARAMS",
    "Term",
    "PhaseSpaceExpr",
    "ConstraintSystem",
    "OscillatorSpectrum",
    "poisson_bracket",
    "build_constraint_system",
    "dirac_bracket",
    "quantize_quadratic",
    "BracketError",
    "QuantizeError",
]

# Fixed parameter universe; the order doubles as the canonical print order.
PARAMS = ("mu", "lam", "rho", "K", "hbar", "m", "c", "eps0", "pi")
_PARAM_INDEX = {name: i for i, name in enumerate(PARAMS)}

VARS = ("x1", "x2", "p1", "p2")


class BracketError(ValueError):
    """Raised for structurally invalid bracket/constraint operations."""


class QuantizeError(ValueError):
    """Raised when an observable is not quadratic in the supplied pair."""


ParamExps = tuple  # tuple[tuple[str, Fraction], ...], sorted by _PARAM_INDEX


def _norm_params(items: Iterable[tuple[str, Fraction]]) -> ParamExps:
    acc: dict[str, Fraction] = {}
    for name, exp in items:
        if name not in _PARAM_INDEX:
            raise ValueError(f"unknown parameter symbol {name!r}")
        e = acc.get(name, Fraction(0)) + Fraction(exp)
        if e:
            acc[name] = e
        elif name in acc:
            del acc[name]
    return tuple(sorted(acc.items(), key=lambda kv: _PARAM_INDEX[kv[0]]))


class Term(NamedTuple):
    """One canonical term.  ``rpow=k`` means a factor r^(-2k), k >= 0."""

    coeff: Fraction
    params: ParamExps
    xexp: tuple[int, int]
    pexp: tuple[int, int]
    rpow: int

    def key(self):
        return (self.params, self.xexp, self.pexp, self.rpow)

    def degree(self) -> int:
        return sum(self.xexp) + sum(self.pexp)


def _term_sort_key(key):
    params, xexp, pexp, rpow = key
    deg = sum(xexp) + sum(pexp)
    return (rpow, -deg, (-xexp[0], -xexp[1], -pexp[0], -pexp[1]), params)


class PhaseSpaceExpr:
    """An exact phase-space observable in canonical form.

    Supports +, -, *, ** (non-negative integer), and / by monomial
    expressions.  Instances are immutable; construct via the classmethods or
    :func:`dipolelab.parsing.parse_expr`.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None, *, _reduce: bool = True):
        raw = dict(terms) if terms else {}
        if _reduce:
            raw = _reduce_terms(raw)
        self._terms = {k: v for k, v in raw.items() if v}

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "PhaseSpaceExpr":
        return cls({})

    @classmethod
    def number(cls, value) -> "PhaseSpaceExpr":
        q = Fraction(value)
        if q == 0:
            return cls.zero()
        return cls({((), (0, 0), (0, 0), 0): q}, _reduce=False)

    @classmethod
    def one(cls) -> "PhaseSpaceExpr":
        return cls.number(1)

    @classmethod
    def symbol(cls, name: str, exp=1) -> "PhaseSpaceExpr":
        """A parameter symbol, e.g. symbol('mu') or symbol('c', -2)."""
        params = _norm_params([(name, Fraction(exp))])
        return cls({(params, (0, 0), (0, 0), 0): Fraction(1)}, _reduce=False)

    @classmethod
    def var(cls, name: str) -> "PhaseSpaceExpr":
        if name not in VARS:
            raise ValueError(f"unknown phase-space variable {name!r}")
        xe = [0, 0]
        pe = [0, 0]
        if name[0] == "x":
            xe[int(name[1]) - 1] = 1
        else:
            pe[int(name[1]) - 1] = 1
        return cls({((), tuple(xe), tuple(pe), 0): Fraction(1)}, _reduce=False)

    @classmethod
    def r2(cls, power: int = 1) -> "PhaseSpaceExpr":
        """(x1^2 + x2^2)^power for power >= 0, or r^(2*power) for power < 0."""
        if power >= 0:
            return (cls.var("x1") ** 2 + cls.var("x2") ** 2) ** power
        return cls({((), (0, 0), (0, 0), -power): Fraction(1)}, _reduce=False)

    @classmethod
    def from_term(cls, coeff, params=(), xexp=(0, 0), pexp=(0, 0), rpow=0) -> "PhaseSpaceExpr":
        q = Fraction(coeff)
        if q == 0:
            return cls.zero()
        return cls({(_norm_params(params), tuple(xexp), tuple(pexp), int(rpow)): q})

    # -- views ---------------------------------------------------------------

    def terms(self) -> list[Term]:
        """Canonically ordered list of terms."""
        out = []
        for key in sorted(self._terms, key=_term_sort_key):
            params, xexp, pexp, rpow = key
            out.append(Term(self._terms[key], params, xexp, pexp, rpow))
        return out

    def is_zero(self) -> bool:
        return not self._terms

    def is_param_constant(self) -> bool:
        """True when no x, p, or radial factor appears (parameters allowed)."""
        return all(
            xexp == (0, 0) and pexp == (0, 0) and rpow == 0
            for (_, xexp, pexp, rpow) in self._terms
        )

    def is_monomial(self) -> bool:
        return len(self._terms) <= 1

    def single_term(self) -> Term:
        if len(self._terms) != 1:
            raise ValueError("expression is not a single term")
        return self.terms()[0]

    def max_degree(self) -> int:
        return max((sum(x) + sum(p) for (_, x, p, _) in self._terms), default=0)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other) -> "PhaseSpaceExpr":
        other = _coerce(other)
        acc = dict(self._terms)
        for key, c in other._terms.items():
            acc[key] = acc.get(key, Fraction(0)) + c
        return PhaseSpaceExpr(acc, _reduce=False)

    __radd__ = __add__

    def __neg__(self) -> "PhaseSpaceExpr":
        return PhaseSpaceExpr({k: -c for k, c in self._terms.items()}, _reduce=False)

    def __sub__(self, other) -> "PhaseSpaceExpr":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "PhaseSpaceExpr":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "PhaseSpaceExpr":
        other = _coerce(other)
        acc: dict[tuple, Fraction] = {}
        for (pa, xa, qa, ka), ca in self._terms.items():
            for (pb, xb, qb, kb), cb in other._terms.items():
                key = (
                    _norm_params(list(pa) + list(pb)),
                    (xa[0] + xb[0], xa[1] + xb[1]),
                    (qa[0] + qb[0], qa[1] + qb[1]),
                    ka + kb,
                )
                acc[key] = acc.get(key, Fraction(0)) + ca * cb
        return PhaseSpaceExpr(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "PhaseSpaceExpr":
        if not isinstance(n, int) or n < 0:
            raise ValueError("expressions support non-negative integer powers only")
        out = PhaseSpaceExpr.one()
        base = self
        k = n
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __truediv__(self, other) -> "PhaseSpaceExpr":
        other = _coerce(other)
        if len(other._terms) != 1:
            raise BracketError("division is only defined by monomial expressions")
        (params, xexp, pexp, rpow), c = next(iter(other._terms.items()))
        if xexp != (0, 0) or pexp != (0, 0):
            raise BracketError("division by x/p factors is not supported")
        inv_params = _norm_params(tuple((name, -e) for name, e in params))
        out = self * PhaseSpaceExpr({(inv_params, (0, 0), (0, 0), 0): 1 / c}, _reduce=False)
        if rpow:
            # dividing by r^(-2k) means multiplying by (x1^2 + x2^2)^k
            out = out * PhaseSpaceExpr.r2(rpow)
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = PhaseSpaceExpr.number(other)
        if not isinstance(other, PhaseSpaceExpr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        from .parsing import format_expr

        return f"PhaseSpaceExpr({format_expr(self)!r})"

    def __str__(self):
        from .parsing import format_expr

        return format_expr(self)

    # -- calculus ------------------------------------------------------------

    def diff(self, name: str) -> "PhaseSpaceExpr":
        """Exact partial derivative with respect to x1, x2, p1 or p2."""
        if name not in VARS:
            raise ValueError(f"cannot differentiate with respect to {name!r}")
        acc: dict[tuple, Fraction] = {}

        def _add(key, c):
            if c:
                acc[key] = acc.get(key, Fraction(0)) + c

        for (params, xexp, pexp, rpow), c in self._terms.items():
            if name[0] == "p":
                i = int(name[1]) - 1
                if pexp[i]:
                    pe = list(pexp)
                    pe[i] -= 1
                    _add((params, xexp, tuple(pe), rpow), c * pexp[i])
                continue
            i = int(name[1]) - 1
            if xexp[i]:
                xe = list(xexp)
                xe[i] -= 1
                _add((params, tuple(xe), pexp, rpow), c * xexp[i])
            if rpow:
                # d/dx_i (r^2)^(-k) = -k (r^2)^(-k-1) * 2 x_i
                xe = list(xexp)
                xe[i] += 1
                _add((params, tuple(xe), pexp, rpow + 1), c * (-2 * rpow))
        return PhaseSpaceExpr(acc)

    # -- substitution and evaluation ------------------------------------------

    def substitute_params(self, values: Mapping[str, object]) -> "PhaseSpaceExpr":
        """Substitute exact values for parameter symbols.

        Values may be ints, Fractions, or pairs ``(Fraction, pi_power)``
        meaning ``q * pi^n`` (how the model layer encodes e.g. lam = pi/2).
        Symbols absent from the mapping are left untouched.
        """
        acc: dict[tuple, Fraction] = {}
        for (params, xexp, pexp, rpow), c in self._terms.items():
            coeff = c
            pi_extra = Fraction(0)
            keep: list[tuple[str, Fraction]] = []
            for name, exp in params:
                if name not in values:
                    keep.append((name, exp))
                    continue
                val = values[name]
                if isinstance(val, tuple):
                    q, npi = Fraction(val[0]), Fraction(val[1])
                else:
                    q, npi = Fraction(val), Fraction(0)
                if q == 0:
                    if exp < 0:
                        raise ZeroDivisionError(
                            f"parameter {name} = 0 appears with negative exponent"
                        )
                    coeff = Fraction(0)
                    break
                if exp.denominator != 1:
                    raise ValueError("cannot substitute into a fractional exponent")
                coeff *= q ** int(exp)
                pi_extra += npi * exp
            if coeff == 0:
                continue
            if pi_extra:
                keep.append(("pi", pi_extra))
            key = (_norm_params(keep), xexp, pexp, rpow)
            acc[key] = acc.get(key, Fraction(0)) + coeff
        return PhaseSpaceExpr(acc, _reduce=False)

    def evaluate_point(self, x: Sequence, p: Sequence = (0, 0)) -> "PhaseSpaceExpr":
        """Substitute an exact rational phase-space point; parameters survive."""
        x1, x2 = Fraction(x[0]), Fraction(x[1])
        p1, p2 = Fraction(p[0]), Fraction(p[1])
        r2 = x1 * x1 + x2 * x2
        acc: dict[tuple, Fraction] = {}
        for (params, xexp, pexp, rpow), c in self._terms.items():
            if rpow and r2 == 0:
                raise ZeroDivisionError("expression has r^(-2k) factors at the origin")
            val = c * x1 ** xexp[0] * x2 ** xexp[1] * p1 ** pexp[0] * p2 ** pexp[1]
            if rpow:
                val /= r2 ** rpow
            if val:
                key = (params, (0, 0), (0, 0), 0)
                acc[key] = acc.get(key, Fraction(0)) + val
        return PhaseSpaceExpr(acc, _reduce=False)

    def to_float(self, params: Mapping[str, float], point=None) -> float:
        """Numeric value with float parameter values (supply pi explicitly
        or it defaults to math.pi)."""
        import math

        vals = dict(params)
        vals.setdefault("pi", math.pi)
        x1 = x2 = p1 = p2 = 0.0
        if point is not None:
            x1, x2, p1, p2 = (float(v) for v in point)
        total = 0.0
        for (pars, xexp, pexp, rpow), c in self._terms.items():
            v = float(c)
            for name, exp in pars:
                if name not in vals:
                    raise KeyError(f"no numeric value supplied for {name!r}")
                v *= float(vals[name]) ** float(exp)
            v *= x1 ** xexp[0] * x2 ** xexp[1] * p1 ** pexp[0] * p2 ** pexp[1]
            if rpow:
                v /= (x1 * x1 + x2 * x2) ** rpow
            total += v
        return total


def _coerce(value) -> PhaseSpaceExpr:
    if isinstance(value, PhaseSpaceExpr):
        return value
    if isinstance(value, (int, Fraction)):
        return PhaseSpaceExpr.number(value)
    raise TypeError(f"cannot interpret {value!r} as a phase-space expression")


def _reduce_terms(raw: dict[tuple, Fraction]) -> dict[tuple, Fraction]:
    """Canonical reduction: in every r^(-2k) bucket with k >= 1, rewrite
    x1^2 -> (x1^2 + x2^2) - x2^2 until all such buckets have x1-degree <= 1."""
    out: dict[tuple, Fraction] = {}
    work = [(key, c) for key, c in raw.items() if c]
    while work:
        (params, xexp, pexp, rpow), c = work.pop()
        if rpow > 0 and xexp[0] >= 2:
            a1, a2 = xexp
            # x1^a1 x2^a2 r^-2k = x1^(a1-2) x2^a2 r^-2(k-1) - x1^(a1-2) x2^(a2+2) r^-2k
            work.append(((params, (a1 - 2, a2), pexp, rpow - 1), c))
            work.append(((params, (a1 - 2, a2 + 2), pexp, rpow), -c))
            continue
        key = (params, xexp, pexp, rpow)
        newc = out.get(key, Fraction(0)) + c
        if newc:
            out[key] = newc
        elif key in out:
            del out[key]
    return out


# ---------------------------------------------------------------------------
# Poisson and Dirac brackets
# ---------------------------------------------------------------------------


def poisson_bracket(f: PhaseSpaceExpr, g: PhaseSpaceExpr) -> PhaseSpaceExpr:
    """{f, g} = sum_i (df/dx_i dg/dp_i - df/dp_i dg/dx_i), exact."""
    f = _coerce(f)
    g = _coerce(g)
    out = PhaseSpaceExpr.zero()
    for i in ("1", "2"):
        out = out + f.diff("x" + i) * g.diff("p" + i) - f.diff("p" + i) * g.diff("x" + i)
    return out


class ConstraintSystem(NamedTuple):
    """Constraints with their mutual bracket matrix.

    ``classification`` is one of 'second-class', 'singular', 'non-constant'.
    ``inverse_matrix`` is present only for second-class systems.
    """

    constraints: tuple
    bracket_matrix: tuple  # tuple of tuples of PhaseSpaceExpr
    inverse_matrix: tuple | None
    classification: str

    @property
    def second_class(self) -> bool:
        return self.classification == "second-class"


def build_constraint_system(constraints: Sequence[PhaseSpaceExpr]) -> ConstraintSystem:
    """Classify a constraint set by its Poisson-bracket matrix.

    The bracket matrix must be constant (rationals times parameter
    monomials); a non-constant matrix is reported via the classification
    field.  A constant but singular matrix is classified 'singular'
    (not second class); an invertible one gets its exact inverse.
    """
    cs = tuple(constraints)
    n = len(cs)
    matrix = [[poisson_bracket(cs[i], cs[j]) for j in range(n)] for i in range(n)]
    constant = all(matrix[i][j].is_param_constant() for i in range(n) for j in range(n))
    if not constant:
        return ConstraintSystem(cs, tuple(tuple(row) for row in matrix), None, "non-constant")
    try:
        inverse = _invert_constant_matrix(matrix)
    except _SingularMatrix:
        return ConstraintSystem(cs, tuple(tuple(row) for row in matrix), None, "singular")
    return ConstraintSystem(
        cs, tuple(tuple(row) for row in matrix), tuple(tuple(row) for row in inverse), "second-class"
    )


class _SingularMatrix(Exception):
    pass


def _invert_constant_matrix(matrix) -> list[list[PhaseSpaceExpr]]:
    """Gauss-Jordan over the exact coefficient ring.

    Pivots must stay monomial for the division to be representable; the
    model's 2x2 antisymmetric constraint matrices always satisfy this.  A
    matrix needing division by a genuine sum raises BracketError rather than
    approximating.
    """
    n = len(matrix)
    a = [[matrix[i][j] for j in range(n)] for i in range(n)]
    inv = [
        [PhaseSpaceExpr.one() if i == j else PhaseSpaceExpr.zero() for j in range(n)]
        for i in range(n)
    ]
    for col in range(n):
        pivot_row = None
        for r in range(col, n):
            if not a[r][col].is_zero():
                pivot_row = r
                break
        if pivot_row is None:
            raise _SingularMatrix
        a[col], a[pivot_row] = a[pivot_row], a[col]
        inv[col], inv[pivot_row] = inv[pivot_row], inv[col]
        pivot = a[col][col]
        if not pivot.is_monomial():
            raise BracketError(
                "constraint matrix inverse is not representable: pivot is not a monomial"
            )
        for j in range(n):
            a[col][j] = a[col][j] / pivot
            inv[col][j] = inv[col][j] / pivot
        for r in range(n):
            if r == col or a[r][col].is_zero():
                continue
            factor = a[r][col]
            for j in range(n):
                a[r][j] = a[r][j] - factor * a[col][j]
                inv[r][j] = inv[r][j] - factor * inv[col][j]
    return inv


def dirac_bracket(f: PhaseSpaceExpr, g: PhaseSpaceExpr, cs: ConstraintSystem) -> PhaseSpaceExpr:
    """{f,g}_D = {f,g} - {f,phi_m} (C^-1)_mn {phi_n,g}, exact."""
    if not cs.second_class:
        raise BracketError(f"constraint system is not second class ({cs.classification})")
    out = poisson_bracket(f, g)
    n = len(cs.constraints)
    fb = [poisson_bracket(f, cs.constraints[m]) for m in range(n)]
    gb = [poisson_bracket(cs.constraints[m], g) for m in range(n)]
    for m_idx in range(n):
        for n_idx in range(n):
            out = out - fb[m_idx] * cs.inverse_matrix[m_idx][n_idx] * gb[n_idx]
    return out


# ---------------------------------------------------------------------------
# Quantization of quadratic observables
# ---------------------------------------------------------------------------


class OscillatorSpectrum(NamedTuple):
    """Spectrum rule  E_n = offset + (n + 1/2) * hbar_eff * freq.

    ``hbar_eff`` is hbar * |{u, v}| (the effective commutator scale after
    rescaling the pair to canonical form), ``freq`` is 2*sqrt(A*B); both are
    exact expressions (square roots appear as half-integer parameter
    exponents).  Quantum commutators are i*hbar*(bracket); the factor i is
    metadata, never an algebraic element, so the bracket's sign enters only
    through the absolute value.
    """

    hbar_eff: PhaseSpaceExpr
    freq: PhaseSpaceExpr
    offset: PhaseSpaceExpr

    def level(self, n: int) -> PhaseSpaceExpr:
        return self.offset + (Fraction(2 * n + 1, 2)) * self.hbar_eff * self.freq

    def spacing(self) -> PhaseSpaceExpr:
        return self.hbar_eff * self.freq


def _sqrt_expr(e: PhaseSpaceExpr) -> PhaseSpaceExpr:
    t = e.single_term()
    if t.xexp != (0, 0) or t.pexp != (0, 0) or t.rpow != 0:
        raise QuantizeError("square root of a non-constant expression")
    if t.coeff <= 0:
        raise QuantizeError("square root of a non-positive coefficient")
    num = _isqrt_exact(t.coeff.numerator)
    den = _isqrt_exact(t.coeff.denominator)
    if num is None or den is None:
        raise QuantizeError(
            f"coefficient {t.coeff} is not a perfect rational square; "
            "only parameter symbols may carry half-integer exponents"
        )
    half = tuple((name, exp / 2) for name, exp in t.params)
    return PhaseSpaceExpr({(_norm_params(half), (0, 0), (0, 0), 0): Fraction(num, den)}, _reduce=False)


def _isqrt_exact(n: int):
    import math

    r = math.isqrt(n)
    return r if r * r == n else None


def quantize_quadratic(
    obs: PhaseSpaceExpr,
    pair: tuple[PhaseSpaceExpr, PhaseSpaceExpr],
    bracket: Callable[[PhaseSpaceExpr, PhaseSpaceExpr], PhaseSpaceExpr] = poisson_bracket,
    hbar: PhaseSpaceExpr | None = None,
) -> OscillatorSpectrum:
    """Quantize obs = A*u^2 + B*v^2 + const where {u, v} = beta is constant.

    ``bracket`` is the bracket under which (u, v) is conjugate — the plain
    Poisson bracket, or a Dirac bracket closure for reduced models.  After
    rescaling the pair to a canonical one, the oscillator rule is

        E_n = const + (n + 1/2) * hbar * 2*sqrt(A*B) * |beta|.

    The coefficients A and B are extracted with the bracket itself (for a
    quadratic observable {{obs, v}, v} = 2*A*beta^2 and {{obs, u}, u} =
    2*B*beta^2), so no structure is assumed beyond what the bracket reveals;
    cross terms, higher powers, or a non-constant beta are rejected.
    """
    u, v = pair
    beta = bracket(u, v)
    if beta.is_zero() or not beta.is_param_constant():
        raise QuantizeError("pair bracket must be a nonzero constant")
    if not beta.is_monomial():
        raise QuantizeError("pair bracket must be a single parameter monomial")

    duu = bracket(bracket(obs, v), v)
    dvv = bracket(bracket(obs, u), u)
    duv = bracket(bracket(obs, u), v)
    beta2 = beta * beta
    if not duv.is_zero():
        raise QuantizeError("cross term u*v present in observable")
    if not (duu.is_param_constant() and dvv.is_param_constant()):
        raise QuantizeError("observable is not quadratic in the supplied pair")
    a_expr = (duu / beta2) * Fraction(1, 2)
    b_expr = (dvv / beta2) * Fraction(1, 2)
    if a_expr.is_zero() or b_expr.is_zero():
        raise QuantizeError("observable is degenerate (missing u^2 or v^2 part)")

    offset = obs - a_expr * u * u - b_expr * v * v
    if not offset.is_param_constant():
        raise QuantizeError("observable has non-constant remainder (linear terms?)")

    freq = 2 * _sqrt_expr(a_expr * b_expr)
    beta_term = beta.single_term()
    beta_abs = PhaseSpaceExpr(
        {(beta_term.params, (0, 0), (0, 0), 0): abs(beta_term.coeff)}, _reduce=False
    )
    if hbar is None:
        hbar = PhaseSpaceExpr.symbol("hbar")
    return OscillatorSpectrum(hbar_eff=hbar * beta_abs, freq=freq, offset=offset)
