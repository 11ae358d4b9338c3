# Where the s-wave extrapolation constant comes from.
#
# The nu = 0 radial sector converges only logarithmically: the reduced
# equation near the origin is  -u'' - u/(4 r^2) = 0,  whose solutions are
# sqrt(r) and sqrt(r) ln r, and a finite-difference lattice r = i*h with a
# hard wall at i = 0 picks out one particular mixture of the two.  The
# extrapolation ladder therefore fits eigenvalues in the variable
#
#     theta = 1 / (ln(1/h) + C),
#
# and the constant C is NOT adjustable: it is fixed by the lattice's local
# connection problem at the origin.  This script derives it.
#
# On the unit lattice the zero-energy equation is the three-term recursion
#
#     v[i+1] - 2 v[i] + v[i-1] = -v[i] / (4 i^2),
#
# and the wall solution starts v[0] = 0, v[1] = 1.  Two formal solutions
# have large-i expansions (sqrt and log branches, matching sqrt(r) and
# sqrt(r) ln r):
#
#     W[i] = sqrt(i) (1 + 5/(256 i^2) - 903/(262144 i^4) + ...)
#     U[i] = W[i] ln i + sqrt(i) (-1/(768 i^2) + 32261/(7864320 i^4) - ...)
#
# Writing v = A U + B W and extracting A, B with lattice Wronskians gives
#
#     v[i] ~ A sqrt(i) (ln i + c*),   c* = B / A,
#
# and since ln i = ln r + ln(1/h) on r = i*h, the wall's log offset flows
# exactly like ln(1/h) + c*.  The claim checked below: c* equals
# euler_gamma + 6 ln 2 - 2, the constant the radial module ships.

import math

import numpy as np

from dipolelab import C_BOUNDARY, ModelParams, converge


def sqrt_branch(i: np.ndarray) -> np.ndarray:
    """Asymptotic lattice solution that tends to sqrt(r)."""
    return np.sqrt(i) * (1 + 5 / (256 * i**2) - 903 / (262144 * i**4)
                         + 136565 / (67108864 * i**6))


def log_branch(i: np.ndarray) -> np.ndarray:
    """Asymptotic lattice solution that tends to sqrt(r) ln r."""
    tail = (-1 / (768 * i**2) + 32261 / (7864320 * i**4)
            - 30056525 / (8455716864 * i**6))
    return sqrt_branch(i) * np.log(i) + np.sqrt(i) * tail


def wronskian(f, g, i: int) -> float:
    return f[i + 1] * g[i] - f[i] * g[i + 1]


def recursion_residual(f, i: np.ndarray) -> np.ndarray:
    return f(i + 1) - 2 * f(i) + f(i - 1) + f(i) / (4 * i**2)


i0 = 10_000

# March the wall solution out to i0 + 1.
v = np.zeros(i0 + 2)
v[1] = 1.0
for i in range(1, i0 + 1):
    v[i + 1] = 2 * v[i] - v[i - 1] - v[i] / (4 * i * i)

# Check the expansions really solve the lattice equation out there
# (they are asymptotic series; the residual measures the dropped orders).
probe = np.array([i0 - 1, i0], dtype=float)
print("recursion residuals of the series at i ~ 1e4 "
      "(scale: the solutions are ~ 1e2):")
print(f"  sqrt branch: {np.max(np.abs(recursion_residual(sqrt_branch, probe))):.2e}")
print(f"  log branch:  {np.max(np.abs(recursion_residual(log_branch, probe))):.2e}")

idx = np.arange(i0 + 2, dtype=float)
idx[0] = 1.0  # never evaluated at 0; keep the array finite
W = sqrt_branch(idx)
U = log_branch(idx)

# The lattice Wronskian of two solutions of u[i+1] - 2u[i] + u[i-1] = c_i u[i]
# is i-independent, so it can be read off at i0 where the expansions hold.
wr_UW = wronskian(U, W, i0)
A = wronskian(v, W, i0) / (-wr_UW)
B = wronskian(v, U, i0) / wr_UW
c_star = B / A

closed_form = np.euler_gamma + 6 * math.log(2) - 2
print(f"\nc* from the connection problem: {c_star:.12f}")
print(f"euler_gamma + 6 ln 2 - 2:       {closed_form:.12f}")
print(f"shipped C_BOUNDARY:             {C_BOUNDARY:.12f}")
print(f"difference (series truncation): {c_star - closed_form:.2e}")
assert abs(c_star - C_BOUNDARY) < 1e-8

# --- why the constant matters -------------------------------------------
# Extrapolate the bare trapped s-wave ground level (exact value 1) from the
# same rung history, once with theta built on C_BOUNDARY and once with the
# naive choice C = 0.  Same data, same model order -- only the constant
# differs.
params = ModelParams(lam=0, rho=0, K=1)
res = converge(params, 0, 1, 5e-4)
rungs = res.info["rungs"]
hs = np.array([r["h"] for r in rungs])[-7:]
es = np.array([r["values"][0] for r in rungs])[-7:]

print("\nextrapolating the s-wave oscillator ground level (exact: 1):")
for label, c in [("C_BOUNDARY", C_BOUNDARY), ("C = 0     ", 0.0)]:
    theta = 1.0 / (np.log(1.0 / hs) + c)
    coeffs = np.polyfit(theta, es, 3)
    print(f"  {label}: extrapolated = {coeffs[-1]:.8f} "
          f"(error {abs(coeffs[-1] - 1.0):.1e})")
print(f"  ladder's own answer:   {res.eigenvalues[0]:.8f} "
      f"(error {abs(res.eigenvalues[0] - 1.0):.1e})")
