"""Fractional angular-momentum ladder measured on guiding-center orbits.

The constrained model (both radial fields on, heavy-mass surface) leaves a
single pair of noncommuting coordinates with Dirac bracket
{x1, x2} = -c^2 eps0 / (mu rho).  Quantizing the reduced angular momentum

    J~ = mu*lam/(2 pi c^2 eps0) + (mu rho / 2 c^2 eps0) r^2

gives the exact ladder (k + 1/2) hbar + hbar*alpha, with alpha the flux
fraction mu*lam/(2 pi hbar c^2 eps0) -- the eigenvalues are fractional.

With a finite mass and a weak trap K the constraint only holds
approximately.  This script measures hbar*alpha + (m Omega / 2) <R^2> on
lowest-band trapped states (R is the guiding-center radius) and watches it
converge onto the exact fractional ladder as t = K/(m Omega^2) -> 0, with
the documented (1 + k) t^2 deviation law.
"""

import argparse

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from dipolelab import ModelParams, guiding_center_check, reduced_j_spectrum
from dipolelab.parsing import format_expr


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="fractional_ladder.png")
    ap.add_argument("--tol", type=float, default=1e-8,
                    help="radial solver tolerance (floored for the k=0 rung)")
    args = ap.parse_args()

    params = ModelParams(mu=1, lam="3*pi/5", rho=1, K="1/5")
    alpha = float(params.alpha)

    spec = reduced_j_spectrum(params)
    print("exact reduced-J ladder from Dirac-bracket quantization:")
    print(f"  spacing = {format_expr(spec.spacing())}")
    print(f"  offset  = {format_expr(spec.offset)}")
    for k in range(3):
        print(f"  level({k}) = {format_expr(spec.level(k))}")

    ladder = [1e-2, 1e-3, 1e-4]
    sectors = range(1, 6)
    rows = guiding_center_check(params, sectors, ladder, tol=args.tol)

    print(f"\nmeasured hbar*alpha + (m Omega/2)<R^2>, alpha = {alpha}:")
    print("  m   t        measured      target        deviation  mixing")
    for row in rows:
        k = row["sector"] - 1
        target = (k + 0.5) + alpha
        print(f"  {row['sector']}  {row['t']:.0e}  {row['measured']:.9f}"
              f"  {target:.9f}  {row['deviation']:.3e}  {row['band_mixing']}")

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.0, 4.2))

    # Left: the measured ladder at the coldest rung against the exact rule.
    coldest = [r for r in rows if r["t"] == min(ladder)]
    ks = np.array([r["sector"] - 1 for r in coldest])
    ax1.plot(ks, ks + 0.5 + alpha, "-", color="0.6",
             label=r"$(k + \frac{1}{2})\hbar + \alpha\hbar$")
    ax1.plot(ks, [r["measured"] for r in coldest], "o", color="C3",
             label=f"measured, t = {min(ladder):g}")
    ax1.set_xlabel("band index k")
    ax1.set_ylabel(r"$\langle \tilde J \rangle / \hbar$")
    ax1.set_xticks(ks)
    ax1.legend()

    # Right: cooling-limit convergence, one line per sector, with the
    # (1 + k) t^2 law as a guide.
    for sector in sectors:
        mine = [r for r in rows if r["sector"] == sector]
        ts = np.array([r["t"] for r in mine])
        devs = np.array([r["deviation"] for r in mine])
        ax2.loglog(ts, devs, "o-", ms=4, label=f"k = {sector - 1}")
    guide = np.array(ladder)
    ax2.loglog(guide, guide ** 2, "--", color="0.5", lw=1, label=r"$t^2$")
    ax2.set_xlabel(r"$t = K / (m\Omega^2)$")
    ax2.set_ylabel("deviation from exact ladder")
    ax2.legend(fontsize=8)

    fig.suptitle(r"Guiding-center fractional ladder at $\alpha = 0.3$")
    fig.tight_layout()
    fig.savefig(args.out, dpi=160)
    print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
