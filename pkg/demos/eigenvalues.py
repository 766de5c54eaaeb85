"""Principal Dirichlet eigenvalues of stable generators.

For the Brownian case the interval eigenvalue is pi^2 and Rayleigh-Ritz hits it
to machine precision.  For the Cauchy generator there is no closed form; the
Ritz upper bounds decrease with the basis size towards the known value
1.1577738836 on [-1, 1] (2.3155 on the unit interval).  The last block shows
that among domains of unit volume the disc beats the square.

    python3 demos/eigenvalues.py
"""
import argparse
import math

from scipy.special import jn_zeros

from stablewalk.stablelaw import LimitLaw
from stablewalk.varconst import Domain, eigen_rayleigh


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-basis", type=int, default=128)
    args = ap.parse_args()

    unit = Domain.interval(0.0, 1.0)
    gauss = LimitLaw.axis_stable([2.0], [1.0])
    r = eigen_rayleigh(gauss, unit, basis_size=16)
    print(f"Gaussian, unit interval: {r.lam:.12f}  (pi^2 = {math.pi**2:.12f})")

    cauchy = LimitLaw.isotropic(1.0, 1)
    print("\nCauchy, unit interval (Ritz upper bounds):")
    N = 16
    while N <= args.max_basis:
        r = eigen_rayleigh(cauchy, unit, basis_size=N)
        print(f"  N={N:4d}  lambda <= {r.lam:.10f}   quadrature defect {r.residual:.1e}")
        N *= 2
    print(f"  reference 2 * 1.1577738836 = {2 * 1.1577738836:.10f}")

    g2 = LimitLaw.isotropic(2.0, 2)
    disc = eigen_rayleigh(g2, Domain.unit_volume_ball(2), basis_size=24).lam
    square = eigen_rayleigh(g2, Domain.box([1.0, 1.0]), basis_size=12).lam
    print(f"\n-Laplacian, unit area: disc {disc:.8f} (pi j01^2 = {math.pi * jn_zeros(0, 1)[0] ** 2:.8f}),"
          f" square {square:.8f} (2 pi^2 = {2 * math.pi**2:.8f})")


if __name__ == "__main__":
    main()
