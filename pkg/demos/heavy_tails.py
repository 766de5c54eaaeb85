"""Heavy-tailed steps and their stable limit.

Draw steps from the radial law P(k) ~ c (1+|k|)^{-1-alpha}, check that the
tail frequencies match the exact Hurwitz-zeta tails, and measure how fast the
rescaled n-step law approaches the alpha-stable density (local limit theorem).

    python3 demos/heavy_tails.py --alpha 1.5
"""
import argparse

import numpy as np

from stablewalk import steplaw as sl
from stablewalk.occupation import replica_rng
from stablewalk.stablelaw import attracting_limit, llt_error


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    law = sl.radial(args.alpha)
    x = law.sample(replica_rng(args.seed, 0), args.samples).ravel()
    print(f"alpha={args.alpha}, normalizer c={law.normalizer:.10f}")
    print(f"{'m':>6} {'P(|X|>m) exact':>16} {'empirical':>12}")
    margin = law.one_dim_marginals()[0]
    for m in (1, 10, 100, 1000):
        exact = float(margin.abs_survival(m))
        print(f"{m:6d} {exact:16.6e} {np.mean(np.abs(x) > m):12.6e}")

    ll, ns = attracting_limit(law)
    print("\nsup-norm LLT error, det(B_n) mu^n(x) vs limit density:")
    for n in (16, 64, 256, 1024):
        r = llt_error(law, ll, ns, n)
        print(f"  n={n:5d}  det B_n={r.det_Bn:6d}  error={r.error:.3e}")


if __name__ == "__main__":
    main()
